// phflow command-line front end.
//
//   phflow run [preset] [--config file.json] [--out dir] [--<key> value ...]
//   phflow denoise-circle [--<key> value ...]
//   phflow emerge-circle [--<key> value ...]
//   phflow pd --input cloud.csv --dim p [--max-radius r] [--out dgm.csv]
//
// Exit status: 0 on success, 1 on runtime or IO failure, 2 on usage or config errors.

#include <algorithm>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "phflow/artifacts.hpp"
#include "phflow/complex.hpp"
#include "phflow/io.hpp"
#include "phflow/persistence.hpp"
#include "phflow/run_config.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct KeyFlags {
  std::map<std::string, std::string> values;  // key -> raw text, in key order
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void attach(CLI::App& app) {
    for (const auto& key : phflow::config_key_names()) {
      std::string names = "--" + key;
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (dashed != key) names += ",--" + dashed;
      CLI::Option* opt = nullptr;
      if (key == "plots" || key == "exact_transport") {
        opt = app.add_flag(names + "{true}", values[key], "config key " + key);
      } else {
        opt = app.add_option(names, values[key], "config key " + key);
      }
      options.emplace_back(key, opt);
    }
  }

  std::vector<std::pair<std::string, std::string>> given() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) out.emplace_back(key, values.at(key));
    return out;
  }
};

int run_command(const std::string& preset, const std::string& config_path, const KeyFlags& flags) {
  phflow::RunConfig config;
  try {
    const nlohmann::ordered_json file =
        config_path.empty() ? nlohmann::ordered_json::object() : phflow::load_config_file(config_path);
    config = phflow::resolve_run_config(preset, file, flags.given());
    phflow::validate_run_config(config);
  } catch (const phflow::Error& e) {
    std::cerr << "phflow: " << e.what() << "\n";
    return e.kind() == phflow::ErrorKind::io ? kExitRuntime : kExitUsage;
  }

  const phflow::FlowTrajectory traj = phflow::run_experiment(config);
  phflow::ArtifactOptions options;
  options.plots = config.plots;
  options.run = phflow::run_config_json(config);
  phflow::emit_artifacts(traj, config.out, options);
  std::cout << "wrote " << traj.steps.size() << " steps to " << config.out << "\n";
  if (!traj.ok()) {
    std::cerr << "phflow: flow stopped early: " << *traj.error << "\n";
    return kExitRuntime;
  }
  return 0;
}

int pd_command(const std::string& input, int dim, double max_radius, const std::string& out) {
  if (dim < 0 || dim > 1) {
    std::cerr << "phflow: --dim must be 0 or 1\n";
    return kExitUsage;
  }
  const phflow::PointCloud cloud = phflow::io::read_point_cloud_csv(input);
  const phflow::FilteredComplex complex = phflow::build_rips(cloud, dim + 1, max_radius);
  const auto dgms = phflow::compute_diagrams(complex, dim);
  const std::string csv = phflow::io::diagram_csv(dgms.at(static_cast<std::size_t>(dim)));
  if (out.empty()) {
    std::cout << csv;
  } else {
    phflow::io::write_text(out, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistence-diagram flows on point clouds"};
  app.require_subcommand(1);

  std::string run_preset, run_config;
  KeyFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run a flow from a config file, preset or flags");
  run->add_option("name", run_preset, "preset name (denoise-circle | emerge-circle)");
  run->add_option("--config", run_config, "flat JSON config file");
  run_flags.attach(*run);

  std::map<std::string, KeyFlags> preset_flags;
  std::map<std::string, CLI::App*> preset_apps;
  std::map<std::string, std::string> preset_config_paths;
  for (const auto& name : phflow::preset_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " preset");
    sub->add_option("--config", preset_config_paths[name], "flat JSON config file");
    preset_flags[name].attach(*sub);
    preset_apps[name] = sub;
  }

  std::string pd_input, pd_out;
  int pd_dim = 0;
  double pd_radius = 0.0;
  CLI::App* pd = app.add_subcommand("pd", "persistence diagram of a point cloud under the Rips filtration");
  pd->add_option("--input", pd_input, "point-cloud CSV")->required();
  pd->add_option("--dim", pd_dim, "homology degree (0 or 1)")->required();
  pd->add_option("--max-radius,--max_radius", pd_radius, "largest edge length (default 1.1 x diameter)");
  pd->add_option("--out", pd_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return run_command(run_preset, run_config, run_flags);
    for (const auto& [name, sub] : preset_apps)
      if (sub->parsed()) return run_command(name, preset_config_paths[name], preset_flags[name]);
    if (pd->parsed()) return pd_command(pd_input, pd_dim, pd_radius, pd_out);
  } catch (const phflow::Error& e) {
    std::cerr << "phflow: " << e.what() << "\n";
    return e.kind() == phflow::ErrorKind::config ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "phflow: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
