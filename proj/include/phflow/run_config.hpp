#pragma once

// Run configuration for the command-line front end: a flat key/value layer over
// FlowConfig plus the data source, with presets for the two reference experiments.
//
// Layers are applied in order defaults -> preset -> config file -> flags, so a later
// layer overrides an earlier one key by key.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "phflow/dynamics.hpp"
#include "phflow/errors.hpp"
#include "phflow/generators.hpp"
#include "phflow/io.hpp"

namespace phflow {

struct RunConfig {
  FlowConfig flow;
  std::string preset;     // denoise-circle | emerge-circle
  std::string input;      // point-cloud CSV
  std::string generator;  // circle | square
  std::size_t n = 100;
  double radius = 1.0;
  double sigma = 0.05;
  std::string out = "phflow_out";
  bool plots = false;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"denoise-circle", "emerge-circle"};
  return names;
}

/// Parses "b,d;b,d;..." into diagram points.
inline std::vector<Point2> parse_target(const std::string& text) {
  std::vector<Point2> out;
  for (const auto& item : io::split(text, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const auto xy = io::split(item, ',');
    if (xy.size() != 2) throw Error(ErrorKind::config, "target entry '" + item + "' is not 'birth,death'");
    Point2 p{};
    try {
      p = {io::parse_double(xy[0], "target"), io::parse_double(xy[1], "target")};
    } catch (const Error& e) {
      throw Error(ErrorKind::config, e.what());
    }
    out.push_back(p);
  }
  return out;
}

inline std::string format_target(const std::vector<Point2>& points) {
  std::string out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) out += ';';
    out += io::format_double(points[i][0]) + ',' + io::format_double(points[i][1]);
  }
  return out;
}

namespace detail {

using json = nlohmann::ordered_json;

enum class KeyType { integer, unsigned_integer, real, boolean, text };

struct ConfigKey {
  const char* name;
  KeyType type;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

template <typename T>
T json_as(const json& v, const char* key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::config, std::string("bad value for '") + key + "': " + v.dump());
  }
}

inline DegreeDriver& driver(RunConfig& c, int p) { return c.flow.drivers[static_cast<std::size_t>(p)]; }
inline const DegreeDriver& driver(const RunConfig& c, int p) { return c.flow.drivers[static_cast<std::size_t>(p)]; }

inline const std::vector<ConfigKey>& config_keys() {
  using K = KeyType;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
#define PHFLOW_KEY(NAME, TYPE, CTYPE, FIELD)                                                   \
  k.push_back({NAME, TYPE, [](RunConfig& c, const json& v) { c.FIELD = json_as<CTYPE>(v, NAME); }, \
               [](const RunConfig& c) { return json(c.FIELD); }})
    PHFLOW_KEY("seed", K::unsigned_integer, std::uint64_t, flow.seed);
    PHFLOW_KEY("steps", K::integer, int, flow.steps);
    PHFLOW_KEY("inner_steps", K::integer, int, flow.inner_steps);
    PHFLOW_KEY("eta", K::real, double, flow.eta);
    PHFLOW_KEY("tau", K::real, double, flow.tau);
    PHFLOW_KEY("sinkhorn_reg", K::real, double, flow.sinkhorn_reg);
    PHFLOW_KEY("sinkhorn_max_iters", K::integer, int, flow.sinkhorn_max_iters);
    PHFLOW_KEY("sinkhorn_tol", K::real, double, flow.sinkhorn_tol);
    PHFLOW_KEY("exact_transport", K::boolean, bool, flow.exact_transport);
    PHFLOW_KEY("n_projections", K::integer, int, flow.n_projections);
    PHFLOW_KEY("jko_inner_iters", K::integer, int, flow.jko_inner_iters);
    PHFLOW_KEY("jko_lr", K::real, double, flow.jko_lr);
    PHFLOW_KEY("lambda_rep", K::real, double, flow.lambda_rep);
    PHFLOW_KEY("repulsion_eps", K::real, double, flow.repulsion_eps);
    PHFLOW_KEY("max_radius", K::real, double, flow.max_radius);
    PHFLOW_KEY("preset", K::text, std::string, preset);
    PHFLOW_KEY("input", K::text, std::string, input);
    PHFLOW_KEY("generator", K::text, std::string, generator);
    PHFLOW_KEY("n", K::unsigned_integer, std::size_t, n);
    PHFLOW_KEY("radius", K::real, double, radius);
    PHFLOW_KEY("sigma", K::real, double, sigma);
    PHFLOW_KEY("out", K::text, std::string, out);
    PHFLOW_KEY("plots", K::boolean, bool, plots);
#undef PHFLOW_KEY
    for (int p = 0; p <= kMaxDegree; ++p) {
      static const char* names[2][4] = {{"h0_driver", "h0_target", "h0_functional", "h0_keep_top"},
                                        {"h1_driver", "h1_target", "h1_functional", "h1_keep_top"}};
      const char* const* nm = names[p];
      k.push_back({nm[0], K::text,
                   [p, nm](RunConfig& c, const json& v) { driver(c, p).kind = driver_from_string(json_as<std::string>(v, nm[0])); },
                   [p](const RunConfig& c) { return json(to_string(driver(c, p).kind)); }});
      k.push_back({nm[1], K::text,
                   [p, nm](RunConfig& c, const json& v) {
                     if (v.is_array()) {
                       std::vector<Point2> pts;
                       for (const auto& e : v) {
                         const auto pair = json_as<std::vector<double>>(e, nm[1]);
                         if (pair.size() != 2) throw Error(ErrorKind::config, std::string(nm[1]) + " entries need 2 values");
                         pts.push_back({pair[0], pair[1]});
                       }
                       driver(c, p).target = std::move(pts);
                     } else {
                       driver(c, p).target = parse_target(json_as<std::string>(v, nm[1]));
                     }
                   },
                   [p](const RunConfig& c) { return json(format_target(driver(c, p).target)); }});
      k.push_back({nm[2], K::text,
                   [p, nm](RunConfig& c, const json& v) {
                     driver(c, p).functional = EnergyFunctional::by_name(json_as<std::string>(v, nm[2]));
                   },
                   [p](const RunConfig& c) { return json(driver(c, p).functional.name()); }});
      k.push_back({nm[3], K::unsigned_integer,
                   [p, nm](RunConfig& c, const json& v) { driver(c, p).keep_top = json_as<std::size_t>(v, nm[3]); },
                   [p](const RunConfig& c) { return json(driver(c, p).keep_top); }});
    }
    return k;
  }();
  return keys;
}

inline const ConfigKey& find_key(const std::string& name) {
  for (const auto& key : config_keys())
    if (name == key.name) return key;
  throw Error(ErrorKind::config, "unknown config key '" + name + "'");
}

/// Converts flag text to the JSON value a key expects.
inline json parse_flag_value(const ConfigKey& key, const std::string& text) {
  auto bad = [&] { return Error(ErrorKind::config, "bad value for --" + std::string(key.name) + ": '" + text + "'"); };
  switch (key.type) {
    case KeyType::text:
      return json(text);
    case KeyType::boolean:
      if (text == "true" || text == "1" || text == "on" || text == "yes") return json(true);
      if (text == "false" || text == "0" || text == "off" || text == "no") return json(false);
      throw bad();
    case KeyType::integer:
    case KeyType::unsigned_integer:
    case KeyType::real: {
      double value = 0.0;
      try {
        value = io::parse_double(text, key.name);
      } catch (const Error&) {
        throw bad();
      }
      if (key.type == KeyType::real) return json(value);
      if (value != std::floor(value) || (key.type == KeyType::unsigned_integer && value < 0)) throw bad();
      if (key.type == KeyType::unsigned_integer) {
        // Parse again as an integer so 64-bit seeds keep all their digits.
        std::uint64_t u = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), u);
        if (ec == std::errc() && ptr == text.data() + text.size()) return json(u);
        return json(static_cast<std::uint64_t>(value));
      }
      return json(static_cast<long long>(value));
    }
  }
  throw bad();
}

}  // namespace detail

/// Names of every configurable key, in a stable order.
inline std::vector<std::string> config_key_names() {
  std::vector<std::string> out;
  for (const auto& key : detail::config_keys()) out.emplace_back(key.name);
  return out;
}

inline void set_config_value(RunConfig& config, const std::string& key, const nlohmann::ordered_json& value) {
  detail::find_key(key).set(config, value);
}

inline void set_config_text(RunConfig& config, const std::string& key, const std::string& text) {
  const auto& k = detail::find_key(key);
  k.set(config, detail::parse_flag_value(k, text));
}

/// Flat echo of every key.
inline nlohmann::ordered_json run_config_json(const RunConfig& config) {
  nlohmann::ordered_json out;
  for (const auto& key : detail::config_keys()) out[key.name] = key.get(config);
  return out;
}

/// Applies the settings of a named preset on top of `config`.
inline void apply_preset(RunConfig& config, const std::string& name) {
  if (name == "denoise-circle") {
    config.n = 100;
    config.radius = 0.6;
    config.sigma = 0.05;
    config.flow.max_radius = 0.0;
    config.flow.drivers = {};
    config.flow.drivers[0].kind = DriverKind::mccann;
    config.flow.drivers[0].target = {{0.0, 0.05}};
    config.flow.drivers[1].kind = DriverKind::jko;
    config.flow.drivers[1].functional = EnergyFunctional::denoise_circle();
  } else if (name == "emerge-circle") {
    config.n = 250;
    config.flow.max_radius = 0.5;
    config.flow.drivers = {};
    config.flow.drivers[0].kind = DriverKind::mccann;
    config.flow.drivers[0].target = {{0.0, 0.08}};
    config.flow.drivers[1].kind = DriverKind::jko;
    config.flow.drivers[1].functional = EnergyFunctional::emerge_circle();
  } else {
    throw Error(ErrorKind::config, "unknown preset '" + name + "'");
  }
  config.preset = name;
}

inline RunConfig preset_config(const std::string& name) {
  RunConfig config;
  apply_preset(config, name);
  return config;
}

inline nlohmann::ordered_json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config " + path.string());
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::config, path.string() + ": expected a flat JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) throw Error(ErrorKind::config, path.string() + ": key '" + key + "' must not be nested");
    detail::find_key(key);  // reject unknown keys early
  }
  return doc;
}

/// Layers the sources: defaults -> preset -> file -> flags. The preset name is taken from
/// the flags, then the file, then `preset_hint` (e.g. a subcommand name).
inline RunConfig resolve_run_config(const std::string& preset_hint, const nlohmann::ordered_json& file,
                                    const std::vector<std::pair<std::string, std::string>>& flags) {
  std::string preset = preset_hint;
  if (file.contains("preset")) preset = detail::json_as<std::string>(file["preset"], "preset");
  for (const auto& [key, value] : flags)
    if (key == "preset") preset = value;

  RunConfig config;
  if (!preset.empty()) apply_preset(config, preset);
  for (const auto& [key, value] : file.items())
    if (key != "preset") set_config_value(config, key, value);
  for (const auto& [key, value] : flags)
    if (key != "preset") set_config_text(config, key, value);
  return config;
}

inline void validate_run_config(const RunConfig& config) {
  const int sources = !config.preset.empty() + !config.input.empty() + !config.generator.empty();
  if (sources != 1) throw Error(ErrorKind::config, "exactly one of input, generator or preset must be given");
  if (!config.generator.empty() && config.generator != "circle" && config.generator != "square")
    throw Error(ErrorKind::config, "generator must be 'circle' or 'square'");
  if (config.out.empty()) throw Error(ErrorKind::config, "output directory must not be empty");
  if (config.n < 1) throw Error(ErrorKind::config, "n must be >= 1");
  config.flow.validate();
}

/// The input point cloud: read from CSV or drawn from the generator, seeded by the config seed.
inline PointCloud load_run_data(const RunConfig& config) {
  validate_run_config(config);
  if (!config.input.empty()) return io::read_point_cloud_csv(config.input);
  std::string gen = config.generator;
  if (gen.empty()) gen = config.preset == "emerge-circle" ? "square" : "circle";
  if (gen == "circle") return generate_noisy_circle(config.n, config.radius, config.sigma, config.flow.seed);
  return generate_uniform_square(config.n, config.flow.seed);
}

inline FlowTrajectory run_experiment(const RunConfig& config) { return run_flow(load_run_data(config), config.flow); }

}  // namespace phflow
