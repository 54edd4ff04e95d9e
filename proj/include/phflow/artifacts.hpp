#pragma once

// Serialization of flow trajectories: trajectory.json, per-step CSVs and optional SVG plots.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "phflow/dynamics.hpp"
#include "phflow/errors.hpp"
#include "phflow/io.hpp"

namespace phflow {

using ordered_json = nlohmann::ordered_json;

inline ordered_json points_json(const std::vector<Point2>& points) {
  ordered_json out = ordered_json::array();
  for (const auto& p : points) out.push_back({p[0], p[1]});
  return out;
}

inline ordered_json flow_config_json(const FlowConfig& c) {
  ordered_json out;
  out["steps"] = c.steps;
  out["inner_steps"] = c.inner_steps;
  out["eta"] = c.eta;
  out["tau"] = c.tau;
  out["sinkhorn_reg"] = c.sinkhorn_reg;
  out["sinkhorn_max_iters"] = c.sinkhorn_max_iters;
  out["sinkhorn_tol"] = c.sinkhorn_tol;
  out["exact_transport"] = c.exact_transport;
  out["n_projections"] = c.n_projections;
  out["jko_inner_iters"] = c.jko_inner_iters;
  out["jko_lr"] = c.jko_lr;
  out["seed"] = c.seed;
  out["lambda_rep"] = c.lambda_rep;
  out["repulsion_eps"] = c.repulsion_eps;
  out["max_radius"] = c.max_radius;
  ordered_json drivers = ordered_json::array();
  for (int p = 0; p <= kMaxDegree; ++p) {
    const auto& d = c.drivers[static_cast<std::size_t>(p)];
    ordered_json entry;
    entry["degree"] = p;
    entry["driver"] = to_string(d.kind);
    if (d.kind == DriverKind::mccann) entry["target"] = points_json(d.target);
    if (d.kind == DriverKind::jko) entry["functional"] = d.functional.name();
    if (d.kind == DriverKind::denoise) entry["keep_top"] = d.keep_top;
    drivers.push_back(std::move(entry));
  }
  out["drivers"] = std::move(drivers);
  return out;
}

/// Summary of a trajectory. `run` is echoed verbatim under "run" when not null.
inline ordered_json trajectory_json(const FlowTrajectory& traj, const ordered_json& run = nullptr) {
  ordered_json out;
  if (!run.is_null()) out["run"] = run;
  out["config"] = flow_config_json(traj.config);
  out["parameterization"] = traj.raw_filtration ? "filtration" : "points";
  out["ok"] = traj.ok();
  out["error"] = traj.error ? ordered_json(*traj.error) : ordered_json(nullptr);
  ordered_json steps = ordered_json::array();
  for (const auto& rec : traj.steps) {
    ordered_json s;
    s["k"] = rec.k;
    ordered_json degrees = ordered_json::array();
    for (int p = 0; p <= kMaxDegree; ++p) {
      const auto pi = static_cast<std::size_t>(p);
      const DriverKind kind = traj.config.drivers[pi].kind;
      ordered_json d;
      d["degree"] = p;
      d["driver"] = to_string(kind);
      d["num_points"] = rec.diagrams[pi].size();
      double top = 0.0;
      for (const auto& q : rec.diagrams[pi].points) top = std::max(top, q.persistence());
      d["max_persistence"] = top;
      if (kind == DriverKind::mccann) d["t"] = rec.t[pi];
      if (kind == DriverKind::jko) {
        d["energy_x"] = rec.energy_x[pi];
        d["energy_y"] = rec.energy_y[pi];
        d["sliced_seed"] = rec.sliced_seed[pi];
        d["jko_iterations"] = rec.jko_objective[pi].empty() ? 0 : rec.jko_objective[pi].size() - 1;
      }
      degrees.push_back(std::move(d));
    }
    s["degrees"] = std::move(degrees);
    s["losses"] = rec.losses;
    s["singular_gradient"] = rec.singular_gradient;
    steps.push_back(std::move(s));
  }
  out["steps"] = std::move(steps);
  ordered_json final_dgms = ordered_json::array();
  for (const auto& dgm : traj.final_diagrams) {
    ordered_json d;
    d["degree"] = dgm.degree;
    ordered_json pts = ordered_json::array();
    for (const auto& q : dgm.points) pts.push_back({q.birth, q.death});
    d["points"] = std::move(pts);
    final_dgms.push_back(std::move(d));
  }
  out["final_diagrams"] = std::move(final_dgms);
  return out;
}

struct ArtifactOptions {
  bool plots = false;
  ordered_json run = nullptr;  // run-level settings echoed into trajectory.json
};

/// Writes trajectory.json, step_<k>/{points|filtration,dgm<p>,target<p>}.csv, the final
/// state, and (if requested) plots/step_<k>_cloud.svg and plots/step_<k>_dgm<p>.svg.
inline void emit_artifacts(const FlowTrajectory& traj, const std::filesystem::path& outdir,
                           const ArtifactOptions& options = {}) {
  namespace fs = std::filesystem;
  io::ensure_directory(outdir);
  io::write_text(outdir / "trajectory.json", trajectory_json(traj, options.run).dump(2) + "\n");
  const fs::path plot_dir = outdir / "plots";
  if (options.plots) io::ensure_directory(plot_dir);

  auto filtration_csv = [](const std::vector<double>& values) {
    std::string out = "simplex,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) out += std::to_string(i) + ',' + io::format_double(values[i]) + '\n';
    return out;
  };

  for (const auto& rec : traj.steps) {
    const std::string tag = "step_" + std::to_string(rec.k);
    const fs::path dir = outdir / tag;
    io::ensure_directory(dir);
    std::optional<PointCloud> cloud;
    if (traj.raw_filtration) {
      io::write_text(dir / "filtration.csv", filtration_csv(rec.filtration));
    } else {
      cloud.emplace(traj.point_dim, rec.coords);
      io::write_text(dir / "points.csv", io::point_cloud_csv(*cloud));
    }
    for (int p = 0; p <= kMaxDegree; ++p) {
      const auto pi = static_cast<std::size_t>(p);
      const std::string suffix = std::to_string(p);
      io::write_text(dir / ("dgm" + suffix + ".csv"), io::diagram_csv(rec.diagrams[pi]));
      io::write_text(dir / ("target" + suffix + ".csv"), io::points2_csv(rec.targets[pi]));
      if (options.plots)
        io::write_text(plot_dir / (tag + "_dgm" + suffix + ".svg"),
                       io::diagram_svg(rec.diagrams[pi], rec.targets[pi], "H" + suffix + " diagram, step " + std::to_string(rec.k)));
    }
    if (options.plots && cloud)
      io::write_text(plot_dir / (tag + "_cloud.svg"), io::cloud_svg(*cloud, "point cloud, step " + std::to_string(rec.k)));
  }

  if (traj.raw_filtration) {
    io::write_text(outdir / "final_filtration.csv", filtration_csv(traj.final_filtration));
  } else if (!traj.final_coords.empty()) {
    io::write_text(outdir / "final_points.csv", io::point_cloud_csv(PointCloud(traj.point_dim, traj.final_coords)));
  }
  for (int p = 0; p <= kMaxDegree; ++p)
    io::write_text(outdir / ("final_dgm" + std::to_string(p) + ".csv"),
                   io::diagram_csv(traj.final_diagrams[static_cast<std::size_t>(p)]));
}

}  // namespace phflow
