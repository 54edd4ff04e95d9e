#pragma once

// Flow drivers: McCann-interpolation flow toward a target diagram and JKO flow of an
// energy functional, both fitted back into the data by S inner gradient steps.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "phflow/complex.hpp"
#include "phflow/diffph.hpp"
#include "phflow/energy.hpp"
#include "phflow/errors.hpp"
#include "phflow/persistence.hpp"
#include "phflow/transport.hpp"

namespace phflow {

inline constexpr int kMaxDegree = 1;

enum class DriverKind { none, mccann, jko, denoise };

inline std::string to_string(DriverKind kind) {
  switch (kind) {
    case DriverKind::none: return "none";
    case DriverKind::mccann: return "mccann";
    case DriverKind::jko: return "jko";
    case DriverKind::denoise: return "denoise";
  }
  return "none";
}

inline DriverKind driver_from_string(const std::string& name) {
  if (name == "none") return DriverKind::none;
  if (name == "mccann") return DriverKind::mccann;
  if (name == "jko") return DriverKind::jko;
  if (name == "denoise") return DriverKind::denoise;
  throw Error(ErrorKind::config, "unknown driver '" + name + "'");
}

/// How one homology degree is driven.
struct DegreeDriver {
  DriverKind kind = DriverKind::none;
  std::vector<Point2> target;                            // mccann
  EnergyFunctional functional = EnergyFunctional::zero();  // jko
  std::size_t keep_top = 1;                              // denoise
};

struct FlowConfig {
  int steps = 20;        // K outer steps
  int inner_steps = 50;  // S descent steps per outer step
  double eta = 0.01;
  double tau = 0.1;
  double sinkhorn_reg = 1e-3;
  int sinkhorn_max_iters = 10000;
  double sinkhorn_tol = 1e-9;
  bool exact_transport = false;  // use exact_plan in place of Sinkhorn
  int n_projections = 64;
  int jko_inner_iters = 200;
  double jko_lr = 0.05;
  std::uint64_t seed = 0;
  double lambda_rep = 1e-6;
  double repulsion_eps = 0.01;
  double max_radius = 0.0;  // <= 0: 1.1 x diameter of the cloud at each outer step
  std::array<DegreeDriver, kMaxDegree + 1> drivers{};

  bool drives(int p) const { return drivers[static_cast<std::size_t>(p)].kind != DriverKind::none; }

  void validate() const {
    if (steps < 1) throw Error(ErrorKind::config, "steps (K) must be >= 1");
    if (inner_steps < 1) throw Error(ErrorKind::config, "inner_steps (S) must be >= 1");
    if (!(eta > 0.0)) throw Error(ErrorKind::config, "eta must be positive");
    if (!(tau > 0.0)) throw Error(ErrorKind::config, "tau must be positive");
    if (!(sinkhorn_reg > 0.0)) throw Error(ErrorKind::config, "sinkhorn_reg must be positive");
    if (n_projections < 1) throw Error(ErrorKind::config, "n_projections must be >= 1");
    if (jko_inner_iters < 0) throw Error(ErrorKind::config, "jko_inner_iters must be >= 0");
    if (!(jko_lr > 0.0)) throw Error(ErrorKind::config, "jko_lr must be positive");
    if (lambda_rep < 0.0) throw Error(ErrorKind::config, "lambda_rep must be >= 0");
    if (!(repulsion_eps > 0.0)) throw Error(ErrorKind::config, "repulsion_eps must be positive");
    for (const auto& d : drivers)
      if (d.kind == DriverKind::mccann && d.target.empty())
        throw Error(ErrorKind::config, "a McCann driver needs a nonempty target diagram");
  }
};

/// State of one outer step k, recorded before its inner fit.
struct StepRecord {
  int k = 0;
  std::array<PersistenceDiagram, kMaxDegree + 1> diagrams{};  // X^(k)
  std::array<std::vector<Point2>, kMaxDegree + 1> targets{};  // Y^(k)
  std::array<std::vector<Point2>, kMaxDegree + 1> endpoint{};  // barycentric image X_1 (McCann)
  std::array<double, kMaxDegree + 1> t{};                       // interpolation time (McCann)
  std::array<double, kMaxDegree + 1> energy_x{};                // J(X^(k)) (JKO)
  std::array<double, kMaxDegree + 1> energy_y{};                // J(Y^(k)) (JKO)
  std::array<std::vector<double>, kMaxDegree + 1> jko_objective{};
  std::array<std::uint64_t, kMaxDegree + 1> sliced_seed{};
  std::vector<double> coords;      // point cloud at the start of the step (Rips parameterization)
  std::vector<double> filtration;  // f^(k) by simplex id (raw parameterization)
  std::vector<double> losses;      // total inner objective before each of the S updates
  bool singular_gradient = false;
};

struct FlowTrajectory {
  FlowConfig config;
  bool raw_filtration = false;
  std::size_t point_dim = 0;
  std::vector<StepRecord> steps;
  std::vector<double> final_coords;
  std::vector<double> final_filtration;
  std::array<PersistenceDiagram, kMaxDegree + 1> final_diagrams{};
  std::optional<std::string> error;  // set when the flow aborted early

  bool ok() const { return !error.has_value(); }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the sliced-W2 directions for degree p at outer step k.
inline std::uint64_t sliced_seed(std::uint64_t seed, int k, int p) {
  return splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(k) * 2 + static_cast<std::uint64_t>(p)));
}

/// Raises each simplex to at least the value of its faces so the filtration stays monotone.
inline std::vector<double> monotone_closure(const FilteredComplex& complex, std::vector<double> values) {
  for (int dim = 1; dim <= complex.max_dim(); ++dim)
    for (Index id = 0; id < complex.size(); ++id) {
      if (complex.simplex(id).dim != dim) continue;
      for (Index f : complex.facets(id)) values[id] = std::max(values[id], values[f]);
    }
  return values;
}

/// Abstracts the two parameterizations: points under Rips, or raw filtration values.
class FlowState {
 public:
  FlowState(PointCloud cloud, int max_dim, double max_radius)
      : cloud_(std::move(cloud)), max_dim_(max_dim), max_radius_(max_radius), raw_(false) {}
  explicit FlowState(FilteredComplex complex) : complex_(std::move(complex)), raw_(true) {}

  bool raw() const { return raw_; }
  const PointCloud& cloud() const { return cloud_; }
  const FilteredComplex& complex() const { return complex_; }

  /// Fresh complex at the start of an outer step.
  void rebuild() {
    if (raw_) return;
    const double radius = max_radius_ > 0.0 ? max_radius_ : default_max_radius(pairwise_distances(cloud_));
    complex_ = build_rips(cloud_, max_dim_, radius);
  }

  std::array<PersistenceDiagram, kMaxDegree + 1> diagrams() const {
    const PersistencePairing pairing = reduce_coboundary_matrix(complex_);
    std::array<PersistenceDiagram, kMaxDegree + 1> out{};
    for (int p = 0; p <= kMaxDegree; ++p) {
      out[static_cast<std::size_t>(p)].degree = p;
      if (p < std::max(complex_.max_dim(), 1)) out[static_cast<std::size_t>(p)] = extract_diagram(pairing, complex_, p);
    }
    return out;
  }

  /// One descent step; returns true if a zero-length edge received gradient.
  bool descend(const FiltrationGradient& grad, const std::vector<double>& extra_point_grad, double eta) {
    if (raw_) {
      std::vector<double> values = complex_.filtration();
      for (std::size_t i = 0; i < values.size(); ++i) values[i] -= eta * grad.values[i];
      complex_.set_filtration(monotone_closure(complex_, std::move(values)));
      return false;
    }
    PointGradient g = filtration_to_points_grad(grad, complex_, cloud_);
    auto& coords = cloud_.coords();
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] -= eta * (g.values[i] + extra_point_grad[i]);
    cloud_.validate();
    complex_ = rips_filtration_values(cloud_, std::move(complex_));
    return g.singular;
  }

 private:
  PointCloud cloud_;
  FilteredComplex complex_;
  int max_dim_ = 2;
  double max_radius_ = 0.0;
  bool raw_;
};

inline FlowTrajectory run_flow(FlowState state, const FlowConfig& config) {
  config.validate();
  FlowTrajectory traj;
  traj.config = config;
  traj.raw_filtration = state.raw();
  traj.point_dim = state.raw() ? 0 : state.cloud().dim();

  const int K = config.steps;
  for (int k = 1; k <= K; ++k) {
    state.rebuild();
    StepRecord rec;
    rec.k = k;
    if (state.raw()) {
      rec.filtration = state.complex().filtration();
    } else {
      rec.coords = state.cloud().coords();
    }
    rec.diagrams = state.diagrams();

    try {
      for (int p = 0; p <= kMaxDegree; ++p) {
        const auto pi = static_cast<std::size_t>(p);
        const DegreeDriver& driver = config.drivers[pi];
        const std::vector<Point2> x = diagram_points(rec.diagrams[pi]);
        switch (driver.kind) {
          case DriverKind::none:
          case DriverKind::denoise:
            break;
          case DriverKind::mccann: {
            if (x.empty())
              throw Error(ErrorKind::empty_diagram,
                          "degree " + std::to_string(p) + " diagram is empty at step " + std::to_string(k));
            const double t = 1.0 / static_cast<double>(K - k + 1);
            const DiagramMeasure source(x), target(driver.target);
            const TransportPlan plan =
                config.exact_transport
                    ? exact_plan(source, target)
                    : sinkhorn_plan(source, target, config.sinkhorn_reg, config.sinkhorn_max_iters, config.sinkhorn_tol);
            rec.t[pi] = t;
            rec.endpoint[pi] = barycenter_targets(plan, target);
            rec.targets[pi] = mccann_interpolate(x, rec.endpoint[pi], t);
            break;
          }
          case DriverKind::jko: {
            rec.sliced_seed[pi] = sliced_seed(config.seed, k, p);
            rec.energy_x[pi] = eval_energy(driver.functional, x).value;
            if (x.empty()) {
              rec.energy_y[pi] = rec.energy_x[pi];
              break;
            }
            JkoOptions jko;
            jko.tau = config.tau;
            jko.inner_iters = config.jko_inner_iters;
            jko.lr = config.jko_lr;
            jko.n_projections = config.n_projections;
            jko.seed = rec.sliced_seed[pi];
            JkoResult result = jko_step(x, driver.functional, jko);
            rec.targets[pi] = std::move(result.points);
            rec.energy_y[pi] = result.energy;
            rec.jko_objective[pi] = std::move(result.objective);
            break;
          }
        }
      }
    } catch (const Error& e) {
      traj.error = e.what();
      traj.steps.push_back(std::move(rec));
      break;
    }

    // Inner fit: S descent steps toward Y^(k) on a fixed simplex set.
    for (int s = 1; s <= config.inner_steps; ++s) {
      const auto dgms = s == 1 ? rec.diagrams : state.diagrams();
      FiltrationGradient grad;
      grad.values.assign(state.complex().size(), 0.0);
      double loss = 0.0;
      for (int p = 0; p <= kMaxDegree; ++p) {
        const auto pi = static_cast<std::size_t>(p);
        const DegreeDriver& driver = config.drivers[pi];
        if (driver.kind == DriverKind::none) continue;
        DiagramLoss term;
        if (driver.kind == DriverKind::denoise) {
          term = diagonal_denoise_loss(dgms[pi], driver.keep_top);
        } else {
          const Correspondence matching = match_by_provenance(dgms[pi], rec.diagrams[pi].points, rec.targets[pi]);
          term = diagram_matching_loss(dgms[pi], rec.targets[pi], matching);
        }
        loss += term.value;
        const FiltrationGradient g = diagram_to_filtration_grad(term.grad, dgms[pi], state.complex());
        for (std::size_t i = 0; i < grad.values.size(); ++i) grad.values[i] += g.values[i];
      }
      std::vector<double> extra;
      if (!state.raw()) {
        extra.assign(state.cloud().coords().size(), 0.0);
        if (config.lambda_rep > 0.0) {
          const RepulsionLoss rep = repulsion_loss(state.cloud(), config.repulsion_eps);
          loss += config.lambda_rep * rep.value;
          for (std::size_t i = 0; i < extra.size(); ++i) extra[i] = config.lambda_rep * rep.grad[i];
        }
      }
      rec.losses.push_back(loss);
      if (state.descend(grad, extra, config.eta)) rec.singular_gradient = true;
    }
    traj.steps.push_back(std::move(rec));
  }

  if (state.raw()) {
    traj.final_filtration = state.complex().filtration();
  } else {
    traj.final_coords = state.cloud().coords();
    state.rebuild();
  }
  traj.final_diagrams = state.diagrams();
  return traj;
}

inline int required_max_dim(const FlowConfig& config) { return config.drives(1) ? 2 : 1; }

}  // namespace detail

/// Flow on a point cloud under the Rips filtration, driving every degree configured in `config`.
inline FlowTrajectory run_flow(const PointCloud& cloud, const FlowConfig& config) {
  cloud.validate();
  return detail::run_flow(detail::FlowState(cloud, detail::required_max_dim(config), config.max_radius), config);
}

/// Flow acting directly on the filtration values of a fixed complex.
inline FlowTrajectory run_flow(const FilteredComplex& complex, const FlowConfig& config) {
  if (config.drives(1) && complex.max_dim() < 2)
    throw Error(ErrorKind::config, "driving degree 1 needs triangles in the complex");
  return detail::run_flow(detail::FlowState(complex), config);
}

namespace detail {
inline FlowConfig single_driver(FlowConfig config, int p, DegreeDriver driver) {
  if (p < 0 || p > kMaxDegree) throw Error(ErrorKind::invalid_degree, "degree must be 0 or 1");
  config.drivers = {};
  config.drivers[static_cast<std::size_t>(p)] = std::move(driver);
  return config;
}
}  // namespace detail

/// Drives degree p along McCann interpolations toward `target`.
template <typename Data>
FlowTrajectory mccann_flow(const Data& data, const FlowConfig& config, const DiagramMeasure& target, int p) {
  if (target.empty()) throw Error(ErrorKind::config, "McCann flow needs a nonempty target");
  DegreeDriver driver;
  driver.kind = DriverKind::mccann;
  driver.target = target.points();
  return run_flow(data, detail::single_driver(config, p, std::move(driver)));
}

/// Drives degree p along the JKO flow of `functional`.
template <typename Data>
FlowTrajectory energy_flow(const Data& data, const FlowConfig& config, const EnergyFunctional& functional, int p) {
  DegreeDriver driver;
  driver.kind = DriverKind::jko;
  driver.functional = functional;
  return run_flow(data, detail::single_driver(config, p, std::move(driver)));
}

}  // namespace phflow
