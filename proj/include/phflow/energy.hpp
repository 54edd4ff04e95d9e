#pragma once

// Energy functionals on diagram measures and the JKO proximal step.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phflow/errors.hpp"
#include "phflow/transport.hpp"

namespace phflow {

enum class EnergyKind { zero, denoise_circle, emerge_circle, quadratic };

/// J(mu) as an empirical expectation over diagram points.
///
/// denoise_circle: 1/2 E[min(x^2 + (y - 1.2)^2, (x - y)^2 / 2)]
/// emerge_circle:  1/4 E[(y - (x + 0.15))^2 + x^2]
/// quadratic:      1/2 E[(p - c)^T A (p - c)] with symmetric A
struct EnergyFunctional {
  EnergyKind kind = EnergyKind::zero;
  Point2 center{0.0, 0.0};
  std::array<double, 4> matrix{1.0, 0.0, 0.0, 1.0};  // row-major A

  static EnergyFunctional zero() { return {}; }
  static EnergyFunctional denoise_circle() { return {EnergyKind::denoise_circle}; }
  static EnergyFunctional emerge_circle() { return {EnergyKind::emerge_circle}; }
  static EnergyFunctional quadratic(Point2 center, std::array<double, 4> matrix = {1.0, 0.0, 0.0, 1.0}) {
    return {EnergyKind::quadratic, center, matrix};
  }

  static EnergyFunctional by_name(const std::string& name) {
    if (name == "zero") return zero();
    if (name == "denoise_circle") return denoise_circle();
    if (name == "emerge_circle") return emerge_circle();
    throw Error(ErrorKind::config, "unknown energy functional '" + name + "'");
  }

  std::string name() const {
    switch (kind) {
      case EnergyKind::zero: return "zero";
      case EnergyKind::denoise_circle: return "denoise_circle";
      case EnergyKind::emerge_circle: return "emerge_circle";
      case EnergyKind::quadratic: return "quadratic";
    }
    return "unknown";
  }
};

struct EnergyValue {
  double value = 0.0;
  std::vector<Point2> grad;  // d J / d p_i, including the 1/n of the expectation
};

inline EnergyValue eval_energy(const EnergyFunctional& functional, std::span<const Point2> points) {
  EnergyValue out;
  out.grad.assign(points.size(), Point2{0.0, 0.0});
  if (points.empty()) return out;
  const double w = 1.0 / static_cast<double>(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = points[i][0];
    const double y = points[i][1];
    switch (functional.kind) {
      case EnergyKind::zero:
        break;
      case EnergyKind::denoise_circle: {
        const double to_circle = x * x + (y - 1.2) * (y - 1.2);
        const double to_diagonal = 0.5 * (x - y) * (x - y);
        // Ties take the diagonal branch.
        if (to_diagonal <= to_circle) {
          out.value += 0.5 * w * to_diagonal;
          out.grad[i] = {0.5 * w * (x - y), 0.5 * w * (y - x)};
        } else {
          out.value += 0.5 * w * to_circle;
          out.grad[i] = {w * x, w * (y - 1.2)};
        }
        break;
      }
      case EnergyKind::emerge_circle: {
        const double r = y - (x + 0.15);
        out.value += 0.25 * w * (r * r + x * x);
        out.grad[i] = {0.5 * w * (x - r), 0.5 * w * r};
        break;
      }
      case EnergyKind::quadratic: {
        const auto& a = functional.matrix;
        const double dx = x - functional.center[0];
        const double dy = y - functional.center[1];
        const double ax = a[0] * dx + a[1] * dy;
        const double ay = a[2] * dx + a[3] * dy;
        out.value += 0.5 * w * (dx * ax + dy * ay);
        out.grad[i] = {w * ax, w * ay};
        break;
      }
    }
  }
  return out;
}

/// Distance term of the JKO objective.
enum class ProximalMetric {
  sliced,  // squared sliced W2 with directions fixed for the whole step
  exact,   // squared W2 from exact_plan (small inputs only)
};

struct JkoOptions {
  double tau = 0.1;
  int inner_iters = 200;
  double lr = 0.05;
  int n_projections = 64;
  std::uint64_t seed = 0;
  ProximalMetric metric = ProximalMetric::sliced;
  bool clamp_to_diagram = true;  // keep iterates in the half-plane death >= birth
};

struct JkoResult {
  std::vector<Point2> points;
  std::vector<double> objective;  // objective trace, starting at the anchor
  double energy = 0.0;             // J at the returned points
};

/// One minimizing-movement step: argmin over y of (1/2 tau) W(anchor, y) + J(y),
/// approximated by projected gradient descent from y = anchor.
///
/// Each particle moves along n times its Euclidean partial derivative (the Wasserstein
/// gradient of an empirical measure), so `lr` is a time step independent of n. A step
/// that would increase the objective is retried with half the learning rate.
inline JkoResult jko_step(std::span<const Point2> anchor, const EnergyFunctional& functional, const JkoOptions& options) {
  if (anchor.empty()) throw Error(ErrorKind::invalid_input, "JKO needs a nonempty anchor");
  if (!(options.tau > 0.0)) throw Error(ErrorKind::invalid_input, "JKO step size must be positive");
  const std::size_t n = anchor.size();
  const double mass_scale = static_cast<double>(n);
  const double prox = 0.5 / options.tau;
  std::vector<Point2> directions;
  if (options.metric == ProximalMetric::sliced) directions = sliced_directions(options.n_projections, options.seed);

  struct Evaluation {
    double objective;
    double energy;
    std::vector<Point2> grad;
  };
  auto evaluate = [&](const std::vector<Point2>& y) {
    EnergyValue j = eval_energy(functional, y);
    Evaluation e{j.value, j.value, std::move(j.grad)};
    if (options.metric == ProximalMetric::sliced) {
      const SlicedW2 sw = sliced_w2(y, anchor, directions);
      e.objective += prox * sw.value;
      for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < 2; ++k) e.grad[i][k] += prox * sw.grad_a[i][k];
    } else {
      const DiagramMeasure from(y), to(std::vector<Point2>(anchor.begin(), anchor.end()));
      const TransportPlan plan = exact_plan(from, to);
      e.objective += prox * plan.cost(from, to);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (plan(i, j) == 0.0) continue;
          for (int k = 0; k < 2; ++k) e.grad[i][k] += prox * 2.0 * plan(i, j) * (y[i][k] - anchor[j][k]);
        }
    }
    if (!std::isfinite(e.objective))
      throw Error(ErrorKind::divergence, "JKO objective is not finite; reduce jko_lr");
    return e;
  };

  JkoResult result;
  result.points.assign(anchor.begin(), anchor.end());
  if (options.clamp_to_diagram)
    for (auto& p : result.points) p = clamp_to_upper_half(p);
  Evaluation current = evaluate(result.points);
  result.objective.push_back(current.objective);
  double lr = options.lr;
  std::vector<Point2> trial(n);
  for (int it = 0; it < options.inner_iters; ++it) {
    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = {result.points[i][0] - lr * mass_scale * current.grad[i][0],
                    result.points[i][1] - lr * mass_scale * current.grad[i][1]};
        if (options.clamp_to_diagram) trial[i] = clamp_to_upper_half(trial[i]);
      }
      Evaluation next = evaluate(trial);
      if (next.objective <= current.objective) {
        result.points = trial;
        current = std::move(next);
        accepted = true;
      } else {
        lr *= 0.5;
      }
    }
    if (!accepted) break;  // no descent at any tried step size: stationary to working precision
    result.objective.push_back(current.objective);
  }
  result.energy = current.energy;
  return result;
}

}  // namespace phflow
