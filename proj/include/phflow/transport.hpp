#pragma once

// Optimal transport between uniform empirical measures on diagram points.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "phflow/detail/min_cost_flow.hpp"
#include "phflow/errors.hpp"

namespace phflow {

/// A (birth, death) pair, or any planar point.
using Point2 = std::array<double, 2>;

inline double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

/// Uniform empirical measure (1/n) sum of Dirac masses at diagram points.
class DiagramMeasure {
 public:
  DiagramMeasure() = default;
  explicit DiagramMeasure(std::vector<Point2> points) : points_(std::move(points)) {
    for (const auto& p : points_) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
        throw Error(ErrorKind::invalid_input, "diagram point is not finite");
      if (p[1] < p[0]) throw Error(ErrorKind::invalid_input, "diagram point lies below the diagonal");
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const std::vector<Point2>& points() const noexcept { return points_; }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  double weight() const { return 1.0 / static_cast<double>(points_.size()); }

 private:
  std::vector<Point2> points_;
};

/// n x m coupling with uniform marginals 1/n and 1/m.
class TransportPlan {
 public:
  TransportPlan() = default;
  TransportPlan(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}
  TransportPlan(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) throw Error(ErrorKind::shape, "plan has the wrong number of entries");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  double row_sum(std::size_t i) const {
    return std::accumulate(values_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                           values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_), 0.0);
  }
  double col_sum(std::size_t j) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, j);
    return s;
  }

  /// Largest absolute deviation of any row or column sum from its uniform mass.
  double marginal_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) worst = std::max(worst, std::abs(row_sum(i) - 1.0 / rows_));
    for (std::size_t j = 0; j < cols_; ++j) worst = std::max(worst, std::abs(col_sum(j) - 1.0 / cols_));
    return worst;
  }

  /// Sum of plan-weighted squared distances.
  double cost(const DiagramMeasure& source, const DiagramMeasure& target) const {
    double total = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) total += (*this)(i, j) * squared_distance(source[i], target[j]);
    return total;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct SinkhornOptions {
  double reg = 1e-3;
  int max_iters = 10000;
  double tol = 1e-9;
};

namespace detail {

inline constexpr int kSinkhornWarmSweeps = 100;
inline constexpr std::size_t kSinkhornNewtonMaxSize = 600;

/// Solves A x = b for symmetric positive semidefinite A (row-major, k x k) by
/// Cholesky with a tiny diagonal shift.
inline std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t k) {
  double top = 0.0;
  for (std::size_t q = 0; q < k; ++q) top = std::max(top, a[q * k + q]);
  for (std::size_t q = 0; q < k; ++q) a[q * k + q] += 1e-15 * top;
  for (std::size_t c = 0; c < k; ++c) {
    double d = a[c * k + c];
    for (std::size_t q = 0; q < c; ++q) d -= a[c * k + q] * a[c * k + q];
    a[c * k + c] = std::sqrt(std::max(d, std::numeric_limits<double>::min()));
    for (std::size_t r = c + 1; r < k; ++r) {
      double s = a[r * k + c];
      for (std::size_t q = 0; q < c; ++q) s -= a[r * k + q] * a[c * k + q];
      a[r * k + c] = s / a[c * k + c];
    }
  }
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t q = 0; q < r; ++q) b[r] -= a[r * k + q] * b[q];
    b[r] /= a[r * k + r];
  }
  for (std::size_t r = k; r-- > 0;) {
    for (std::size_t q = r + 1; q < k; ++q) b[r] -= a[q * k + r] * b[q];
    b[r] /= a[r * k + r];
  }
  return b;
}

}  // namespace detail

/// Entropic plan for squared-Euclidean cost, computed with log-domain Sinkhorn.
///
/// The regularization is annealed geometrically from the cost scale down to `reg`,
/// warm-starting the dual potentials; `max_iters` bounds the iterations at the final
/// `reg`. Converged when every row sum is within `tol` of 1/n (columns are exact after
/// each half-step).
inline TransportPlan sinkhorn_plan(const DiagramMeasure& source, const DiagramMeasure& target, double reg,
                                   int max_iters, double tol) {
  if (!(reg > 0.0)) throw Error(ErrorKind::invalid_input, "Sinkhorn regularization must be positive");
  if (source.empty() || target.empty()) throw Error(ErrorKind::invalid_input, "Sinkhorn needs nonempty measures");
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  std::vector<double> cost(n * m);
  double max_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      cost[i * m + j] = squared_distance(source[i], target[j]);
      max_cost = std::max(max_cost, cost[i * m + j]);
    }
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  std::vector<double> f(n, 0.0), g(m, 0.0);

  auto update_f = [&](double eps) {
    for (std::size_t i = 0; i < n; ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) top = std::max(top, (g[j] - cost[i * m + j]) / eps);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp((g[j] - cost[i * m + j]) / eps - top);
      f[i] = eps * (log_a - top - std::log(s));
    }
  };
  auto update_g = [&](double eps) {
    for (std::size_t j = 0; j < m; ++j) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) top = std::max(top, (f[i] - cost[i * m + j]) / eps);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::exp((f[i] - cost[i * m + j]) / eps - top);
      g[j] = eps * (log_b - top - std::log(s));
    }
  };
  auto row_violation = [&](double eps) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp((f[i] + g[j] - cost[i * m + j]) / eps);
      worst = std::max(worst, std::abs(s - 1.0 / static_cast<double>(n)));
    }
    return worst;
  };

  for (double eps = std::max(max_cost, reg); eps > reg; eps *= 0.5) {
    for (int it = 0; it < 20; ++it) {
      update_f(eps);
      update_g(eps);
    }
  }
  // Near-degenerate plans make plain sweeps converge linearly with a rate close
  // to 1. After a warm start, switch to damped Newton steps on the dual (gauge
  // fixed by g[m-1]); they reach the same fixed point quadratically.
  const std::size_t k = n + m - 1;
  const bool newton_ok = k <= detail::kSinkhornNewtonMaxSize;
  auto plan_at = [&](const std::vector<double>& ff, const std::vector<double>& gg, std::vector<double>& p) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) p[i * m + j] = std::exp((ff[i] + gg[j] - cost[i * m + j]) / reg);
  };
  auto residual = [&](const std::vector<double>& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += p[i * m + j];
      r += (s - std::exp(log_a)) * (s - std::exp(log_a));
    }
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += p[i * m + j];
      r += (s - std::exp(log_b)) * (s - std::exp(log_b));
    }
    return r;
  };
  auto dual = [&](const std::vector<double>& ff, const std::vector<double>& gg, const std::vector<double>& p) {
    double d = 0.0;
    for (double x : ff) d += x * std::exp(log_a);
    for (double x : gg) d += x * std::exp(log_b);
    for (double x : p) d -= reg * x;
    return d;
  };
  std::vector<double> p(n * m), trial_p(n * m), hessian(k * k), rhs(k);
  auto newton_step = [&] {
    plan_at(f, g, p);
    std::fill(hessian.begin(), hessian.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) row += p[i * m + j];
      hessian[i * k + i] = row;
      rhs[i] = std::exp(log_a) - row;
      for (std::size_t j = 0; j + 1 < m; ++j) hessian[i * k + n + j] = hessian[(n + j) * k + i] = p[i * m + j];
    }
    for (std::size_t j = 0; j + 1 < m; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += p[i * m + j];
      hessian[(n + j) * k + n + j] = col;
      rhs[n + j] = std::exp(log_b) - col;
    }
    const auto step = detail::solve_spd(hessian, rhs, k);
    const double d0 = dual(f, g, p);
    const double r0 = residual(p);
    double scale = reg;
    for (int ls = 0; ls < 40; ++ls, scale *= 0.5) {
      auto ff = f;
      auto gg = g;
      for (std::size_t i = 0; i < n; ++i) ff[i] += scale * step[i];
      for (std::size_t j = 0; j + 1 < m; ++j) gg[j] += scale * step[n + j];
      plan_at(ff, gg, trial_p);
      const double d = dual(ff, gg, trial_p);
      if (std::isfinite(d) && (d > d0 || residual(trial_p) < r0)) {
        f = std::move(ff);
        g = std::move(gg);
        return;
      }
    }
  };

  double violation = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    if (newton_ok && it >= detail::kSinkhornWarmSweeps) {
      newton_step();
    } else {
      update_f(reg);
    }
    update_g(reg);
    violation = row_violation(reg);
    if (violation <= tol) break;
  }
  if (!(violation <= tol))
    throw ConvergenceError("Sinkhorn did not converge; marginal violation " + std::to_string(violation), violation);

  TransportPlan plan(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) plan(i, j) = std::exp((f[i] + g[j] - cost[i * m + j]) / reg);
  return plan;
}

inline TransportPlan sinkhorn_plan(const DiagramMeasure& source, const DiagramMeasure& target,
                                   const SinkhornOptions& options = {}) {
  return sinkhorn_plan(source, target, options.reg, options.max_iters, options.tol);
}

/// Largest n*m accepted by exact_plan.
inline constexpr std::size_t kExactPlanMaxEntries = 10000;

/// Optimal plan for squared-Euclidean cost, solved as an integral min-cost flow.
/// Each source ships m/g units and each target receives n/g units (g = gcd(n, m)),
/// so for n == m the result is a permutation matrix scaled by 1/n.
inline TransportPlan exact_plan(const DiagramMeasure& source, const DiagramMeasure& target) {
  if (source.empty() || target.empty()) throw Error(ErrorKind::invalid_input, "exact plan needs nonempty measures");
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  if (n * m > kExactPlanMaxEntries)
    throw Error(ErrorKind::too_large, "exact plan limited to n*m <= " + std::to_string(kExactPlanMaxEntries));
  const auto g = static_cast<std::int64_t>(std::gcd(n, m));
  const std::int64_t supply = static_cast<std::int64_t>(m) / g;
  const std::int64_t demand = static_cast<std::int64_t>(n) / g;
  const int s = static_cast<int>(n + m);
  const int t = s + 1;
  detail::MinCostFlow flow(t + 1);
  std::vector<std::size_t> arcs(n * m);
  for (std::size_t i = 0; i < n; ++i) flow.add_arc(s, static_cast<int>(i), supply, 0.0);
  for (std::size_t j = 0; j < m; ++j) flow.add_arc(static_cast<int>(n + j), t, demand, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      arcs[i * m + j] = flow.add_arc(static_cast<int>(i), static_cast<int>(n + j), supply,
                                     squared_distance(source[i], target[j]));
  const std::int64_t total = supply * static_cast<std::int64_t>(n);
  flow.run(s, t, total);
  TransportPlan plan(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      plan(i, j) = static_cast<double>(flow.flow_on(arcs[i * m + j])) / static_cast<double>(total);
  return plan;
}

/// Minimum-cost matching of size min(rows, cols) on a dense cost matrix.
/// Returns, for each row, the matched column or -1.
inline std::vector<int> min_cost_assignment(std::size_t rows, std::size_t cols, std::span<const double> cost) {
  std::vector<int> match(rows, -1);
  if (rows == 0 || cols == 0) return match;
  const int s = static_cast<int>(rows + cols);
  const int t = s + 1;
  detail::MinCostFlow flow(t + 1);
  std::vector<std::size_t> arcs(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) flow.add_arc(s, static_cast<int>(i), 1, 0.0);
  for (std::size_t j = 0; j < cols; ++j) flow.add_arc(static_cast<int>(rows + j), t, 1, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      arcs[i * cols + j] = flow.add_arc(static_cast<int>(i), static_cast<int>(rows + j), 1, cost[i * cols + j]);
  flow.run(s, t, static_cast<std::int64_t>(std::min(rows, cols)));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (flow.flow_on(arcs[i * cols + j]) > 0) match[i] = static_cast<int>(j);
  return match;
}

/// Projects a point below the diagonal onto the nearest diagonal point.
inline Point2 clamp_to_upper_half(const Point2& p) {
  if (p[1] >= p[0]) return p;
  const double mid = 0.5 * (p[0] + p[1]);
  return {mid, mid};
}

/// Row-normalized plan-weighted averages of the target points, one per source point.
inline std::vector<Point2> barycenter_targets(const TransportPlan& plan, const DiagramMeasure& target) {
  if (plan.cols() != target.size()) throw Error(ErrorKind::shape, "plan columns do not match the target measure");
  std::vector<Point2> out(plan.rows());
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    double mass = 0.0;
    Point2 acc{0.0, 0.0};
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      mass += plan(i, j);
      acc[0] += plan(i, j) * target[j][0];
      acc[1] += plan(i, j) * target[j][1];
    }
    if (!(mass > 0.0)) throw Error(ErrorKind::degenerate_plan, "row " + std::to_string(i) + " of the plan carries no mass");
    out[i] = clamp_to_upper_half({acc[0] / mass, acc[1] / mass});
  }
  return out;
}

/// Displacement interpolation between matched point lists: (1 - t) x + t y.
inline std::vector<Point2> mccann_interpolate(std::span<const Point2> source, std::span<const Point2> targets, double t) {
  if (source.size() != targets.size()) throw Error(ErrorKind::shape, "interpolation endpoints differ in length");
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::invalid_input, "interpolation time must lie in [0, 1]");
  std::vector<Point2> out(source.size());
  for (std::size_t i = 0; i < source.size(); ++i)
    for (int k = 0; k < 2; ++k) out[i][k] = (1.0 - t) * source[i][k] + t * targets[i][k];
  return out;
}

/// 2-Wasserstein distance between uniform measures, via exact_plan.
inline double w2_distance(const DiagramMeasure& a, const DiagramMeasure& b) {
  const TransportPlan plan = exact_plan(a, b);
  return std::sqrt(std::max(0.0, plan.cost(a, b)));
}

/// Unit directions at angles drawn uniformly from [0, 2 pi).
inline std::vector<Point2> sliced_directions(int n_projections, std::uint64_t seed) {
  if (n_projections < 1) throw Error(ErrorKind::invalid_input, "at least one projection is required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<Point2> dirs(static_cast<std::size_t>(n_projections));
  for (auto& d : dirs) {
    const double theta = angle(rng);
    d = {std::cos(theta), std::sin(theta)};
  }
  return dirs;
}

struct SlicedW2 {
  double value = 0.0;         // squared sliced distance
  std::vector<Point2> grad_a;  // gradient of value with respect to each point of a
};

/// Squared sliced 2-Wasserstein distance between equal-size point sets for fixed directions.
inline SlicedW2 sliced_w2(std::span<const Point2> a, std::span<const Point2> b, std::span<const Point2> directions) {
  if (a.size() != b.size()) throw Error(ErrorKind::shape, "sliced W2 needs equal cardinalities");
  if (directions.empty()) throw Error(ErrorKind::invalid_input, "at least one projection is required");
  const std::size_t n = a.size();
  SlicedW2 out;
  out.grad_a.assign(n, Point2{0.0, 0.0});
  if (n == 0) return out;
  std::vector<double> pa(n), pb(n);
  std::vector<std::size_t> ia(n), ib(n);
  const double scale = 1.0 / (static_cast<double>(directions.size()) * static_cast<double>(n));
  for (const Point2& dir : directions) {
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = dir[0] * a[i][0] + dir[1] * a[i][1];
      pb[i] = dir[0] * b[i][0] + dir[1] * b[i][1];
    }
    std::iota(ia.begin(), ia.end(), std::size_t{0});
    std::iota(ib.begin(), ib.end(), std::size_t{0});
    std::stable_sort(ia.begin(), ia.end(), [&](std::size_t x, std::size_t y) { return pa[x] < pa[y]; });
    std::stable_sort(ib.begin(), ib.end(), [&](std::size_t x, std::size_t y) { return pb[x] < pb[y]; });
    for (std::size_t k = 0; k < n; ++k) {
      const double diff = pa[ia[k]] - pb[ib[k]];
      out.value += scale * diff * diff;
      out.grad_a[ia[k]][0] += 2.0 * scale * diff * dir[0];
      out.grad_a[ia[k]][1] += 2.0 * scale * diff * dir[1];
    }
  }
  return out;
}

inline SlicedW2 sliced_w2(std::span<const Point2> a, std::span<const Point2> b, int n_projections, std::uint64_t seed) {
  if (a.size() != b.size()) throw Error(ErrorKind::shape, "sliced W2 needs equal cardinalities");
  const auto dirs = sliced_directions(n_projections, seed);
  return sliced_w2(a, b, dirs);
}

}  // namespace phflow
