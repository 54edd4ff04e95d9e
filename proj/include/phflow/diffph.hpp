#pragma once

// Gradients of diagram-space losses with respect to filtration values and point coordinates.
//
// Each diagram coordinate is the filtration value of one simplex (birth or death), so
// d(birth)/d f(sigma_birth) = 1 and d(death)/d f(sigma_death) = 1. Under the Rips
// filtration f(sigma) is the length of the longest edge of sigma, which routes the
// gradient to two points.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "phflow/complex.hpp"
#include "phflow/errors.hpp"
#include "phflow/persistence.hpp"
#include "phflow/transport.hpp"

namespace phflow {

/// (d loss / d birth, d loss / d death) per diagram point.
struct DiagramGradient {
  std::vector<Point2> values;
};

/// d loss / d f(sigma), indexed by stable simplex id.
struct FiltrationGradient {
  std::vector<double> values;
};

/// d loss / d coordinates, row-major n x d like PointCloud::coords().
struct PointGradient {
  std::vector<double> values;
  bool singular = false;  // a zero-length edge received gradient; its contribution was dropped
};

/// Pairs (target index, diagram point index).
struct Correspondence {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct DiagramLoss {
  double value = 0.0;
  DiagramGradient grad;
};

inline std::vector<Point2> diagram_points(const PersistenceDiagram& dgm) {
  std::vector<Point2> out;
  out.reserve(dgm.size());
  for (const auto& p : dgm.points) out.push_back({p.birth, p.death});
  return out;
}

/// Sum of squared distances between matched diagram points and their targets.
inline DiagramLoss diagram_matching_loss(const PersistenceDiagram& dgm, std::span<const Point2> targets,
                                         const Correspondence& matching) {
  DiagramLoss out;
  out.grad.values.assign(dgm.size(), Point2{0.0, 0.0});
  std::vector<char> target_used(targets.size(), 0), point_used(dgm.size(), 0);
  for (const auto& [t, j] : matching.pairs) {
    if (t >= targets.size() || j >= dgm.size()) throw Error(ErrorKind::shape, "matching index out of range");
    if (target_used[t] || point_used[j]) throw Error(ErrorKind::shape, "matching uses a target or point twice");
    target_used[t] = point_used[j] = 1;
    const double db = dgm.points[j].birth - targets[t][0];
    const double dd = dgm.points[j].death - targets[t][1];
    out.value += db * db + dd * dd;
    out.grad.values[j] = {2.0 * db, 2.0 * dd};
  }
  return out;
}

/// Pulls all but the `keep_top` most persistent points onto the diagonal:
/// sum of (d - b)^2 / 2 over the remaining points.
inline DiagramLoss diagonal_denoise_loss(const PersistenceDiagram& dgm, std::size_t keep_top) {
  DiagramLoss out;
  out.grad.values.assign(dgm.size(), Point2{0.0, 0.0});
  std::vector<std::size_t> order(dgm.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dgm.points[a].persistence() > dgm.points[b].persistence();
  });
  for (std::size_t k = keep_top; k < order.size(); ++k) {
    const auto& p = dgm.points[order[k]];
    const double gap = p.death - p.birth;
    out.value += 0.5 * gap * gap;
    out.grad.values[order[k]] = {-gap, gap};
  }
  return out;
}

/// Scatters a diagram gradient onto the birth and death simplices of each point.
inline FiltrationGradient diagram_to_filtration_grad(const DiagramGradient& grad, const PersistenceDiagram& dgm,
                                                     const FilteredComplex& complex) {
  if (grad.values.size() != dgm.size()) throw Error(ErrorKind::shape, "gradient and diagram differ in length");
  FiltrationGradient out;
  out.values.assign(complex.size(), 0.0);
  for (std::size_t i = 0; i < dgm.size(); ++i) {
    const auto& p = dgm.points[i];
    if (p.birth_simplex >= complex.size() || p.death_simplex >= complex.size())
      throw Error(ErrorKind::provenance, "diagram point refers to a simplex outside the complex");
    out.values[p.birth_simplex] += grad.values[i][0];
    out.values[p.death_simplex] += grad.values[i][1];
  }
  return out;
}

/// Longest edge of a simplex under current distances; ties go to the lexicographically smallest edge.
inline std::pair<Index, Index> longest_edge(const Simplex& s, const DistanceMatrix& dist) {
  const auto& v = s.vertices;
  if (s.dim == 1) return {v[0], v[1]};
  // Candidate edges in lexicographic order: (v0,v1) < (v0,v2) < (v1,v2).
  const std::array<std::pair<Index, Index>, 3> edges{{{v[0], v[1]}, {v[0], v[2]}, {v[1], v[2]}}};
  std::size_t best = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (dist(edges[k].first, edges[k].second) > dist(edges[best].first, edges[best].second)) best = k;
  return edges[best];
}

/// Rips chain rule: each simplex's gradient goes to its longest edge, then to the edge's endpoints.
inline PointGradient filtration_to_points_grad(const FiltrationGradient& grad, const FilteredComplex& complex,
                                               const PointCloud& cloud) {
  if (grad.values.size() != complex.size()) throw Error(ErrorKind::shape, "gradient does not match the complex");
  if (cloud.size() != complex.num_vertices())
    throw Error(ErrorKind::invalid_input, "complex and cloud disagree on the number of points");
  const std::size_t d = cloud.dim();
  PointGradient out;
  out.values.assign(cloud.size() * d, 0.0);
  const DistanceMatrix dist = pairwise_distances(cloud);
  for (Index id = 0; id < complex.size(); ++id) {
    const double g = grad.values[id];
    if (g == 0.0) continue;
    const Simplex& s = complex.simplex(id);
    if (s.dim == 0) continue;  // vertices sit at 0 regardless of position
    const auto [u, v] = longest_edge(s, dist);
    const double length = dist(u, v);
    if (!(length > 0.0)) {
      out.singular = true;
      continue;
    }
    const auto pu = cloud.point(u);
    const auto pv = cloud.point(v);
    for (std::size_t k = 0; k < d; ++k) {
      const double unit = (pu[k] - pv[k]) / length;
      out.values[u * d + k] += g * unit;
      out.values[v * d + k] -= g * unit;
    }
  }
  return out;
}

struct RepulsionLoss {
  double value = 0.0;
  std::vector<double> grad;  // row-major n x d
};

/// sum over ordered pairs i != j of 1 / (|x_i - x_j|^2 + eps).
inline RepulsionLoss repulsion_loss(const PointCloud& cloud, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::invalid_input, "repulsion eps must be positive");
  const std::size_t n = cloud.size();
  const std::size_t d = cloud.dim();
  RepulsionLoss out;
  out.grad.assign(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto pi = cloud.point(i);
      const auto pj = cloud.point(j);
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) sq += (pi[k] - pj[k]) * (pi[k] - pj[k]);
      const double denom = sq + eps;
      out.value += 2.0 / denom;
      // d/dx_i of 2 / (|x_i - x_j|^2 + eps)
      const double coef = -4.0 / (denom * denom);
      for (std::size_t k = 0; k < d; ++k) {
        const double c = coef * (pi[k] - pj[k]);
        out.grad[i * d + k] += c;
        out.grad[j * d + k] -= c;
      }
    }
  }
  return out;
}

/// Provenance key of a diagram point.
using PairKey = std::pair<Index, Index>;

/// Matches the points of `current` to `targets`, where targets[i] was assigned to
/// reference[i] at the start of the outer step. Points whose (birth, death) simplex
/// pair survives keep their target; the remaining targets are assigned to the
/// remaining points by minimum total squared distance.
inline Correspondence match_by_provenance(const PersistenceDiagram& current, std::span<const DiagramPoint> reference,
                                          std::span<const Point2> targets) {
  if (reference.size() != targets.size()) throw Error(ErrorKind::shape, "one target per reference point is required");
  std::map<PairKey, std::size_t> by_key;
  for (std::size_t i = 0; i < reference.size(); ++i)
    by_key.emplace(PairKey{reference[i].birth_simplex, reference[i].death_simplex}, i);

  Correspondence out;
  std::vector<char> target_used(targets.size(), 0), point_used(current.size(), 0);
  for (std::size_t j = 0; j < current.size(); ++j) {
    const auto it = by_key.find({current.points[j].birth_simplex, current.points[j].death_simplex});
    if (it == by_key.end() || target_used[it->second]) continue;
    out.pairs.emplace_back(it->second, j);
    target_used[it->second] = point_used[j] = 1;
  }

  std::vector<std::size_t> free_targets, free_points;
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (!target_used[i]) free_targets.push_back(i);
  for (std::size_t j = 0; j < current.size(); ++j)
    if (!point_used[j]) free_points.push_back(j);
  if (!free_targets.empty() && !free_points.empty()) {
    std::vector<double> cost(free_targets.size() * free_points.size());
    for (std::size_t a = 0; a < free_targets.size(); ++a)
      for (std::size_t b = 0; b < free_points.size(); ++b) {
        const auto& p = current.points[free_points[b]];
        cost[a * free_points.size() + b] = squared_distance(targets[free_targets[a]], {p.birth, p.death});
      }
    const auto match = min_cost_assignment(free_targets.size(), free_points.size(), cost);
    for (std::size_t a = 0; a < free_targets.size(); ++a)
      if (match[a] >= 0) out.pairs.emplace_back(free_targets[a], free_points[static_cast<std::size_t>(match[a])]);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

/// Identity correspondence for a diagram and an equally long target list.
inline Correspondence identity_matching(std::size_t size) {
  Correspondence out;
  for (std::size_t i = 0; i < size; ++i) out.pairs.emplace_back(i, i);
  return out;
}

}  // namespace phflow
