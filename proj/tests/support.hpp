#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "phflow/complex.hpp"
#include "phflow/persistence.hpp"

namespace testing_support {

inline phflow::PointCloud random_cloud(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, scale);
  std::vector<double> coords(2 * n);
  for (double& c : coords) c = u(rng);
  return phflow::PointCloud(2, std::move(coords));
}

/// All pairwise distances differ by more than `gap` (relative to the largest).
inline bool tie_free(const phflow::PointCloud& cloud, double gap = 1e-4) {
  const auto dist = phflow::pairwise_distances(cloud);
  std::vector<double> d;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t j = i + 1; j < cloud.size(); ++j) d.push_back(dist(i, j));
  std::sort(d.begin(), d.end());
  for (std::size_t k = 1; k < d.size(); ++k)
    if (d[k] - d[k - 1] < gap * d.back()) return false;
  return true;
}

/// Random tie-free cloud; draws seeds starting at `seed` until one qualifies.
inline phflow::PointCloud random_tie_free_cloud(std::size_t n, std::uint64_t& seed, double gap = 1e-4) {
  for (;; ++seed) {
    auto cloud = random_cloud(n, seed);
    if (tie_free(cloud, gap)) return cloud;
  }
}

inline std::vector<std::pair<double, double>> sorted_pairs(const phflow::PersistenceDiagram& dgm) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : dgm.points) out.emplace_back(p.birth, p.death);
  std::sort(out.begin(), out.end());
  return out;
}

/// Central finite difference of f at x along every coordinate.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double up = f(x);
    x[i] = x0 - h;
    const double down = f(x);
    x[i] = x0;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

/// ||a - b|| / max(||b||, floor).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-12) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), floor);
}

}  // namespace testing_support
