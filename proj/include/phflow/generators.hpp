#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "phflow/complex.hpp"
#include "phflow/errors.hpp"

namespace phflow {

/// n points at uniformly random angles on a circle of the given radius, plus isotropic
/// Gaussian noise of standard deviation sigma.
inline PointCloud generate_noisy_circle(std::size_t n, double radius, double sigma, std::uint64_t seed) {
  if (n < 3) throw Error(ErrorKind::invalid_input, "a circle sample needs at least 3 points");
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_input, "radius must be positive");
  if (!(sigma >= 0.0)) throw Error(ErrorKind::invalid_input, "sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> coords;
  coords.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = angle(rng);
    const double ex = noise(rng);
    const double ey = noise(rng);
    coords.push_back(radius * std::cos(theta) + sigma * ex);
    coords.push_back(radius * std::sin(theta) + sigma * ey);
  }
  return PointCloud(2, std::move(coords));
}

/// n i.i.d. uniform points in [-1, 1]^2.
inline PointCloud generate_uniform_square(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::invalid_input, "at least one point is required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<double> coords(2 * n);
  for (double& c : coords) c = coord(rng);
  return PointCloud(2, std::move(coords));
}

}  // namespace phflow
