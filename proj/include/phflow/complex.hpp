#pragma once

// Point clouds and Vietoris-Rips filtrations (simplices up to dimension 2).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "phflow/errors.hpp"

namespace phflow {

using Index = std::uint32_t;
inline constexpr Index kNoIndex = std::numeric_limits<Index>::max();

/// n points in R^d stored row-major.
class PointCloud {
 public:
  PointCloud() = default;

  PointCloud(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0) throw Error(ErrorKind::invalid_input, "point dimension must be >= 1");
    if (coords_.size() % dim_ != 0)
      throw Error(ErrorKind::invalid_input, "coordinate count is not a multiple of the dimension");
    ids_.resize(coords_.size() / dim_);
    std::iota(ids_.begin(), ids_.end(), 0);
    validate();
  }

  static PointCloud planar(const std::vector<std::array<double, 2>>& points) {
    std::vector<double> coords;
    coords.reserve(points.size() * 2);
    for (const auto& p : points) {
      coords.push_back(p[0]);
      coords.push_back(p[1]);
    }
    return PointCloud(2, std::move(coords));
  }

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  std::span<double> point(std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

  const std::vector<double>& coords() const noexcept { return coords_; }
  std::vector<double>& coords() noexcept { return coords_; }
  const std::vector<int>& ids() const noexcept { return ids_; }

  void validate() const {
    if (size() == 0) throw Error(ErrorKind::invalid_input, "point cloud is empty");
    for (double c : coords_)
      if (!std::isfinite(c)) throw Error(ErrorKind::invalid_input, "non-finite coordinate");
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<int> ids_;
};

/// Symmetric n x n matrix stored densely.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n = 0) : n_(n), values_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

inline DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  cloud.validate();
  const std::size_t n = cloud.size();
  DistanceMatrix dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(cloud.point(i), cloud.point(j));
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }
  return dist;
}

/// Vertex tuple of a simplex of dimension 0, 1 or 2; unused slots hold kNoIndex.
struct Simplex {
  std::array<Index, 3> vertices{kNoIndex, kNoIndex, kNoIndex};
  int dim = 0;

  static Simplex vertex(Index a) { return {{a, kNoIndex, kNoIndex}, 0}; }
  static Simplex edge(Index a, Index b) { return {{std::min(a, b), std::max(a, b), kNoIndex}, 1}; }
  static Simplex triangle(Index a, Index b, Index c) {
    std::array<Index, 3> v{a, b, c};
    std::sort(v.begin(), v.end());
    return {v, 2};
  }

  std::span<const Index> span() const { return {vertices.data(), static_cast<std::size_t>(dim + 1)}; }

  friend bool operator==(const Simplex&, const Simplex&) = default;
  friend auto operator<=>(const Simplex& a, const Simplex& b) {
    return std::lexicographical_compare_three_way(a.vertices.begin(), a.vertices.begin() + a.dim + 1,
                                                  b.vertices.begin(), b.vertices.begin() + b.dim + 1);
  }
};

/// A simplicial complex with a filtration value per simplex and a deterministic total order.
///
/// Simplices keep a stable id (their position in simplices()) for the lifetime of the
/// complex; re-evaluating the filtration only permutes the order. A freshly built Rips
/// complex stores simplices in filtration order, so id == rank until the first re-evaluation.
class FilteredComplex {
 public:
  FilteredComplex() = default;

  /// Builds from an explicit simplex list. Every face of every simplex must be present.
  FilteredComplex(std::size_t num_vertices, std::vector<Simplex> simplices, std::vector<double> filtration)
      : num_vertices_(num_vertices), simplices_(std::move(simplices)), filtration_(std::move(filtration)) {
    if (simplices_.size() != filtration_.size())
      throw Error(ErrorKind::shape, "one filtration value per simplex is required");
    index_faces();
    sort_order();
  }

  std::size_t size() const noexcept { return simplices_.size(); }
  std::size_t num_vertices() const noexcept { return num_vertices_; }
  int max_dim() const noexcept { return max_dim_; }

  const std::vector<Simplex>& simplices() const noexcept { return simplices_; }
  const Simplex& simplex(Index id) const { return simplices_[id]; }

  const std::vector<double>& filtration() const noexcept { return filtration_; }
  double value(Index id) const { return filtration_[id]; }

  /// Rank of simplex `id` in the filtration order.
  Index rank(Index id) const { return rank_[id]; }
  /// Simplex id at position `rank` of the filtration order.
  Index at_rank(Index rank) const { return by_rank_[rank]; }
  const std::vector<Index>& by_rank() const noexcept { return by_rank_; }

  Index vertex_id(Index v) const { return v < vertex_ids_.size() ? vertex_ids_[v] : kNoIndex; }
  Index edge_id(Index u, Index v) const {
    if (u == v || u >= num_vertices_ || v >= num_vertices_) return kNoIndex;
    return edge_ids_[static_cast<std::size_t>(u) * num_vertices_ + v];
  }

  /// Ids of the codimension-1 faces.
  struct Facets {
    std::array<Index, 3> ids{};
    std::size_t count = 0;
    const Index* begin() const { return ids.data(); }
    const Index* end() const { return ids.data() + count; }
    std::size_t size() const { return count; }
  };

  Facets facets(Index id) const {
    const Simplex& s = simplices_[id];
    const auto& v = s.vertices;
    Facets out;
    if (s.dim == 1) {
      out.ids = {vertex_id(v[0]), vertex_id(v[1]), kNoIndex};
      out.count = 2;
    } else if (s.dim == 2) {
      out.ids = {edge_id(v[0], v[1]), edge_id(v[0], v[2]), edge_id(v[1], v[2])};
      out.count = 3;
    }
    for (Index f : out)
      if (f == kNoIndex) throw Error(ErrorKind::structural, "a face of a simplex is missing from the complex");
    return out;
  }

  /// Replaces all filtration values and re-sorts. The simplex set is unchanged.
  void set_filtration(std::vector<double> values) {
    if (values.size() != simplices_.size())
      throw Error(ErrorKind::shape, "one filtration value per simplex is required");
    filtration_ = std::move(values);
    sort_order();
  }

  /// Total order key: (filtration value, dimension, lexicographic vertex tuple).
  bool precedes(Index a, Index b) const {
    if (filtration_[a] != filtration_[b]) return filtration_[a] < filtration_[b];
    if (simplices_[a].dim != simplices_[b].dim) return simplices_[a].dim < simplices_[b].dim;
    return simplices_[a] < simplices_[b];
  }

 private:
  void index_faces() {
    vertex_ids_.assign(num_vertices_, kNoIndex);
    edge_ids_.assign(num_vertices_ * num_vertices_, kNoIndex);
    max_dim_ = 0;
    for (Index id = 0; id < simplices_.size(); ++id) {
      const Simplex& s = simplices_[id];
      if (s.dim < 0 || s.dim > 2) throw Error(ErrorKind::unsupported_dimension, "simplices above dimension 2");
      for (Index v : s.span())
        if (v >= num_vertices_) throw Error(ErrorKind::invalid_input, "simplex references an unknown vertex");
      max_dim_ = std::max(max_dim_, s.dim);
      if (s.dim == 0) {
        vertex_ids_[s.vertices[0]] = id;
      } else if (s.dim == 1) {
        const auto [u, v, w] = s.vertices;
        edge_ids_[static_cast<std::size_t>(u) * num_vertices_ + v] = id;
        edge_ids_[static_cast<std::size_t>(v) * num_vertices_ + u] = id;
      }
    }
    for (Index id = 0; id < simplices_.size(); ++id) facets(id);
  }

  void sort_order() {
    by_rank_.resize(simplices_.size());
    std::iota(by_rank_.begin(), by_rank_.end(), Index{0});
    std::sort(by_rank_.begin(), by_rank_.end(), [this](Index a, Index b) { return precedes(a, b); });
    rank_.resize(simplices_.size());
    for (Index r = 0; r < by_rank_.size(); ++r) rank_[by_rank_[r]] = r;
  }

  std::size_t num_vertices_ = 0;
  int max_dim_ = 0;
  std::vector<Simplex> simplices_;
  std::vector<double> filtration_;
  std::vector<Index> rank_;
  std::vector<Index> by_rank_;
  std::vector<Index> vertex_ids_;
  std::vector<Index> edge_ids_;
};

/// Diameter of the cloud times 1.1; a Rips complex at this radius is connected.
inline double default_max_radius(const DistanceMatrix& dist) {
  double diameter = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i)
    for (std::size_t j = i + 1; j < dist.size(); ++j) diameter = std::max(diameter, dist(i, j));
  return diameter > 0.0 ? 1.1 * diameter : 1.0;
}

/// Rips filtration value of a simplex: the largest pairwise distance among its vertices.
inline double rips_value(const Simplex& s, const DistanceMatrix& dist) {
  const auto& v = s.vertices;
  switch (s.dim) {
    case 1: return dist(v[0], v[1]);
    case 2: return std::max({dist(v[0], v[1]), dist(v[0], v[2]), dist(v[1], v[2])});
    default: return 0.0;
  }
}

/// Builds the Vietoris-Rips complex of `cloud` truncated at `max_dim` and `max_radius`.
/// A non-positive or infinite `max_radius` keeps every simplex up to `max_dim`.
inline FilteredComplex build_rips(const PointCloud& cloud, int max_dim, double max_radius) {
  if (max_dim > 2) throw Error(ErrorKind::unsupported_dimension, "Rips complexes above dimension 2 are not supported");
  if (max_dim < 1) throw Error(ErrorKind::unsupported_dimension, "max_dim must be 1 or 2");
  if (std::isnan(max_radius)) throw Error(ErrorKind::invalid_input, "max_radius is NaN");
  const DistanceMatrix dist = pairwise_distances(cloud);
  const auto n = static_cast<Index>(cloud.size());
  const bool unbounded = !(max_radius > 0.0) || std::isinf(max_radius);
  auto within = [&](double d) { return unbounded || d <= max_radius; };

  std::vector<Simplex> simplices;
  for (Index v = 0; v < n; ++v) simplices.push_back(Simplex::vertex(v));
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (within(dist(u, v))) simplices.push_back(Simplex::edge(u, v));
  if (max_dim == 2) {
    for (Index u = 0; u < n; ++u)
      for (Index v = u + 1; v < n; ++v) {
        if (!within(dist(u, v))) continue;
        for (Index w = v + 1; w < n; ++w)
          if (within(dist(u, w)) && within(dist(v, w))) simplices.push_back(Simplex::triangle(u, v, w));
      }
  }

  std::vector<double> values(simplices.size());
  for (std::size_t i = 0; i < simplices.size(); ++i) values[i] = rips_value(simplices[i], dist);

  // Store simplices in filtration order so that ids coincide with ranks initially.
  FilteredComplex unsorted(n, simplices, values);
  std::vector<Simplex> sorted(simplices.size());
  std::vector<double> sorted_values(simplices.size());
  for (Index r = 0; r < sorted.size(); ++r) {
    sorted[r] = simplices[unsorted.at_rank(r)];
    sorted_values[r] = values[unsorted.at_rank(r)];
  }
  return FilteredComplex(n, std::move(sorted), std::move(sorted_values));
}

/// Recomputes Rips filtration values from the current coordinates on a fixed simplex set.
inline FilteredComplex rips_filtration_values(const PointCloud& cloud, FilteredComplex complex) {
  if (cloud.size() != complex.num_vertices())
    throw Error(ErrorKind::invalid_input, "complex and cloud disagree on the number of points");
  const DistanceMatrix dist = pairwise_distances(cloud);
  std::vector<double> values(complex.size());
  for (Index id = 0; id < complex.size(); ++id) values[id] = rips_value(complex.simplex(id), dist);
  complex.set_filtration(std::move(values));
  return complex;
}

}  // namespace phflow
