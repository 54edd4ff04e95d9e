#pragma once

// Boundary-matrix reduction over Z/2 and persistence diagrams with simplex provenance.

#include <algorithm>
#include <utility>
#include <vector>

#include "phflow/complex.hpp"
#include "phflow/errors.hpp"

namespace phflow {

/// Persistence pairs in terms of filtration ranks.
struct PersistencePairing {
  std::vector<std::pair<Index, Index>> pairs;  // (birth rank, death rank), sorted by death rank
  std::vector<Index> essential;                // unpaired ranks, ascending
};

/// Pairs whose persistence is at most this are treated as lying on the diagonal.
inline constexpr double kZeroPersistence = 1e-12;

struct DiagramPoint {
  double birth = 0.0;
  double death = 0.0;
  Index birth_simplex = kNoIndex;  // stable simplex id in the complex
  Index death_simplex = kNoIndex;

  double persistence() const { return death - birth; }
};

struct PersistenceDiagram {
  int degree = 0;
  std::vector<DiagramPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

namespace detail {

// out = a xor b for ascending index lists.
inline void symmetric_difference(const std::vector<Index>& a, const std::vector<Index>& b, std::vector<Index>& out) {
  out.clear();
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else if (b[j] < a[i]) {
      out.push_back(b[j++]);
    } else {
      ++i;
      ++j;
    }
  }
  out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(i), a.end());
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(j), b.end());
}

}  // namespace detail

/// Standard left-to-right column reduction of the boundary matrix, with clearing.
///
/// Columns are processed from the top dimension down; every row that becomes a pivot
/// in dimension q marks its column in dimension q-1 as zero without reducing it.
inline PersistencePairing reduce_boundary_matrix(const FilteredComplex& complex) {
  const auto n = static_cast<Index>(complex.size());
  std::vector<Index> pivot_owner(n, kNoIndex);
  std::vector<std::vector<Index>> reduced(n);
  std::vector<char> cleared(n, 0);
  std::vector<char> is_death(n, 0);
  PersistencePairing result;

  std::vector<std::vector<Index>> ranks_by_dim(3);
  for (Index r = 0; r < n; ++r) ranks_by_dim[complex.simplex(complex.at_rank(r)).dim].push_back(r);

  std::vector<Index> column, scratch;
  for (int dim = complex.max_dim(); dim >= 1; --dim) {
    for (Index j : ranks_by_dim[dim]) {
      if (cleared[j]) continue;
      column.clear();
      for (Index face : complex.facets(complex.at_rank(j))) {
        const Index face_rank = complex.rank(face);
        if (face_rank >= j) throw Error(ErrorKind::structural, "a face does not precede its coface");
        column.push_back(face_rank);
      }
      std::sort(column.begin(), column.end());
      while (!column.empty()) {
        const Index owner = pivot_owner[column.back()];
        if (owner == kNoIndex) break;
        detail::symmetric_difference(column, reduced[owner], scratch);
        column.swap(scratch);
      }
      if (column.empty()) continue;
      const Index low = column.back();
      pivot_owner[low] = j;
      cleared[low] = 1;
      is_death[j] = 1;
      result.pairs.emplace_back(low, j);
      reduced[j] = column;
    }
  }
  for (Index r = 0; r < n; ++r)
    if (!cleared[r] && !is_death[r]) result.essential.push_back(r);
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  return result;
}

/// Same pairing as reduce_boundary_matrix, computed by reducing the coboundary matrix.
///
/// Degree 0 uses union-find with the elder rule. Degree 1 reduces edge coboundaries in
/// reverse filtration order, skipping edges already paired with a vertex; each column
/// is a sorted list of cofacet ranks and its pivot is the oldest one. The number of
/// columns is the number of cycle-creating edges rather than the number of triangles,
/// which keeps dense Rips complexes tractable.
inline PersistencePairing reduce_coboundary_matrix(const FilteredComplex& complex) {
  const auto n = static_cast<Index>(complex.size());
  const auto num_vertices = static_cast<Index>(complex.num_vertices());
  PersistencePairing result;
  std::vector<char> paired(n, 0);

  // Degree 0: components are represented by their oldest vertex.
  std::vector<Index> parent(num_vertices);
  for (Index v = 0; v < num_vertices; ++v) parent[v] = v;
  auto find = [&parent](Index v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  auto vertex_rank = [&complex](Index v) { return complex.rank(complex.vertex_id(v)); };
  std::vector<Index> edge_ranks;
  for (Index r = 0; r < n; ++r) {
    const Simplex& s = complex.simplex(complex.at_rank(r));
    if (s.dim == 0) continue;
    if (s.dim == 1) edge_ranks.push_back(r);
    for (Index v : s.span())
      if (complex.vertex_id(v) == kNoIndex) throw Error(ErrorKind::structural, "a face of a simplex is missing from the complex");
    if (s.dim != 1) continue;
    Index a = find(s.vertices[0]);
    Index b = find(s.vertices[1]);
    if (a == b) continue;
    if (vertex_rank(a) > vertex_rank(b)) std::swap(a, b);
    parent[b] = a;  // the younger component dies
    const Index birth = vertex_rank(b);
    result.pairs.emplace_back(birth, r);
    paired[birth] = 1;
    paired[r] = 1;
  }

  if (complex.max_dim() >= 2) {
    // Cofacet lists per edge, in ranks.
    std::vector<Index> offsets(n + 1, 0);
    for (Index id = 0; id < n; ++id)
      if (complex.simplex(id).dim == 2)
        for (Index f : complex.facets(id)) ++offsets[complex.rank(f) + 1];
    for (Index r = 0; r < n; ++r) offsets[r + 1] += offsets[r];
    std::vector<Index> cofacets(offsets[n]);
    std::vector<Index> fill(offsets.begin(), offsets.end() - 1);
    for (Index id = 0; id < n; ++id) {
      if (complex.simplex(id).dim != 2) continue;
      const Index tri_rank = complex.rank(id);
      for (Index f : complex.facets(id)) {
        const Index fr = complex.rank(f);
        if (fr >= tri_rank) throw Error(ErrorKind::structural, "a face does not precede its coface");
        cofacets[fill[fr]++] = tri_rank;
      }
    }

    std::vector<Index> pivot_owner(n, kNoIndex);
    std::vector<std::vector<Index>> reduced(n);
    std::vector<Index> column, scratch;
    for (auto it = edge_ranks.rbegin(); it != edge_ranks.rend(); ++it) {
      const Index e = *it;
      if (paired[e]) continue;
      column.assign(cofacets.begin() + offsets[e], cofacets.begin() + offsets[e + 1]);
      std::sort(column.begin(), column.end());
      while (!column.empty()) {
        const Index owner = pivot_owner[column.front()];
        if (owner == kNoIndex) break;
        detail::symmetric_difference(column, reduced[owner], scratch);
        column.swap(scratch);
      }
      if (column.empty()) continue;
      const Index pivot = column.front();
      pivot_owner[pivot] = e;
      result.pairs.emplace_back(e, pivot);
      paired[e] = 1;
      paired[pivot] = 1;
      reduced[e] = column;
    }
  }

  for (Index r = 0; r < n; ++r)
    if (!paired[r]) result.essential.push_back(r);
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  return result;
}

/// Finite points of the degree-p diagram. Zero-persistence pairs are dropped.
inline PersistenceDiagram extract_diagram(const PersistencePairing& pairing, const FilteredComplex& complex, int p) {
  if (p < 0 || p > 1 || p >= std::max(complex.max_dim(), 1))
    throw Error(ErrorKind::invalid_degree, "degree " + std::to_string(p) + " is not supported by this complex");
  PersistenceDiagram dgm;
  dgm.degree = p;
  for (const auto& [birth_rank, death_rank] : pairing.pairs) {
    if (birth_rank >= complex.size() || death_rank >= complex.size())
      throw Error(ErrorKind::provenance, "pairing does not belong to this complex");
    const Index b = complex.at_rank(birth_rank);
    const Index d = complex.at_rank(death_rank);
    if (complex.simplex(b).dim != p) continue;
    const double birth = complex.value(b);
    const double death = complex.value(d);
    if (death - birth <= kZeroPersistence) continue;
    dgm.points.push_back({birth, death, b, d});
  }
  return dgm;
}

/// Diagrams of degree 0..max_degree from a single reduction.
inline std::vector<PersistenceDiagram> compute_diagrams(const FilteredComplex& complex, int max_degree) {
  const PersistencePairing pairing = reduce_coboundary_matrix(complex);
  std::vector<PersistenceDiagram> out;
  for (int p = 0; p <= max_degree; ++p) out.push_back(extract_diagram(pairing, complex, p));
  return out;
}

}  // namespace phflow
