#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace phflow::detail {

/// Successive shortest paths with Dijkstra and node potentials. Integral capacities,
/// nonnegative real costs. Sized for the small transport problems solved here.
class MinCostFlow {
 public:
  explicit MinCostFlow(int num_nodes) : graph_(static_cast<std::size_t>(num_nodes)) {}

  /// Returns the index of the forward arc, usable with flow_on().
  std::size_t add_arc(int from, int to, std::int64_t capacity, double cost) {
    graph_[from].push_back(arcs_.size());
    arcs_.push_back({to, capacity, cost});
    graph_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0, -cost});
    return arcs_.size() - 2;
  }

  std::int64_t flow_on(std::size_t arc) const { return arcs_[arc ^ 1].capacity; }

  /// Pushes up to `limit` units from `source` to `sink`; returns the amount pushed.
  std::int64_t run(int source, int sink, std::int64_t limit) {
    const std::size_t n = graph_.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> potential(n, 0.0), dist(n);
    std::vector<std::size_t> via(n);
    std::int64_t pushed = 0;
    using Entry = std::pair<double, int>;
    while (pushed < limit) {
      std::fill(dist.begin(), dist.end(), kInf);
      dist[source] = 0.0;
      std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
      queue.emplace(0.0, source);
      while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (std::size_t a : graph_[u]) {
          const Arc& arc = arcs_[a];
          if (arc.capacity <= 0) continue;
          // Reduced costs are nonnegative up to rounding.
          const double reduced = std::max(0.0, arc.cost + potential[u] - potential[arc.to]);
          if (dist[u] + reduced < dist[arc.to]) {
            dist[arc.to] = dist[u] + reduced;
            via[arc.to] = a;
            queue.emplace(dist[arc.to], arc.to);
          }
        }
      }
      if (dist[sink] == kInf) break;
      for (std::size_t v = 0; v < n; ++v)
        if (dist[v] < kInf) potential[v] += dist[v];
      std::int64_t bottleneck = limit - pushed;
      for (int v = sink; v != source; v = arcs_[via[v] ^ 1].to)
        bottleneck = std::min(bottleneck, arcs_[via[v]].capacity);
      for (int v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].capacity -= bottleneck;
        arcs_[via[v] ^ 1].capacity += bottleneck;
      }
      pushed += bottleneck;
    }
    return pushed;
  }

 private:
  struct Arc {
    int to;
    std::int64_t capacity;
    double cost;
  };
  std::vector<std::vector<std::size_t>> graph_;
  std::vector<Arc> arcs_;
};

}  // namespace phflow::detail
