#include "dwass/transport.hpp"

#include <limits>

namespace dwass {
namespace {

struct Arc {
  int to;
  Rational capacity;  // residual
  int cost;
  int reverse;  // index of the paired arc in graph[to]
};

class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : graph_(nodes) {}

  void add_arc(int from, int to, Rational capacity, int cost) {
    graph_[from].push_back(Arc{to, std::move(capacity), cost, static_cast<int>(graph_[to].size())});
    graph_[to].push_back(Arc{from, Rational(0), -cost, static_cast<int>(graph_[from].size()) - 1});
  }

  /// Sends as much flow as possible from `source` to `sink` along successive
  /// shortest paths (Bellman-Ford; reverse arcs carry negative costs but no
  /// negative cycle ever appears along shortest-path augmentations).
  Rational min_cost_max_flow(int source, int sink) {
    constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
    const int n = static_cast<int>(graph_.size());
    Rational total_cost = 0;

    while (true) {
      std::vector<long long> dist(n, kInf);
      std::vector<int> prev_node(n, -1);
      std::vector<int> prev_arc(n, -1);
      dist[source] = 0;

      bool changed = true;
      while (changed) {
        changed = false;
        for (int u = 0; u < n; ++u) {
          if (dist[u] == kInf) continue;
          for (int k = 0; k < static_cast<int>(graph_[u].size()); ++k) {
            const Arc& arc = graph_[u][k];
            if (arc.capacity.is_zero()) continue;
            const long long candidate = dist[u] + arc.cost;
            if (candidate < dist[arc.to]) {
              dist[arc.to] = candidate;
              prev_node[arc.to] = u;
              prev_arc[arc.to] = k;
              changed = true;
            }
          }
        }
      }
      if (dist[sink] == kInf) break;

      Rational bottleneck(-1);
      for (int v = sink; v != source; v = prev_node[v]) {
        const Arc& arc = graph_[prev_node[v]][prev_arc[v]];
        if (bottleneck < 0 || arc.capacity < bottleneck) bottleneck = arc.capacity;
      }
      for (int v = sink; v != source; v = prev_node[v]) {
        Arc& arc = graph_[prev_node[v]][prev_arc[v]];
        arc.capacity -= bottleneck;
        graph_[v][arc.reverse].capacity += bottleneck;
      }
      total_cost += bottleneck * dist[sink];
    }
    return total_cost;
  }

 private:
  std::vector<std::vector<Arc>> graph_;
};

}  // namespace

Rational min_cost_transport(const std::vector<Rational>& supply,
                            const std::vector<Rational>& demand,
                            const std::vector<std::vector<int>>& cost) {
  const int n = static_cast<int>(supply.size());
  const int m = static_cast<int>(demand.size());
  if (static_cast<int>(cost.size()) != n) throw std::invalid_argument("cost matrix rows mismatch");
  Rational balance = 0;
  for (const auto& s : supply) {
    if (s < 0) throw std::invalid_argument("negative supply");
    balance += s;
  }
  for (const auto& d : demand) {
    if (d < 0) throw std::invalid_argument("negative demand");
    balance -= d;
  }
  if (!balance.is_zero()) throw std::invalid_argument("supply and demand totals differ");

  const int source = n + m;
  const int sink = n + m + 1;
  FlowNetwork net(n + m + 2);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(cost[i].size()) != m) throw std::invalid_argument("cost matrix cols mismatch");
    net.add_arc(source, i, supply[i], 0);
    for (int j = 0; j < m; ++j) net.add_arc(i, n + j, supply[i], cost[i][j]);
  }
  for (int j = 0; j < m; ++j) net.add_arc(n + j, sink, demand[j], 0);
  return net.min_cost_max_flow(source, sink);
}

Rational oracle_min_cost(const ProbabilityMeasure<Rational>& mu,
                         const ProbabilityMeasure<Rational>& nu,
                         const TransportLimits& limits) {
  const auto left = mu.support();
  const auto right = nu.support();
  if (left.size() > limits.max_support_per_side || right.size() > limits.max_support_per_side) {
    throw SupportLimitError("transport support limit exceeded (" + std::to_string(left.size()) +
                            " x " + std::to_string(right.size()) + ", limit " +
                            std::to_string(limits.max_support_per_side) + " per side)");
  }

  std::vector<Rational> supply;
  std::vector<Rational> demand;
  supply.reserve(left.size());
  demand.reserve(right.size());
  for (const auto& x : left) supply.push_back(mu.at(x));
  for (const auto& y : right) demand.push_back(nu.at(y));

  std::vector<std::vector<int>> cost(left.size(), std::vector<int>(right.size(), 1));
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      if (left[i] == right[j]) cost[i][j] = 0;
    }
  }
  return min_cost_transport(supply, demand, cost);
}

}  // namespace dwass
