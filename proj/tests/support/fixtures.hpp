#pragma once

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qnet/network.hpp"

namespace qnet::testing {

struct EdgeSpec {
  NodeId a;
  NodeId b;
  double capacity;
  double threshold = 0.0;
  int level = 1;
};

inline QuantumNetwork make_network(std::size_t nodes, const std::vector<EdgeSpec>& edges) {
  std::vector<EntangledConnection> conns;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    conns.push_back({k, e.a, e.b, e.level, e.capacity, e.threshold, 1.0});
  }
  return QuantumNetwork(nodes, std::move(conns));
}

/// 0 - 1 - 2 - ... - (n-1), unit capacities.
inline QuantumNetwork path_network(std::size_t n, double capacity = 1.0) {
  std::vector<EdgeSpec> edges;
  for (NodeId v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, capacity});
  return make_network(n, edges);
}

inline ConnectionMask all_usable(const QuantumNetwork& net) {
  return ConnectionMask(net.connection_count(), true);
}

/// Every simple path from s to t over usable connections, as node sequences,
/// by depth-first enumeration.
inline std::vector<std::vector<NodeId>> simple_paths(const QuantumNetwork& net,
                                                     const ConnectionMask& mask, NodeId s,
                                                     NodeId t) {
  std::vector<std::vector<NodeId>> out;
  std::vector<NodeId> stack{s};
  std::vector<bool> seen(net.node_count(), false);
  seen[s] = true;
  auto dfs = [&](auto&& self, NodeId v) -> void {
    if (v == t) {
      out.push_back(stack);
      return;
    }
    for (const auto& c : net.connections()) {
      if (!mask[c.id] || !c.touches(v)) continue;
      const NodeId w = c.other(v);
      if (seen[w]) continue;
      seen[w] = true;
      stack.push_back(w);
      self(self, w);
      stack.pop_back();
      seen[w] = false;
    }
  };
  dfs(dfs, s);
  return out;
}

/// Node sequence visited by a connection path starting at s.
inline std::vector<NodeId> path_nodes(const QuantumNetwork& net,
                                      const std::vector<ConnectionId>& path, NodeId s) {
  std::vector<NodeId> nodes{s};
  for (ConnectionId id : path) nodes.push_back(net.connection(id).other(nodes.back()));
  return nodes;
}

/// Undirected max-flow between s and t with the given per-connection
/// capacities (Edmonds-Karp on the doubled arc set).
inline double max_flow(const QuantumNetwork& net, const std::vector<double>& capacity, NodeId s,
                       NodeId t) {
  const std::size_t n = net.node_count();
  std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
  for (const auto& c : net.connections()) {
    cap[c.a][c.b] += capacity[c.id];
    cap[c.b][c.a] += capacity[c.id];
  }
  double flow = 0.0;
  while (true) {
    std::vector<std::size_t> parent(n, n);
    parent[s] = s;
    std::deque<NodeId> queue{s};
    while (!queue.empty() && parent[t] == n) {
      const NodeId v = queue.front();
      queue.pop_front();
      for (NodeId w = 0; w < n; ++w) {
        if (parent[w] == n && cap[v][w] > 1e-12) {
          parent[w] = v;
          queue.push_back(w);
        }
      }
    }
    if (parent[t] == n) break;
    double push = std::numeric_limits<double>::infinity();
    for (NodeId w = t; w != s; w = parent[w]) push = std::min(push, cap[parent[w]][w]);
    for (NodeId w = t; w != s; w = parent[w]) {
      cap[parent[w]][w] -= push;
      cap[w][parent[w]] += push;
    }
    flow += push;
  }
  return flow;
}

inline std::vector<double> capacities(const QuantumNetwork& net) {
  std::vector<double> caps;
  for (const auto& c : net.connections()) caps.push_back(c.capacity);
  return caps;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* root = std::getenv("QNET_TEST_TMP");
  std::filesystem::path dir =
      root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "qnet_tests";
  dir /= name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Every connected simple graph on n labeled nodes, as edge lists over the
/// lexicographic pair order.
inline std::vector<std::vector<std::pair<NodeId, NodeId>>> connected_graphs(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<std::vector<std::pair<NodeId, NodeId>>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << pairs.size()); ++mask) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (mask >> k & 1) edges.push_back(pairs[k]);
    }
    std::vector<std::size_t> label(n);
    for (std::size_t v = 0; v < n; ++v) label[v] = v;
    auto find = [&](std::size_t v) {
      while (label[v] != v) v = label[v] = label[label[v]];
      return v;
    };
    for (const auto& [a, b] : edges) label[find(a)] = find(b);
    bool connected = true;
    for (std::size_t v = 1; v < n; ++v) connected = connected && find(v) == find(0);
    if (connected) out.push_back(std::move(edges));
  }
  return out;
}

}  // namespace qnet::testing
