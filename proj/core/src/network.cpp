#include "qnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include <Eigen/Eigenvalues>

#include "qnet/error.hpp"
#include "qnet/seed.hpp"

namespace qnet {

namespace {

std::string connection_label(const EntangledConnection& c) {
  return "connection " + std::to_string(c.id);
}

}  // namespace

QuantumNetwork::QuantumNetwork(std::size_t node_count,
                               std::vector<EntangledConnection> connections)
    : node_count_(node_count), connections_(std::move(connections)) {
  for (std::size_t i = 0; i < connections_.size(); ++i) {
    const auto& c = connections_[i];
    if (c.id != i) {
      throw InvalidArgument("connection ids must be dense and ordered: position " +
                            std::to_string(i) + " holds id " + std::to_string(c.id));
    }
    if (c.a >= node_count_ || c.b >= node_count_) {
      throw InvalidArgument(connection_label(c) + ": endpoint out of range");
    }
    if (c.a == c.b) {
      throw InvalidArgument(connection_label(c) + ": self-loop");
    }
    if (c.level < 1) {
      throw InvalidArgument(connection_label(c) + ": level must be >= 1");
    }
    if (!(c.capacity >= 0.0) || !std::isfinite(c.capacity)) {
      throw InvalidArgument(connection_label(c) + ": capacity must be finite and >= 0");
    }
    if (!(c.threshold >= 0.0)) {
      throw InvalidArgument(connection_label(c) + ": threshold must be >= 0");
    }
    if (c.threshold > c.capacity) {
      throw InvalidArgument(connection_label(c) + ": threshold exceeds capacity");
    }
    if (!(c.fidelity > 0.0 && c.fidelity <= 1.0)) {
      throw InvalidArgument(connection_label(c) + ": fidelity must lie in (0, 1]");
    }
  }
  adjacency_ = build_adjacency(node_count_, connections_);
  for (const auto& row : adjacency_) {
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].neighbor == row[k - 1].neighbor) {
        throw InvalidArgument(connection_label(connections_[row[k].connection]) +
                              ": parallel to connection " +
                              std::to_string(row[k - 1].connection));
      }
    }
  }
}

std::vector<std::vector<Incidence>> QuantumNetwork::build_adjacency(
    std::size_t node_count, const std::vector<EntangledConnection>& connections) {
  std::vector<std::vector<Incidence>> adjacency(node_count);
  for (const auto& c : connections) {
    adjacency[c.a].push_back({c.b, c.id});
    adjacency[c.b].push_back({c.a, c.id});
  }
  for (auto& row : adjacency) {
    std::sort(row.begin(), row.end(), [](const Incidence& x, const Incidence& y) {
      return x.neighbor != y.neighbor ? x.neighbor < y.neighbor : x.connection < y.connection;
    });
  }
  return adjacency;
}

const EntangledConnection& QuantumNetwork::connection(ConnectionId id) const {
  if (id >= connections_.size()) {
    throw InvalidArgument("unknown connection " + std::to_string(id));
  }
  return connections_[id];
}

std::span<const Incidence> QuantumNetwork::incident(NodeId v) const {
  if (!valid_node(v)) throw InvalidArgument("unknown node " + std::to_string(v));
  return adjacency_[v];
}

std::optional<ConnectionId> QuantumNetwork::find_connection(NodeId a, NodeId b) const {
  for (const auto& inc : incident(a)) {
    if (inc.neighbor == b) return inc.connection;
  }
  return std::nullopt;
}

bool QuantumNetwork::adjacency_consistent() const {
  const auto rebuilt = build_adjacency(node_count_, connections_);
  if (rebuilt.size() != adjacency_.size()) return false;
  for (std::size_t v = 0; v < rebuilt.size(); ++v) {
    if (rebuilt[v].size() != adjacency_[v].size()) return false;
    for (std::size_t k = 0; k < rebuilt[v].size(); ++k) {
      if (rebuilt[v][k].neighbor != adjacency_[v][k].neighbor ||
          rebuilt[v][k].connection != adjacency_[v][k].connection) {
        return false;
      }
    }
  }
  return true;
}

std::uint64_t hop_distance_for_level(int level) {
  if (level < 1 || level > 63) {
    throw InvalidArgument("invalid level " + std::to_string(level) + " (expected 1..63)");
  }
  return std::uint64_t{1} << (level - 1);
}

// ---------------------------------------------------------------------------
// Density matrices

namespace {

Eigen::Vector4cd bell_vector() {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(0) = s;
  v(3) = s;
  return v;
}

}  // namespace

DensityMatrix4::DensityMatrix4(const Matrix& entries) : entries_(entries) {
  if (!entries_.allFinite()) throw InvalidArgument("density matrix has non-finite entries");
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument("density matrix is not Hermitian");
  }
  const std::complex<double> trace = entries_.trace();
  if (std::abs(trace - 1.0) > 1e-12) {
    throw InvalidArgument("density matrix trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidArgument("density matrix has a negative eigenvalue");
  }
}

DensityMatrix4 DensityMatrix4::bell_state() {
  const Eigen::Vector4cd v = bell_vector();
  return DensityMatrix4(v * v.adjoint());
}

DensityMatrix4 DensityMatrix4::maximally_mixed() {
  return DensityMatrix4(Matrix::Identity() * 0.25);
}

DensityMatrix4 DensityMatrix4::werner(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("Werner parameter must lie in [0, 1]");
  const Eigen::Vector4cd v = bell_vector();
  Matrix m = p * (v * v.adjoint()) + (1.0 - p) * 0.25 * Matrix::Identity();
  return DensityMatrix4(m);
}

double bell_fidelity(const DensityMatrix4& sigma) {
  const Eigen::Vector4cd v = bell_vector();
  const std::complex<double> f = v.adjoint() * sigma.entries() * v;
  return std::clamp(f.real(), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Graph search

std::vector<std::optional<std::size_t>> hop_distances_from(const QuantumNetwork& net,
                                                           NodeId source,
                                                           const ConnectionMask& mask) {
  if (!net.valid_node(source)) {
    throw InvalidArgument("unknown node " + std::to_string(source));
  }
  if (!mask.empty() && mask.size() != net.connection_count()) {
    throw InvalidArgument("connection mask size does not match the network");
  }
  std::vector<std::optional<std::size_t>> dist(net.node_count());
  std::deque<NodeId> queue;
  dist[source] = 0;
  queue.push_back(source);
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (const auto& inc : net.incident(u)) {
      if (!mask.empty() && !mask[inc.connection]) continue;
      if (dist[inc.neighbor]) continue;
      dist[inc.neighbor] = *dist[u] + 1;
      queue.push_back(inc.neighbor);
    }
  }
  return dist;
}

std::optional<std::size_t> node_hop_distance(const QuantumNetwork& net, NodeId a, NodeId b) {
  if (!net.valid_node(b)) throw InvalidArgument("unknown node " + std::to_string(b));
  return hop_distances_from(net, a)[b];
}

std::optional<std::vector<ConnectionId>> shortest_path(const QuantumNetwork& net,
                                                       const ConnectionMask& mask,
                                                       NodeId src, NodeId dst) {
  if (!net.valid_node(src) || !net.valid_node(dst)) {
    throw InvalidArgument("shortest_path endpoints out of range");
  }
  if (mask.size() != net.connection_count()) {
    throw InvalidArgument("connection mask size does not match the network");
  }
  if (src == dst) return std::vector<ConnectionId>{};

  // Distances to dst; walking forward from src and always taking the smallest
  // neighbor one step closer yields the lexicographically smallest shortest path.
  const auto to_dst = hop_distances_from(net, dst, mask);
  if (!to_dst[src]) return std::nullopt;

  std::vector<ConnectionId> path;
  path.reserve(*to_dst[src]);
  NodeId cur = src;
  while (cur != dst) {
    const std::size_t want = *to_dst[cur] - 1;
    for (const auto& inc : net.incident(cur)) {
      if (!mask[inc.connection]) continue;
      if (to_dst[inc.neighbor] && *to_dst[inc.neighbor] == want) {
        path.push_back(inc.connection);
        cur = inc.neighbor;
        break;
      }
    }
  }
  return path;
}

QuantumNetwork generate_random_network(const RandomNetworkParams& params, std::uint64_t seed) {
  if (params.node_count < 2) throw ConfigError("node_count must be >= 2");
  if (!(params.edge_probability > 0.0 && params.edge_probability <= 1.0)) {
    throw ConfigError("edge_probability must lie in (0, 1]");
  }
  if (!(params.capacity_min >= 0.0 && params.capacity_min <= params.capacity_max) ||
      !std::isfinite(params.capacity_max)) {
    throw ConfigError("capacity range must satisfy 0 <= min <= max < inf");
  }
  if (!(params.threshold_fraction >= 0.0 && params.threshold_fraction <= 1.0)) {
    throw ConfigError("threshold_fraction must lie in [0, 1]");
  }
  if (params.level_min < 1 || params.level_min > params.level_max || params.level_max > 63) {
    throw ConfigError("level range must satisfy 1 <= min <= max <= 63");
  }
  if (!(params.fidelity > 0.0 && params.fidelity <= 1.0)) {
    throw ConfigError("fidelity must lie in (0, 1]");
  }

  Rng rng(seed);
  std::vector<EntangledConnection> connections;
  const std::size_t n = params.node_count;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double u_edge = uniform01(rng);
      const double u_cap = uniform01(rng);
      const auto level = static_cast<int>(uniform_index(
          rng, static_cast<std::uint64_t>(params.level_min),
          static_cast<std::uint64_t>(params.level_max)));
      if (u_edge >= params.edge_probability) continue;
      EntangledConnection c;
      c.id = connections.size();
      c.a = i;
      c.b = j;
      c.level = level;
      c.capacity = params.capacity_min + (params.capacity_max - params.capacity_min) * u_cap;
      c.threshold = params.threshold_fraction * c.capacity;
      c.fidelity = params.fidelity;
      connections.push_back(c);
    }
  }
  return QuantumNetwork(n, std::move(connections));
}

}  // namespace qnet
