#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace qnet {

/// Dense node index in 0..|V|-1.
using NodeId = std::size_t;
/// Dense connection index in 0..|S|-1.
using ConnectionId = std::size_t;

/// Per-connection usability flags, indexed by ConnectionId.
using ConnectionMask = std::vector<bool>;

/// Entangled connection E between two nodes.
///
/// `capacity` is the upper throughput bound and `threshold` the critical lower
/// bound a connection must meet to count as usable (ebits/second). Fidelity
/// is carried as a scalar qualifier; no state evolution is simulated.
struct EntangledConnection {
  ConnectionId id = 0;
  NodeId a = 0;
  NodeId b = 0;
  int level = 1;
  double capacity = 0.0;
  double threshold = 0.0;
  double fidelity = 1.0;

  bool touches(NodeId v) const { return a == v || b == v; }
  NodeId other(NodeId v) const { return v == a ? b : a; }
};

/// One adjacency entry: the neighbor reached and the connection used.
struct Incidence {
  NodeId neighbor;
  ConnectionId connection;
};

/// Immutable simple undirected graph of leveled entangled connections.
///
/// Construction validates every invariant (dense ids, distinct endpoints,
/// threshold <= capacity, fidelity in (0, 1], no parallel connections) and
/// throws InvalidArgument on the first violation.
class QuantumNetwork {
 public:
  QuantumNetwork(std::size_t node_count, std::vector<EntangledConnection> connections);

  std::size_t node_count() const { return node_count_; }
  std::size_t connection_count() const { return connections_.size(); }

  const std::vector<EntangledConnection>& connections() const { return connections_; }
  const EntangledConnection& connection(ConnectionId id) const;

  /// Neighbors of `v` in ascending neighbor order.
  std::span<const Incidence> incident(NodeId v) const;

  std::optional<ConnectionId> find_connection(NodeId a, NodeId b) const;

  bool valid_node(NodeId v) const { return v < node_count_; }

  /// Rebuilds adjacency from the connection list and compares it with the
  /// stored one.
  bool adjacency_consistent() const;

 private:
  static std::vector<std::vector<Incidence>> build_adjacency(
      std::size_t node_count, const std::vector<EntangledConnection>& connections);

  std::size_t node_count_;
  std::vector<EntangledConnection> connections_;
  std::vector<std::vector<Incidence>> adjacency_;
};

/// Hop distance spanned by a level-l connection in the doubling
/// architecture: 2^(l-1). Throws InvalidArgument for l < 1 or l > 63.
std::uint64_t hop_distance_for_level(int level);

/// 4x4 two-qubit density matrix. The constructor checks hermiticity, unit
/// trace (both within 1e-12) and eigenvalues >= -1e-10.
class DensityMatrix4 {
 public:
  using Matrix = Eigen::Matrix<std::complex<double>, 4, 4>;

  explicit DensityMatrix4(const Matrix& entries);

  const Matrix& entries() const { return entries_; }

  /// |beta00><beta00| with |beta00> = (|00> + |11>)/sqrt(2).
  static DensityMatrix4 bell_state();
  static DensityMatrix4 maximally_mixed();
  /// p |beta00><beta00| + (1 - p) I/4.
  static DensityMatrix4 werner(double p);

 private:
  Matrix entries_;
};

/// <beta00| sigma |beta00>, clamped to [0, 1].
double bell_fidelity(const DensityMatrix4& sigma);

/// Minimum edge count from a to b, std::nullopt when unreachable.
std::optional<std::size_t> node_hop_distance(const QuantumNetwork& net, NodeId a, NodeId b);

/// Breadth-first hop distances from `source` over connections whose mask bit
/// is set (all connections when the mask is empty).
std::vector<std::optional<std::size_t>> hop_distances_from(const QuantumNetwork& net,
                                                           NodeId source,
                                                           const ConnectionMask& mask = {});

/// Minimum-hop path from src to dst over usable connections. Among equal-hop
/// paths the lexicographically smallest node sequence wins. Returns an empty
/// vector for src == dst and std::nullopt when dst is unreachable.
std::optional<std::vector<ConnectionId>> shortest_path(const QuantumNetwork& net,
                                                       const ConnectionMask& mask,
                                                       NodeId src, NodeId dst);

struct RandomNetworkParams {
  std::size_t node_count = 50;
  double edge_probability = 0.1;
  double capacity_min = 1.0;
  double capacity_max = 10.0;
  double threshold_fraction = 0.1;
  int level_min = 1;
  int level_max = 3;
  double fidelity = 0.95;
};

/// Erdos-Renyi G(n, p) with uniformly sampled attributes. Pairs (i, j), i < j,
/// are visited in lexicographic order, each consuming a fixed number of draws.
QuantumNetwork generate_random_network(const RandomNetworkParams& params, std::uint64_t seed);

}  // namespace qnet
