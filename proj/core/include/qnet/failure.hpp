#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qnet/network.hpp"

namespace qnet {

/// One complex failure event f: a node-anchored center, a radius in hop
/// units and the event probability Pr(f).
struct FailureDomain {
  std::size_t event_index = 1;  // f, 1-based
  NodeId center = 0;
  double radius = 0.0;
  double event_weight = 1.0;
};

/// Affected and surviving elements after applying one failure domain.
struct FailureOutcome {
  std::vector<bool> affected_nodes;
  std::vector<bool> affected_connections;
  /// Connections that meet their throughput threshold after the failure (S*).
  std::vector<bool> surviving_connections;
  /// Post-failure throughput: 0 for affected connections, capacity otherwise.
  std::vector<double> post_failure_rate;

  std::size_t affected_node_count() const;
  std::size_t affected_connection_count() const;

  /// Outcome in which nothing failed.
  static FailureOutcome none(const QuantumNetwork& net);
};

/// Linear affect probability 1 - d/r for d <= r, else 0. A zero radius
/// affects only distance 0. Throws InvalidArgument for negative inputs.
double affect_probability(double distance, double radius);

struct NodeElement {
  NodeId node;
};
struct ConnectionElement {
  ConnectionId connection;
};
using NetworkElement = std::variant<NodeElement, ConnectionElement>;

/// Hop distance of a node from `center`; for a connection, the minimum of its
/// endpoints' distances. std::nullopt when unreachable.
std::optional<double> element_distance(const QuantumNetwork& net, const NetworkElement& element,
                                       NodeId center);

/// Radius implied by a shortest path through the domain: sum of 2^(l-1) over
/// the path's connection levels.
std::uint64_t domain_radius_from_path(std::span<const int> levels);

/// m domains with uniform centers, radii uniform in (0, radius_max] and
/// weights uniform in (0, 1] normalized to sum 1.
std::vector<FailureDomain> sample_domains(const QuantumNetwork& net, std::size_t m,
                                          double radius_max, std::uint64_t seed);

/// Checks each domain against the network and the weight-sum invariant.
/// Returns one message per violation.
std::vector<std::string> domain_diagnostics(const QuantumNetwork& net,
                                            std::span<const FailureDomain> domains);

/// Per-element uniform draws shared across radii. Elements are affected when
/// their draw falls below the affect probability, so for fixed draws a larger
/// radius can only grow the affected set.
struct FailureDraws {
  std::vector<double> node;
  std::vector<double> connection;

  static FailureDraws sample(const QuantumNetwork& net, std::uint64_t seed);
};

FailureOutcome apply_failure(const QuantumNetwork& net, const FailureDomain& domain,
                             const FailureDraws& draws);

/// Independent Bernoulli marking of every node and connection, seeded.
FailureOutcome apply_failure(const QuantumNetwork& net, const FailureDomain& domain,
                             std::uint64_t seed);

}  // namespace qnet
