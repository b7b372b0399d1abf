#include "qnet/failure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "qnet/error.hpp"
#include "qnet/seed.hpp"

namespace qnet {

std::size_t FailureOutcome::affected_node_count() const {
  return static_cast<std::size_t>(std::count(affected_nodes.begin(), affected_nodes.end(), true));
}

std::size_t FailureOutcome::affected_connection_count() const {
  return static_cast<std::size_t>(
      std::count(affected_connections.begin(), affected_connections.end(), true));
}

FailureOutcome FailureOutcome::none(const QuantumNetwork& net) {
  FailureOutcome out;
  out.affected_nodes.assign(net.node_count(), false);
  out.affected_connections.assign(net.connection_count(), false);
  out.surviving_connections.assign(net.connection_count(), false);
  out.post_failure_rate.assign(net.connection_count(), 0.0);
  for (const auto& c : net.connections()) {
    out.post_failure_rate[c.id] = c.capacity;
    out.surviving_connections[c.id] = c.capacity >= c.threshold;
  }
  return out;
}

double affect_probability(double distance, double radius) {
  if (!(distance >= 0.0) || !(radius >= 0.0)) {
    throw InvalidArgument("affect_probability requires distance >= 0 and radius >= 0");
  }
  if (radius == 0.0) return distance == 0.0 ? 1.0 : 0.0;
  if (distance > radius) return 0.0;
  return 1.0 - distance / radius;
}

std::optional<double> element_distance(const QuantumNetwork& net, const NetworkElement& element,
                                       NodeId center) {
  const auto dist = hop_distances_from(net, center);
  const auto as_real = [](std::optional<std::size_t> d) -> std::optional<double> {
    if (!d) return std::nullopt;
    return static_cast<double>(*d);
  };
  if (const auto* node = std::get_if<NodeElement>(&element)) {
    if (!net.valid_node(node->node)) {
      throw InvalidArgument("node " + std::to_string(node->node) + " is not in the network");
    }
    return as_real(dist[node->node]);
  }
  const auto& conn = std::get<ConnectionElement>(element);
  if (conn.connection >= net.connection_count()) {
    throw InvalidArgument("connection " + std::to_string(conn.connection) +
                          " is not in the network");
  }
  const auto& c = net.connection(conn.connection);
  const auto da = dist[c.a];
  const auto db = dist[c.b];
  if (!da && !db) return std::nullopt;
  if (!da) return as_real(db);
  if (!db) return as_real(da);
  return static_cast<double>(std::min(*da, *db));
}

std::uint64_t domain_radius_from_path(std::span<const int> levels) {
  if (levels.empty()) throw InvalidArgument("domain_radius_from_path needs at least one level");
  std::uint64_t radius = 0;
  for (int l : levels) radius += hop_distance_for_level(l);
  return radius;
}

std::vector<FailureDomain> sample_domains(const QuantumNetwork& net, std::size_t m,
                                          double radius_max, std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("sample_domains requires m >= 1");
  if (net.node_count() == 0) throw InvalidArgument("sample_domains requires a non-empty network");
  if (!(radius_max > 0.0) || !std::isfinite(radius_max)) {
    throw InvalidArgument("radius_max must be finite and > 0");
  }
  Rng rng(seed);
  std::vector<FailureDomain> domains(m);
  double weight_sum = 0.0;
  for (std::size_t f = 0; f < m; ++f) {
    auto& d = domains[f];
    d.event_index = f + 1;
    d.center = static_cast<NodeId>(uniform_index(rng, 0, net.node_count() - 1));
    d.radius = radius_max * (1.0 - uniform01(rng));
    d.event_weight = 1.0 - uniform01(rng);
    weight_sum += d.event_weight;
  }
  for (auto& d : domains) d.event_weight /= weight_sum;
  return domains;
}

std::vector<std::string> domain_diagnostics(const QuantumNetwork& net,
                                            std::span<const FailureDomain> domains) {
  std::vector<std::string> out;
  if (domains.empty()) out.emplace_back("domains: at least one failure domain is required");
  double sum = 0.0;
  for (std::size_t k = 0; k < domains.size(); ++k) {
    const auto& d = domains[k];
    if (!net.valid_node(d.center)) {
      out.push_back(fmt::format("domains[{}] (f={}): center {} is not a network node", k,
                                d.event_index, d.center));
    }
    if (!(d.radius >= 0.0) || !std::isfinite(d.radius)) {
      out.push_back(fmt::format("domains[{}] (f={}): radius must be finite and >= 0", k,
                                d.event_index));
    }
    if (!(d.event_weight >= 0.0 && d.event_weight <= 1.0)) {
      out.push_back(fmt::format("domains[{}] (f={}): weight must lie in [0, 1]", k,
                                d.event_index));
    }
    sum += d.event_weight;
  }
  if (!domains.empty() && std::abs(sum - 1.0) > 1e-9) {
    out.push_back(fmt::format("domains: weights sum to {:.12g}, expected 1", sum));
  }
  return out;
}

FailureDraws FailureDraws::sample(const QuantumNetwork& net, std::uint64_t seed) {
  Rng rng(seed);
  FailureDraws draws;
  draws.node.resize(net.node_count());
  draws.connection.resize(net.connection_count());
  for (auto& u : draws.node) u = uniform01(rng);
  for (auto& u : draws.connection) u = uniform01(rng);
  return draws;
}

FailureOutcome apply_failure(const QuantumNetwork& net, const FailureDomain& domain,
                             const FailureDraws& draws) {
  if (!net.valid_node(domain.center)) {
    throw InvalidArgument("failure domain center " + std::to_string(domain.center) +
                          " is not in the network");
  }
  if (!(domain.radius >= 0.0)) throw InvalidArgument("failure domain radius must be >= 0");
  if (draws.node.size() != net.node_count() ||
      draws.connection.size() != net.connection_count()) {
    throw InvalidArgument("failure draws do not match the network");
  }

  const auto dist = hop_distances_from(net, domain.center);
  const auto prob = [&](std::optional<std::size_t> d) {
    return d ? affect_probability(static_cast<double>(*d), domain.radius) : 0.0;
  };

  FailureOutcome out;
  out.affected_nodes.resize(net.node_count());
  for (NodeId v = 0; v < net.node_count(); ++v) {
    out.affected_nodes[v] = draws.node[v] < prob(dist[v]);
  }

  const std::size_t s = net.connection_count();
  out.affected_connections.resize(s);
  out.surviving_connections.resize(s);
  out.post_failure_rate.resize(s);
  for (const auto& c : net.connections()) {
    std::optional<std::size_t> d;
    if (dist[c.a] && dist[c.b]) {
      d = std::min(*dist[c.a], *dist[c.b]);
    } else {
      d = dist[c.a] ? dist[c.a] : dist[c.b];
    }
    const bool affected = draws.connection[c.id] < prob(d) || out.affected_nodes[c.a] ||
                          out.affected_nodes[c.b];
    out.affected_connections[c.id] = affected;
    out.post_failure_rate[c.id] = affected ? 0.0 : c.capacity;
    out.surviving_connections[c.id] = !affected && out.post_failure_rate[c.id] >= c.threshold;
  }
  return out;
}

FailureOutcome apply_failure(const QuantumNetwork& net, const FailureDomain& domain,
                             std::uint64_t seed) {
  return apply_failure(net, domain, FailureDraws::sample(net, seed));
}

}  // namespace qnet
