#include "qnet/routing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "qnet/error.hpp"
#include "qnet/seed.hpp"

namespace qnet {

namespace {

// Remaining throughput or residual demand at or below this fraction of its
// initial value counts as exhausted. Keeps fractional serving (kappa < 1)
// from iterating forever on geometrically shrinking leftovers.
constexpr double kExhaustedFraction = 1e-12;

std::vector<Demand> sorted_by_id(std::span<const Demand> demands) {
  std::vector<Demand> sorted(demands.begin(), demands.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Demand& x, const Demand& y) { return x.id < y.id; });
  return sorted;
}

double bottleneck(const ServiceState& state, const std::vector<ConnectionId>& path) {
  double b = std::numeric_limits<double>::infinity();
  for (ConnectionId e : path) b = std::min(b, state.remaining[e]);
  return b;
}

void consume(ServiceState& state, const QuantumNetwork& net,
             const std::vector<ConnectionId>& path, double amount) {
  for (ConnectionId e : path) {
    double& r = state.remaining[e];
    r -= amount;
    if (r <= kExhaustedFraction * net.connection(e).capacity) r = 0.0;
  }
}

}  // namespace

double total_accessible(std::span<const EntangledConnection> connections) {
  double total = 0.0;
  for (const auto& c : connections) total += c.capacity;
  return total;
}

std::vector<Demand> eligible_demands(std::span<const Demand> demands,
                                     const FailureOutcome& outcome) {
  std::vector<Demand> out;
  for (const auto& d : demands) {
    const bool source_ok = d.source < outcome.affected_nodes.size() &&
                           !outcome.affected_nodes[d.source];
    const bool target_ok = d.target < outcome.affected_nodes.size() &&
                           !outcome.affected_nodes[d.target];
    if (source_ok && target_ok) out.push_back(d);
  }
  return out;
}

std::vector<std::string> demand_diagnostics(const QuantumNetwork& net,
                                            std::span<const Demand> demands) {
  std::vector<std::string> out;
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < demands.size(); ++k) {
    const auto& d = demands[k];
    const auto where = fmt::format("demands[{}] (id {})", k, d.id);
    if (!seen.insert(d.id).second) out.push_back(where + ": duplicate id");
    if (!net.valid_node(d.source)) {
      out.push_back(fmt::format("{}: source {} is not a network node", where, d.source));
    }
    if (!net.valid_node(d.target)) {
      out.push_back(fmt::format("{}: target {} is not a network node", where, d.target));
    }
    if (d.source == d.target) out.push_back(where + ": source equals target");
    if (!(d.required >= 0.0) || !std::isfinite(d.required)) {
      out.push_back(where + ": required must be finite and >= 0");
    }
  }
  return out;
}

ServiceResult serve_demands_traced(const QuantumNetwork& net, const FailureOutcome& outcome,
                                   std::span<const Demand> demands, double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw ConfigError(fmt::format("kappa must lie in (0, 1], got {}", kappa));
  }
  if (outcome.surviving_connections.size() != net.connection_count() ||
      outcome.affected_nodes.size() != net.node_count()) {
    throw InvalidArgument("failure outcome does not match the network");
  }
  if (const auto problems = demand_diagnostics(net, demands); !problems.empty()) {
    throw InvalidArgument(problems.front());
  }

  const std::vector<Demand> ordered = sorted_by_id(demands);
  ServiceResult result;
  ServiceState& state = result.state;

  // Step 1: usable connections are those satisfying condition c after f.
  state.usable_mask = outcome.surviving_connections;

  // Step 2: remaining throughput starts at capacity on usable connections.
  state.remaining.assign(net.connection_count(), 0.0);
  for (const auto& c : net.connections()) {
    if (state.usable_mask[c.id]) state.remaining[c.id] = c.capacity;
  }
  state.residual.resize(ordered.size());
  for (std::size_t k = 0; k < ordered.size(); ++k) state.residual[k] = ordered[k].required;

  std::vector<bool> eligible(ordered.size(), false);
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    eligible[k] = !outcome.affected_nodes[ordered[k].source] &&
                  !outcome.affected_nodes[ordered[k].target];
  }

  std::vector<std::optional<std::vector<ConnectionId>>> first_path(ordered.size());
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    if (eligible[k]) {
      first_path[k] = shortest_path(net, state.usable_mask, ordered[k].source, ordered[k].target);
    }
  }

  std::vector<double> served(ordered.size(), 0.0);
  std::vector<bool> stuck(ordered.size(), false);

  const auto serve = [&](std::size_t k, int step, const std::vector<ConnectionId>& path,
                         double amount) {
    consume(state, net, path, amount);
    state.served_total += amount;
    served[k] += amount;
    double& residual = state.residual[k];
    residual -= amount;
    if (residual <= kExhaustedFraction * ordered[k].required) residual = 0.0;
    result.trace.push_back({ordered[k].id, step, path, amount});
  };

  // Step 3: serve along the first shortest path up to its bottleneck.
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    if (!eligible[k]) continue;
    if (!first_path[k]) {
      stuck[k] = true;
      continue;
    }
    const auto& path = *first_path[k];
    const double available = bottleneck(state, path);
    const double residual = state.residual[k];
    const double amount = residual <= available ? residual : available;
    serve(k, 3, path, amount);
  }

  // Steps 4-5: alternate paths over positive-remaining connections.
  ConnectionMask positive(net.connection_count());
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::size_t k = 0; k < ordered.size(); ++k) {
      if (!eligible[k] || stuck[k] || state.residual[k] <= 0.0) continue;
      for (ConnectionId e = 0; e < net.connection_count(); ++e) {
        positive[e] = state.usable_mask[e] && state.remaining[e] > 0.0;
      }
      const auto path = shortest_path(net, positive, ordered[k].source, ordered[k].target);
      if (!path) {
        stuck[k] = true;
        continue;
      }
      const double amount = std::min(kappa * bottleneck(state, *path), state.residual[k]);
      serve(k, 4, *path, amount);
      progressed = true;
    }
  }

  TrialRecord& rec = result.record;
  rec.served_total = state.served_total;
  rec.baseline = total_accessible(net.connections());
  rec.ratio = rec.baseline > 0.0 ? std::min(1.0, rec.served_total / rec.baseline) : 0.0;
  rec.per_demand.reserve(ordered.size());
  for (std::size_t k = 0; k < ordered.size(); ++k) {
    rec.per_demand.push_back({ordered[k].id, served[k]});
  }
  return result;
}

TrialRecord serve_demands(const QuantumNetwork& net, const FailureOutcome& outcome,
                          std::span<const Demand> demands, double kappa) {
  return serve_demands_traced(net, outcome, demands, kappa).record;
}

std::vector<TrialRecord> run_trials(const QuantumNetwork& net, std::span<const Demand> demands,
                                    std::span<const FailureDomain> domains, double kappa,
                                    std::uint64_t seed, std::size_t threads) {
  if (domains.empty()) throw InvalidArgument("run_trials requires at least one failure domain");
  if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw ConfigError(fmt::format("kappa must lie in (0, 1], got {}", kappa));
  }

  std::vector<TrialRecord> records(domains.size());
  const auto run_one = [&](std::size_t k) {
    const auto& domain = domains[k];
    const auto outcome =
        apply_failure(net, domain, derive_seed(seed, SeedPurpose::kFailure, domain.event_index));
    TrialRecord rec = serve_demands(net, outcome, demands, kappa);
    rec.event_index = domain.event_index;
    rec.event_weight = domain.event_weight;
    rec.radius = domain.radius;
    records[k] = std::move(rec);
  };

  threads = std::clamp<std::size_t>(threads, 1, domains.size());
  if (threads == 1) {
    for (std::size_t k = 0; k < domains.size(); ++k) run_one(k);
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < domains.size(); k = next++) {
        try {
          run_one(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

std::vector<Demand> generate_random_demands(const QuantumNetwork& net,
                                            const RandomDemandParams& params,
                                            std::uint64_t seed) {
  if (net.node_count() < 2) throw ConfigError("demand generation needs at least two nodes");
  if (params.users < 1) throw ConfigError("user count must be >= 1");
  if (!(params.required_min >= 0.0 && params.required_min <= params.required_max) ||
      !std::isfinite(params.required_max)) {
    throw ConfigError("required range must satisfy 0 <= min <= max < inf");
  }
  Rng rng(seed);
  std::vector<Demand> demands(params.count);
  const std::uint64_t last = net.node_count() - 1;
  for (std::size_t k = 0; k < params.count; ++k) {
    auto& d = demands[k];
    d.id = k;
    d.source = static_cast<NodeId>(uniform_index(rng, 0, last));
    // Draw the target from the other n-1 nodes.
    const auto t = static_cast<NodeId>(uniform_index(rng, 0, last - 1));
    d.target = t >= d.source ? t + 1 : t;
    d.user = k % params.users + 1;
    d.required = params.required_min + (params.required_max - params.required_min) * uniform01(rng);
  }
  return demands;
}

}  // namespace qnet
