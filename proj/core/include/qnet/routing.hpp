#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qnet/failure.hpp"
#include "qnet/network.hpp"

namespace qnet {

/// A user's request for entanglement between two nodes (ebits/second).
struct Demand {
  std::size_t id = 0;
  NodeId source = 0;
  NodeId target = 0;
  std::size_t user = 1;
  double required = 0.0;
};

/// Mutable bookkeeping of one demand-serving run.
struct ServiceState {
  /// Remaining throughput F(E) per connection; 0 for unusable connections.
  std::vector<double> remaining;
  /// Connections usable after the failure (condition c holds).
  ConnectionMask usable_mask;
  /// Accumulated served throughput A(S*).
  double served_total = 0.0;
  /// Unserved requirement per demand, aligned with the id-sorted demand list.
  std::vector<double> residual;
};

/// One path allocation made while serving a demand.
struct ServiceStep {
  std::size_t demand_id = 0;
  /// 3 for the first shortest path, 4 for later alternate paths.
  int step = 3;
  std::vector<ConnectionId> path;
  double amount = 0.0;
};

struct DemandService {
  std::size_t demand_id = 0;
  double served = 0.0;
};

/// Outcome of one failure event.
struct TrialRecord {
  std::size_t event_index = 1;
  double event_weight = 1.0;
  double radius = 0.0;
  /// served_total / baseline, or 0 when the baseline is 0.
  double ratio = 0.0;
  double served_total = 0.0;
  double baseline = 0.0;
  std::vector<DemandService> per_demand;
};

struct ServiceResult {
  TrialRecord record;
  ServiceState state;
  std::vector<ServiceStep> trace;
};

/// Total no-failure throughput: the sum of capacities.
double total_accessible(std::span<const EntangledConnection> connections);

/// Demands whose source and target both survived the failure.
std::vector<Demand> eligible_demands(std::span<const Demand> demands,
                                     const FailureOutcome& outcome);

/// Checks endpoints, distinct endpoints, non-negative requirements and id
/// uniqueness. One message per violation.
std::vector<std::string> demand_diagnostics(const QuantumNetwork& net,
                                            std::span<const Demand> demands);

/// Greedy shortest-path demand serving over the post-failure network.
///
/// Demands are handled in ascending id order. Each eligible demand first
/// takes its shortest path over the surviving connections and is served up
/// to that path's bottleneck. Demands with a residual then repeatedly take
/// the next shortest path over connections with positive remaining
/// throughput and are served `kappa` times its bottleneck (capped at the
/// residual), round-robin, until every residual is zero or no path is left.
///
/// Throws ConfigError when kappa is outside (0, 1].
ServiceResult serve_demands_traced(const QuantumNetwork& net, const FailureOutcome& outcome,
                                   std::span<const Demand> demands, double kappa = 1.0);

TrialRecord serve_demands(const QuantumNetwork& net, const FailureOutcome& outcome,
                          std::span<const Demand> demands, double kappa = 1.0);

/// Applies every domain and serves the demands once per domain. The failure
/// draws of domain f are seeded by derive_seed(seed, kFailure, f). Results
/// are ordered by position in `domains` regardless of `threads`.
std::vector<TrialRecord> run_trials(const QuantumNetwork& net, std::span<const Demand> demands,
                                    std::span<const FailureDomain> domains, double kappa,
                                    std::uint64_t seed, std::size_t threads = 1);

struct RandomDemandParams {
  std::size_t count = 20;
  std::size_t users = 4;
  double required_min = 1.0;
  double required_max = 10.0;
};

/// Uniform random endpoint pairs (source != target) and requirements.
std::vector<Demand> generate_random_demands(const QuantumNetwork& net,
                                            const RandomDemandParams& params,
                                            std::uint64_t seed);

}  // namespace qnet
