#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnet/estimation.hpp"
#include "qnet/failure.hpp"
#include "qnet/liegroup.hpp"
#include "qnet/metrics.hpp"
#include "qnet/network.hpp"
#include "qnet/routing.hpp"

namespace qnet {

/// Everything needed to replay one failure sweep.
///
/// Without a network file, the network is generated from `network_params`
/// with derive_seed(seed, kNetwork). Demands and domains likewise fall back
/// to generated ones (kDemands, kDomains). Trial f uses
/// derive_seed(seed, kFailure, f) and entropy replicate k of event f uses
/// derive_seed(seed, kReplicate, f, k).
struct ExperimentConfig {
  std::optional<std::filesystem::path> network_file;
  RandomNetworkParams network_params;
  std::optional<std::filesystem::path> demands_file;
  RandomDemandParams demand_params;
  std::optional<std::filesystem::path> domains_file;

  std::size_t m = 100;
  double radius_max = 8.0;
  double kappa = 1.0;
  double bin_width = kDefaultBinWidth;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  std::size_t threads = 1;
  std::size_t radius_bins = 20;

  bool run_nsr = false;
  NsrGrid nsr_grid;
  std::string covariance = "identity";
  NsrOptions nsr_options;

  bool run_entropy = false;
  std::size_t entropy_replicates = 20;
  /// Zero means radius_max / 20.
  double entropy_bin_a = 0.0;
  double entropy_bin_b = kDefaultBinWidth;
};

/// Every problem with the config and the files it names, without running
/// anything. Unreadable or malformed files become entries, not exceptions.
std::vector<std::string> validate(const ExperimentConfig& config);

struct ExperimentInputs {
  QuantumNetwork network;
  std::vector<Demand> demands;
  std::vector<FailureDomain> domains;
};

/// Loads or generates network, demands and domains. Throws ParseError for
/// malformed files and ConfigError for an infeasible config.
ExperimentInputs prepare_inputs(const ExperimentConfig& config);

struct SweepRow {
  double x = 0.0;
  double cp_ear = 0.0;
  double cdf_ear = 0.0;
  double pr_ear = 0.0;
  double sigma_occurrence = 0.0;
};

/// x = 0, w, 2w, ..., 1 with the complementary CDF under event weights, the
/// CDF, the quantile at q = x and the occurrence-count estimate of cp_ear.
std::vector<SweepRow> metric_sweep(std::span<const TrialRecord> trials, double bin_width);

struct RadiusRow {
  double radius_lo = 0.0;
  double radius_hi = 0.0;
  double normalized_distance = 0.0;
  std::size_t count = 0;
  double dd_ear = 0.0;
  double lambda = 0.0;
};

/// Equal-width radius bins over [0, radius_max], the last closed. Empty bins
/// are skipped.
std::vector<RadiusRow> radius_sweep(std::span<const TrialRecord> trials, double radius_max,
                                    std::size_t bins, double bin_width);

struct OccurrenceRow {
  std::size_t bin = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double coefficient = 0.0;
  double q_total = 0.0;
};

std::vector<OccurrenceRow> occurrence_rows(std::span<const TrialRecord> trials,
                                           double bin_width);

struct EntropyRow {
  std::size_t event_index = 1;
  double entropy = 0.0;
  double derivative = 0.0;
  bool degenerate = false;
};

struct EntropyReport {
  std::vector<EntropyRow> rows;
  double total = 0.0;
};

/// Per-event entropy of the group samples (radius, Q) where Q is the
/// occurrence coefficient of each replicate's ratio bin among the event's
/// replicates.
EntropyReport entropy_report(const ExperimentInputs& inputs, const ExperimentConfig& config);

struct NsrReport {
  HyperparameterSelection selection;
  Eigen::VectorXd observations;
  Eigen::VectorXd fitted;
};

NsrReport nsr_report(std::span<const TrialRecord> trials, const std::string& covariance,
                     const NsrGrid& grid, const NsrOptions& options);

void write_metrics_csv(std::ostream& out, std::span<const TrialRecord> trials,
                       double bin_width);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_radius_csv(std::ostream& out, std::span<const RadiusRow> rows);
void write_occurrence_csv(std::ostream& out, std::span<const OccurrenceRow> rows);
void write_entropy_csv(std::ostream& out, const EntropyReport& report);
void write_nsr_csv(std::ostream& out, const NsrReport& report);
void write_nsr_grid_csv(std::ostream& out, const NsrReport& report);

struct ReportBundle {
  std::vector<TrialRecord> trials;
  std::vector<std::filesystem::path> written;
};

/// Runs the sweep and writes trials.csv, metrics.csv, sweep.csv,
/// dd_ear.csv, occurrence.csv and, when enabled, nsr.csv, nsr_grid.csv and
/// entropy.csv into the output directory.
ReportBundle run_experiment(const ExperimentConfig& config);

/// Writes the metric reports (metrics, sweep, dd_ear, occurrence) for
/// existing trials. Returns the written paths.
std::vector<std::filesystem::path> write_metric_reports(std::span<const TrialRecord> trials,
                                                        const std::filesystem::path& dir,
                                                        double bin_width, double radius_max,
                                                        std::size_t radius_bins);

/// Trial concurrency: hardware threads, capped by QNET_EAR_THREADS when set
/// to a positive integer.
std::size_t default_thread_count();

}  // namespace qnet
