#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qnet/routing.hpp"

namespace qnet {

inline constexpr double kDefaultBinWidth = 0.05;

/// Bin count for a width that tiles [0, 1]. Throws InvalidArgument when
/// 1/bin_width is not an integer within 1e-12.
std::size_t bin_count_for(double bin_width);

/// Index of the ratio bin [k w, (k+1) w) containing `ratio`; a ratio of
/// exactly 1 falls in the last bin.
std::size_t ratio_bin(double ratio, double bin_width);

struct RatioEntry {
  double ratio = 0.0;
  double weight = 0.0;
  double radius = 0.0;
};

/// Weighted empirical distribution of accessibility ratios, one entry per
/// failure event, optionally tagged with the domain radius.
class RatioDistribution {
 public:
  explicit RatioDistribution(std::vector<RatioEntry> entries,
                             double bin_width = kDefaultBinWidth);

  /// Entries (ratio, event weight, radius) taken from trial records.
  static RatioDistribution from_trials(std::span<const TrialRecord> trials,
                                       double bin_width = kDefaultBinWidth);

  /// Same ratios and radii with every weight replaced by 1/m.
  static RatioDistribution uniform_from_trials(std::span<const TrialRecord> trials,
                                               double bin_width = kDefaultBinWidth);

  const std::vector<RatioEntry>& entries() const { return entries_; }
  double bin_width() const { return bin_width_; }
  std::size_t bin_count() const { return bin_count_; }

 private:
  std::vector<RatioEntry> entries_;
  double bin_width_;
  std::size_t bin_count_;
};

/// served / baseline. Throws InvalidArgument when baseline <= 0 or served is
/// outside [0, baseline].
double ear(double served, double baseline);

/// Probability mass of events with ratio strictly below x.
double cdf_ear(const RatioDistribution& dist, double x);

/// Probability mass of events with ratio at least x; always 1 - cdf_ear.
double cp_ear(const RatioDistribution& dist, double x);

/// Probability mass in the ratio bin of width `bin_width` containing x.
double pdf_ear(const RatioDistribution& dist, double x, double bin_width);

/// Smallest observed ratio whose strict CDF reaches q. When only the full
/// mass satisfies q, the answer is the bin boundary strictly above the
/// largest ratio (clamped to 1). Throws InvalidArgument for q outside [0, 1].
double pr_ear(const RatioDistribution& dist, double q);

/// Half-open radius interval [lo, hi); `include_upper` closes it.
struct RadiusBin {
  double lo = 0.0;
  double hi = 0.0;
  bool include_upper = false;

  bool contains(double r) const { return r >= lo && (r < hi || (include_upper && r == hi)); }
};

/// Expected ratio over the events whose radius lies in `bin`, with event
/// weights renormalized inside the bin. Throws InvalidArgument when the bin
/// holds no weight.
double dd_ear(const RatioDistribution& dist, const RadiusBin& bin);

/// Occurrence counts of ratio bins over a set of trials.
class OccurrenceTable {
 public:
  OccurrenceTable(std::span<const double> ratios, double bin_width);

  double bin_width() const { return bin_width_; }
  std::size_t bin_count() const { return counts_.size(); }
  std::size_t total() const { return total_; }
  std::size_t count(std::size_t bin) const { return counts_.at(bin); }
  /// Q(bin) = count / total.
  double coefficient(std::size_t bin) const;
  /// Sum of the observed ratios that fell in `bin`.
  double ratio_sum(std::size_t bin) const { return ratio_sums_.at(bin); }

 private:
  double bin_width_;
  std::size_t total_;
  std::vector<std::size_t> counts_;
  std::vector<double> ratio_sums_;
};

OccurrenceTable occurrence(std::span<const double> ratios, double bin_width = kDefaultBinWidth);
OccurrenceTable occurrence(std::span<const TrialRecord> trials,
                           double bin_width = kDefaultBinWidth);

/// One single-observation table per trial: Q^(f) for every failure domain f.
std::vector<OccurrenceTable> per_domain_occurrence(std::span<const TrialRecord> trials,
                                                   double bin_width = kDefaultBinWidth);

/// Q^tot(bin): sum over domains of each domain's coefficient for `bin`.
double occurrence_total(std::span<const OccurrenceTable> tables, std::size_t bin);

/// Sum over domains of the coefficients of every bin whose lower edge is at
/// least x, i.e. Q^tot restricted to ratios >= x at bin resolution.
double occurrence_total_at_least(std::span<const OccurrenceTable> tables, double x);

/// q_total / m. Throws InvalidArgument for m = 0.
double sigma_from_occurrence(double q_total, std::size_t m);

struct RadiusTaggedTable {
  double radius = 0.0;
  OccurrenceTable table;
};

std::vector<RadiusTaggedTable> radius_tagged_occurrence(std::span<const TrialRecord> trials,
                                                        double bin_width = kDefaultBinWidth);

/// Radius-conditional mean ratio rebuilt from occurrence tables: for each
/// ratio bin, the bin's mean observed ratio times Q~^tot(bin, r) over the
/// number of domains inside `bin`. `m` must equal tables.size().
double lambda_from_occurrence(std::span<const RadiusTaggedTable> tables, std::size_t m,
                              const RadiusBin& bin);

/// d / d_max. Throws InvalidArgument when d > d_max or d_max = 0.
double normalized_hop_distance(std::size_t d, std::size_t d_max);

}  // namespace qnet
