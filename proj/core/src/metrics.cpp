#include "qnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "qnet/error.hpp"

namespace qnet {

namespace {

// Ratios within this many bin widths below a bin edge are counted in the
// upper bin, so values like 0.25 that are exact multiples of the width in
// decimal land on the edge they were meant to.
constexpr double kEdgeSlack = 1e-9;

}  // namespace

std::size_t bin_count_for(double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 1.0)) {
    throw InvalidArgument(fmt::format("bin width must lie in (0, 1], got {}", bin_width));
  }
  const double n = std::round(1.0 / bin_width);
  if (std::abs(n * bin_width - 1.0) > 1e-12) {
    throw InvalidArgument(fmt::format("bin width {} does not tile [0, 1]", bin_width));
  }
  return static_cast<std::size_t>(n);
}

std::size_t ratio_bin(double ratio, double bin_width) {
  const std::size_t n = bin_count_for(bin_width);
  if (!(ratio >= 0.0)) return 0;
  const auto k = static_cast<std::size_t>(std::floor(ratio / bin_width + kEdgeSlack));
  return std::min(k, n - 1);
}

// ---------------------------------------------------------------------------

RatioDistribution::RatioDistribution(std::vector<RatioEntry> entries, double bin_width)
    : entries_(std::move(entries)), bin_width_(bin_width), bin_count_(bin_count_for(bin_width)) {
  if (entries_.empty()) throw InvalidArgument("ratio distribution needs at least one entry");
  double sum = 0.0;
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const auto& e = entries_[k];
    if (!(e.ratio >= 0.0 && e.ratio <= 1.0)) {
      throw InvalidArgument(fmt::format("entry {}: ratio {} outside [0, 1]", k, e.ratio));
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw InvalidArgument(fmt::format("entry {}: weight must be finite and >= 0", k));
    }
    sum += e.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument(fmt::format("weights sum to {:.12g}, expected 1", sum));
  }
}

RatioDistribution RatioDistribution::from_trials(std::span<const TrialRecord> trials,
                                                 double bin_width) {
  std::vector<RatioEntry> entries;
  entries.reserve(trials.size());
  for (const auto& t : trials) entries.push_back({t.ratio, t.event_weight, t.radius});
  return RatioDistribution(std::move(entries), bin_width);
}

RatioDistribution RatioDistribution::uniform_from_trials(std::span<const TrialRecord> trials,
                                                         double bin_width) {
  std::vector<RatioEntry> entries;
  entries.reserve(trials.size());
  const double w = 1.0 / static_cast<double>(trials.size());
  for (const auto& t : trials) entries.push_back({t.ratio, w, t.radius});
  return RatioDistribution(std::move(entries), bin_width);
}

double ear(double served, double baseline) {
  if (!(baseline > 0.0)) throw InvalidArgument("accessibility ratio undefined for baseline <= 0");
  if (!(served >= 0.0 && served <= baseline)) {
    throw InvalidArgument("served throughput must lie in [0, baseline]");
  }
  return served / baseline;
}

double cdf_ear(const RatioDistribution& dist, double x) {
  double below = 0.0;
  double above = 0.0;
  for (const auto& e : dist.entries()) {
    (e.ratio < x ? below : above) += e.weight;
  }
  // Normalizing by the partition total makes the extremes exactly 0 and 1.
  const double total = below + above;
  return total > 0.0 ? below / total : 0.0;
}

double cp_ear(const RatioDistribution& dist, double x) { return 1.0 - cdf_ear(dist, x); }

double pdf_ear(const RatioDistribution& dist, double x, double bin_width) {
  const std::size_t target = ratio_bin(std::clamp(x, 0.0, 1.0), bin_width);
  double mass = 0.0;
  double total = 0.0;
  for (const auto& e : dist.entries()) {
    if (ratio_bin(e.ratio, bin_width) == target) mass += e.weight;
    total += e.weight;
  }
  return total > 0.0 ? mass / total : 0.0;
}

double pr_ear(const RatioDistribution& dist, double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw InvalidArgument(fmt::format("probability q must lie in [0, 1], got {}", q));
  }
  std::vector<RatioEntry> sorted = dist.entries();
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RatioEntry& a, const RatioEntry& b) { return a.ratio < b.ratio; });
  double total = 0.0;
  for (const auto& e : sorted) total += e.weight;

  // Walk distinct ratios; `below` is the mass strictly under the current one.
  double below = 0.0;
  std::size_t k = 0;
  while (k < sorted.size()) {
    const double x = sorted[k].ratio;
    const double cdf = total > 0.0 ? below / total : 0.0;
    if (cdf >= q) return x;
    while (k < sorted.size() && sorted[k].ratio == x) below += sorted[k++].weight;
  }
  const double largest = sorted.back().ratio;
  const double edge =
      static_cast<double>(ratio_bin(largest, dist.bin_width()) + 1) * dist.bin_width();
  return std::min(edge, 1.0);
}

double dd_ear(const RatioDistribution& dist, const RadiusBin& bin) {
  double mass = 0.0;
  double weighted = 0.0;
  for (const auto& e : dist.entries()) {
    if (!bin.contains(e.radius)) continue;
    mass += e.weight;
    weighted += e.weight * e.ratio;
  }
  if (!(mass > 0.0)) {
    throw InvalidArgument(fmt::format("radius bin [{}, {}) holds no events", bin.lo, bin.hi));
  }
  return std::clamp(weighted / mass, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

OccurrenceTable::OccurrenceTable(std::span<const double> ratios, double bin_width)
    : bin_width_(bin_width), total_(ratios.size()) {
  if (ratios.empty()) throw InvalidArgument("occurrence table needs at least one ratio");
  const std::size_t n = bin_count_for(bin_width);
  counts_.assign(n, 0);
  ratio_sums_.assign(n, 0.0);
  for (double r : ratios) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw InvalidArgument(fmt::format("ratio {} outside [0, 1]", r));
    }
    const std::size_t k = ratio_bin(r, bin_width);
    ++counts_[k];
    ratio_sums_[k] += r;
  }
}

double OccurrenceTable::coefficient(std::size_t bin) const {
  return static_cast<double>(counts_.at(bin)) / static_cast<double>(total_);
}

OccurrenceTable occurrence(std::span<const double> ratios, double bin_width) {
  return OccurrenceTable(ratios, bin_width);
}

OccurrenceTable occurrence(std::span<const TrialRecord> trials, double bin_width) {
  std::vector<double> ratios;
  ratios.reserve(trials.size());
  for (const auto& t : trials) ratios.push_back(t.ratio);
  return OccurrenceTable(ratios, bin_width);
}

std::vector<OccurrenceTable> per_domain_occurrence(std::span<const TrialRecord> trials,
                                                   double bin_width) {
  std::vector<OccurrenceTable> tables;
  tables.reserve(trials.size());
  for (const auto& t : trials) {
    const double r = t.ratio;
    tables.emplace_back(std::span<const double>(&r, 1), bin_width);
  }
  return tables;
}

double occurrence_total(std::span<const OccurrenceTable> tables, std::size_t bin) {
  double total = 0.0;
  for (const auto& t : tables) total += t.coefficient(bin);
  return total;
}

double occurrence_total_at_least(std::span<const OccurrenceTable> tables, double x) {
  double total = 0.0;
  for (const auto& t : tables) {
    const double edge = std::ceil(x / t.bin_width() - kEdgeSlack);
    const std::size_t first = edge <= 0.0 ? 0 : static_cast<std::size_t>(edge);
    for (std::size_t k = first; k < t.bin_count(); ++k) total += t.coefficient(k);
  }
  return total;
}

double sigma_from_occurrence(double q_total, std::size_t m) {
  if (m == 0) throw InvalidArgument("sigma_from_occurrence requires m >= 1");
  return q_total / static_cast<double>(m);
}

std::vector<RadiusTaggedTable> radius_tagged_occurrence(std::span<const TrialRecord> trials,
                                                        double bin_width) {
  std::vector<RadiusTaggedTable> tables;
  tables.reserve(trials.size());
  for (const auto& t : trials) {
    const double r = t.ratio;
    tables.push_back({t.radius, OccurrenceTable(std::span<const double>(&r, 1), bin_width)});
  }
  return tables;
}

double lambda_from_occurrence(std::span<const RadiusTaggedTable> tables, std::size_t m,
                              const RadiusBin& bin) {
  if (m == 0) throw InvalidArgument("lambda_from_occurrence requires m >= 1");
  if (tables.size() != m) {
    throw InvalidArgument(fmt::format("expected {} occurrence tables, got {}", m, tables.size()));
  }
  std::size_t in_bin = 0;
  std::size_t bins = 0;
  for (const auto& t : tables) {
    if (!bin.contains(t.radius)) continue;
    ++in_bin;
    bins = std::max(bins, t.table.bin_count());
  }
  if (in_bin == 0) {
    throw InvalidArgument(fmt::format("radius bin [{}, {}) holds no domains", bin.lo, bin.hi));
  }

  double lambda = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    double q_tot = 0.0;
    double ratio_sum = 0.0;
    std::size_t count = 0;
    for (const auto& t : tables) {
      if (!bin.contains(t.radius)) continue;
      q_tot += t.table.coefficient(k);
      ratio_sum += t.table.ratio_sum(k);
      count += t.table.count(k);
    }
    if (count == 0) continue;
    const double bin_ratio = ratio_sum / static_cast<double>(count);
    lambda += bin_ratio * q_tot / static_cast<double>(in_bin);
  }
  return std::clamp(lambda, 0.0, 1.0);
}

double normalized_hop_distance(std::size_t d, std::size_t d_max) {
  if (d_max == 0) throw InvalidArgument("normalized_hop_distance requires d_max >= 1");
  if (d > d_max) {
    throw InvalidArgument(fmt::format("hop distance {} exceeds maximum {}", d, d_max));
  }
  return static_cast<double>(d) / static_cast<double>(d_max);
}

}  // namespace qnet
