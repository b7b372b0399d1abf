#include "qnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "qnet/error.hpp"
#include "qnet/io.hpp"
#include "qnet/seed.hpp"

namespace qnet {

using io::format_number;

namespace {

void check_grid(const std::vector<double>& values, const char* name, bool positive,
                std::vector<std::string>& out) {
  if (values.empty()) out.push_back(fmt::format("NSR grid {} is empty", name));
  for (double v : values) {
    if (!std::isfinite(v) || (positive && !(v > 0.0))) {
      out.push_back(fmt::format("NSR grid {} value {} must be {}", name, v,
                                positive ? "finite and > 0" : "finite"));
    }
  }
}

std::ofstream open_report(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("{}: cannot open for writing", path.string()));
  return out;
}

void close_report(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error(fmt::format("{}: write failed", path.string()));
}

template <typename Writer>
std::filesystem::path write_report(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out = open_report(path);
  writer(out);
  close_report(out, path);
  return path;
}

}  // namespace

std::size_t default_thread_count() {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QNET_EAR_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) {
      threads = std::min(threads, static_cast<std::size_t>(cap));
    }
  }
  return threads;
}

std::vector<std::string> validate(const ExperimentConfig& config) {
  std::vector<std::string> out;
  if (config.m < 1) out.push_back("m must be >= 1");
  if (!(config.radius_max > 0.0) || !std::isfinite(config.radius_max)) {
    out.push_back(fmt::format("radius_max = {} must be finite and > 0", config.radius_max));
  }
  if (!(config.kappa > 0.0 && config.kappa <= 1.0)) {
    out.push_back(fmt::format("kappa = {} must lie in (0, 1]", config.kappa));
  }
  if (!(config.bin_width > 0.0 && config.bin_width <= 1.0)) {
    out.push_back(fmt::format("bin_width = {} must lie in (0, 1]", config.bin_width));
  } else {
    try {
      bin_count_for(config.bin_width);
    } catch (const Error& e) {
      out.push_back(fmt::format("bin_width: {}", e.what()));
    }
  }
  if (config.threads < 1) out.push_back("threads must be >= 1");
  if (config.radius_bins < 1) out.push_back("radius_bins must be >= 1");

  if (config.run_nsr) {
    check_grid(config.nsr_grid.alpha, "alpha", false, out);
    check_grid(config.nsr_grid.gamma, "gamma", false, out);
    check_grid(config.nsr_grid.delta, "delta", true, out);
    check_grid(config.nsr_grid.omega, "omega", true, out);
    if (config.nsr_options.max_iters < 1) out.push_back("NSR max_iters must be >= 1");
    try {
      io::parse_covariance(config.covariance, std::max<std::size_t>(config.m, 1));
    } catch (const Error& e) {
      out.push_back(fmt::format("covariance: {}", e.what()));
    }
  }
  if (config.run_entropy) {
    if (config.entropy_replicates < 2) out.push_back("entropy replicates must be >= 2");
    if (config.entropy_bin_a < 0.0 || !std::isfinite(config.entropy_bin_a)) {
      out.push_back("entropy bin width a must be >= 0 (0 selects radius_max / 20)");
    }
    if (!(config.entropy_bin_b > 0.0)) out.push_back("entropy bin width b must be > 0");
  }

  std::optional<QuantumNetwork> net;
  if (config.network_file) {
    const std::string name = config.network_file->string();
    try {
      const std::string text = io::read_text_file(*config.network_file);
      auto problems = io::network_diagnostics(text, name);
      if (problems.empty()) {
        net = io::parse_network(text, name);
      } else {
        out.insert(out.end(), problems.begin(), problems.end());
      }
    } catch (const Error& e) {
      out.push_back(e.what());
    }
  } else {
    try {
      net = generate_random_network(config.network_params,
                                    derive_seed(config.seed, SeedPurpose::kNetwork));
    } catch (const Error& e) {
      out.push_back(fmt::format("network generator: {}", e.what()));
    }
  }

  if (config.demands_file) {
    try {
      const auto demands = io::load_demands(*config.demands_file);
      if (net) {
        for (auto& p : demand_diagnostics(*net, demands)) {
          out.push_back(fmt::format("{}: {}", config.demands_file->string(), p));
        }
      }
    } catch (const Error& e) {
      out.push_back(e.what());
    }
  } else {
    const auto& d = config.demand_params;
    if (d.users < 1) out.push_back("demand generator: users must be >= 1");
    if (!(d.required_min >= 0.0) || !(d.required_max >= d.required_min)) {
      out.push_back("demand generator: need 0 <= required_min <= required_max");
    }
    if (net && d.count > 0 && net->node_count() < 2) {
      out.push_back("demand generator: network needs at least two nodes");
    }
  }

  if (config.domains_file) {
    try {
      const auto domains = io::load_domains(*config.domains_file);
      if (domains.empty()) out.push_back(config.domains_file->string() + ": no domains");
      if (net) {
        for (auto& p : domain_diagnostics(*net, domains)) {
          out.push_back(fmt::format("{}: {}", config.domains_file->string(), p));
        }
      }
    } catch (const Error& e) {
      out.push_back(e.what());
    }
  } else if (net && net->node_count() == 0) {
    out.push_back("domain sampling needs a network with at least one node");
  }
  return out;
}

ExperimentInputs prepare_inputs(const ExperimentConfig& config) {
  const auto problems = validate(config);
  if (!problems.empty()) {
    std::string joined;
    for (const auto& p : problems) joined += (joined.empty() ? "" : "\n") + p;
    // File problems are parse errors; anything else is a config problem.
    if (config.network_file || config.demands_file || config.domains_file) {
      for (const auto& p : problems) {
        const bool from_file =
            (config.network_file && p.rfind(config.network_file->string(), 0) == 0) ||
            (config.demands_file && p.rfind(config.demands_file->string(), 0) == 0) ||
            (config.domains_file && p.rfind(config.domains_file->string(), 0) == 0);
        if (from_file) throw ParseError(joined);
      }
    }
    throw ConfigError(joined);
  }

  QuantumNetwork net = config.network_file
                           ? io::load_network(*config.network_file)
                           : generate_random_network(
                                 config.network_params,
                                 derive_seed(config.seed, SeedPurpose::kNetwork));
  std::vector<Demand> demands =
      config.demands_file
          ? io::load_demands(*config.demands_file)
          : generate_random_demands(net, config.demand_params,
                                    derive_seed(config.seed, SeedPurpose::kDemands));
  std::vector<FailureDomain> domains =
      config.domains_file ? io::load_domains(*config.domains_file)
                          : sample_domains(net, config.m, config.radius_max,
                                           derive_seed(config.seed, SeedPurpose::kDomains));
  return {std::move(net), std::move(demands), std::move(domains)};
}

// ---------------------------------------------------------------------------

std::vector<SweepRow> metric_sweep(std::span<const TrialRecord> trials, double bin_width) {
  if (trials.empty()) throw InvalidArgument("metric sweep needs at least one trial");
  const std::size_t n = bin_count_for(bin_width);
  const RatioDistribution dist = RatioDistribution::from_trials(trials, bin_width);
  const auto tables = per_domain_occurrence(trials, bin_width);

  std::vector<SweepRow> rows;
  rows.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    SweepRow row;
    row.x = k == n ? 1.0 : static_cast<double>(k) * bin_width;
    row.cp_ear = cp_ear(dist, row.x);
    row.cdf_ear = cdf_ear(dist, row.x);
    row.pr_ear = pr_ear(dist, row.x);
    row.sigma_occurrence =
        sigma_from_occurrence(occurrence_total_at_least(tables, row.x), trials.size());
    rows.push_back(row);
  }
  return rows;
}

std::vector<RadiusRow> radius_sweep(std::span<const TrialRecord> trials, double radius_max,
                                    std::size_t bins, double bin_width) {
  if (trials.empty()) throw InvalidArgument("radius sweep needs at least one trial");
  if (bins < 1) throw InvalidArgument("radius sweep needs at least one bin");
  double top = radius_max;
  for (const auto& t : trials) top = std::max(top, t.radius);
  if (!(top > 0.0)) throw InvalidArgument("radius sweep needs a positive radius range");

  const RatioDistribution dist = RatioDistribution::from_trials(trials, bin_width);
  const auto tagged = radius_tagged_occurrence(trials, bin_width);
  const double width = top / static_cast<double>(bins);

  std::vector<RadiusRow> rows;
  for (std::size_t k = 0; k < bins; ++k) {
    RadiusBin bin{static_cast<double>(k) * width,
                  k + 1 == bins ? top : static_cast<double>(k + 1) * width, k + 1 == bins};
    std::size_t count = 0;
    double weight = 0.0;
    for (const auto& t : trials) {
      if (bin.contains(t.radius)) {
        ++count;
        weight += t.event_weight;
      }
    }
    if (count == 0 || !(weight > 0.0)) continue;
    RadiusRow row;
    row.radius_lo = bin.lo;
    row.radius_hi = bin.hi;
    row.normalized_distance = static_cast<double>(k + 1) / static_cast<double>(bins);
    row.count = count;
    row.dd_ear = dd_ear(dist, bin);
    row.lambda = lambda_from_occurrence(tagged, trials.size(), bin);
    rows.push_back(row);
  }
  return rows;
}

std::vector<OccurrenceRow> occurrence_rows(std::span<const TrialRecord> trials,
                                           double bin_width) {
  const OccurrenceTable table = occurrence(trials, bin_width);
  const auto tables = per_domain_occurrence(trials, bin_width);
  std::vector<OccurrenceRow> rows;
  for (std::size_t k = 0; k < table.bin_count(); ++k) {
    OccurrenceRow row;
    row.bin = k;
    row.lo = static_cast<double>(k) * bin_width;
    row.hi = k + 1 == table.bin_count() ? 1.0 : static_cast<double>(k + 1) * bin_width;
    row.count = table.count(k);
    row.coefficient = table.total() ? table.coefficient(k) : 0.0;
    row.q_total = occurrence_total(tables, k);
    rows.push_back(row);
  }
  return rows;
}

EntropyReport entropy_report(const ExperimentInputs& inputs, const ExperimentConfig& config) {
  const std::size_t replicates = config.entropy_replicates;
  if (replicates < 2) throw ConfigError("entropy needs at least two replicates per event");
  const se2::BinWidths bins{
      config.entropy_bin_a > 0.0 ? config.entropy_bin_a : config.radius_max / 20.0,
      config.entropy_bin_b};

  std::vector<double> values;
  EntropyReport report;
  for (const auto& domain : inputs.domains) {
    std::vector<double> ratios;
    ratios.reserve(replicates);
    for (std::size_t k = 0; k < replicates; ++k) {
      const auto draws = FailureDraws::sample(
          inputs.network, derive_seed(config.seed, SeedPurpose::kReplicate,
                                      domain.event_index, k));
      const auto outcome = apply_failure(inputs.network, domain, draws);
      ratios.push_back(serve_demands(inputs.network, outcome, inputs.demands, config.kappa).ratio);
    }
    const OccurrenceTable table = occurrence(ratios, config.bin_width);
    std::vector<se2::Element> elements;
    elements.reserve(replicates);
    for (double r : ratios) {
      elements.push_back(
          se2::group_function(domain.radius, table.coefficient(ratio_bin(r, config.bin_width))));
    }
    const auto est = se2::entropy_rate(se2::GroupSampleSet::uniform(std::move(elements)), bins);
    values.push_back(est.value);
    report.rows.push_back({domain.event_index, est.value, 0.0, est.degenerate});
  }
  if (values.size() >= 2) {
    for (std::size_t f = 1; f <= values.size(); ++f) {
      report.rows[f - 1].derivative = se2::entropy_rate_derivative(values, f);
    }
  }
  report.total = se2::entropy_rate_total(values);
  return report;
}

NsrReport nsr_report(std::span<const TrialRecord> trials, const std::string& covariance,
                     const NsrGrid& grid, const NsrOptions& options) {
  if (trials.empty()) throw InvalidArgument("NSR needs at least one observation");
  NsrReport report;
  report.observations.resize(static_cast<Eigen::Index>(trials.size()));
  for (std::size_t k = 0; k < trials.size(); ++k) {
    report.observations(static_cast<Eigen::Index>(k)) = trials[k].ratio;
  }
  const Eigen::MatrixXd cov = io::parse_covariance(covariance, trials.size());
  report.selection = select_hyperparameters(report.observations, cov, grid, options);
  report.fitted =
      forward_model(report.selection.estimate.q_estimate, report.selection.params.delta);
  return report;
}

// ---------------------------------------------------------------------------

void write_metrics_csv(std::ostream& out, std::span<const TrialRecord> trials,
                       double bin_width) {
  const auto sweep = metric_sweep(trials, bin_width);
  const RatioDistribution dist = RatioDistribution::from_trials(trials, bin_width);
  out << "metric,parameter,value\n";
  auto row = [&](const char* metric, double parameter, double value) {
    out << metric << ',' << format_number(parameter) << ',' << format_number(value) << '\n';
  };
  for (const auto& s : sweep) row("cp_ear", s.x, s.cp_ear);
  for (const auto& s : sweep) row("cdf_ear", s.x, s.cdf_ear);
  for (std::size_t k = 0; k + 1 < sweep.size(); ++k) {
    row("pdf_ear", sweep[k].x, pdf_ear(dist, sweep[k].x, bin_width));
  }
  for (const auto& s : sweep) row("pr_ear", s.x, s.pr_ear);
  for (const auto& s : sweep) row("sigma_occurrence", s.x, s.sigma_occurrence);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "x,cp_ear,cdf_ear,pr_ear,sigma_occurrence\n";
  for (const auto& r : rows) {
    out << format_number(r.x) << ',' << format_number(r.cp_ear) << ','
        << format_number(r.cdf_ear) << ',' << format_number(r.pr_ear) << ','
        << format_number(r.sigma_occurrence) << '\n';
  }
}

void write_radius_csv(std::ostream& out, std::span<const RadiusRow> rows) {
  out << "radius_lo,radius_hi,normalized_distance,count,dd_ear,lambda\n";
  for (const auto& r : rows) {
    out << format_number(r.radius_lo) << ',' << format_number(r.radius_hi) << ','
        << format_number(r.normalized_distance) << ',' << r.count << ','
        << format_number(r.dd_ear) << ',' << format_number(r.lambda) << '\n';
  }
}

void write_occurrence_csv(std::ostream& out, std::span<const OccurrenceRow> rows) {
  out << "bin,lo,hi,count,coefficient,q_total\n";
  for (const auto& r : rows) {
    out << r.bin << ',' << format_number(r.lo) << ',' << format_number(r.hi) << ',' << r.count
        << ',' << format_number(r.coefficient) << ',' << format_number(r.q_total) << '\n';
  }
}

void write_entropy_csv(std::ostream& out, const EntropyReport& report) {
  out << "f,entropy,derivative\n";
  for (const auto& r : report.rows) {
    out << r.event_index << ',' << format_number(r.entropy) << ','
        << format_number(r.derivative) << '\n';
  }
  out << "total," << format_number(report.total) << ",\n";
}

void write_nsr_csv(std::ostream& out, const NsrReport& report) {
  out << "f,observation,q_estimate,fitted\n";
  const auto& q = report.selection.estimate.q_estimate;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    out << k + 1 << ',' << format_number(report.observations(k)) << ','
        << format_number(q(k)) << ',' << format_number(report.fitted(k)) << '\n';
  }
}

void write_nsr_grid_csv(std::ostream& out, const NsrReport& report) {
  out << "alpha,gamma,delta,omega,score,objective,selected\n";
  bool marked = false;
  for (const auto& e : report.selection.evaluated) {
    const bool selected = !marked && e.params.alpha == report.selection.params.alpha &&
                          e.params.gamma == report.selection.params.gamma &&
                          e.params.delta == report.selection.params.delta &&
                          e.params.omega == report.selection.params.omega;
    marked = marked || selected;
    out << format_number(e.params.alpha) << ',' << format_number(e.params.gamma) << ','
        << format_number(e.params.delta) << ',' << format_number(e.params.omega) << ','
        << format_number(e.score) << ',' << format_number(e.objective) << ','
        << (selected ? 1 : 0) << '\n';
  }
}

std::vector<std::filesystem::path> write_metric_reports(std::span<const TrialRecord> trials,
                                                        const std::filesystem::path& dir,
                                                        double bin_width, double radius_max,
                                                        std::size_t radius_bins) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  written.push_back(write_report(dir / "metrics.csv", [&](std::ostream& out) {
    write_metrics_csv(out, trials, bin_width);
  }));
  const auto sweep = metric_sweep(trials, bin_width);
  written.push_back(
      write_report(dir / "sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, sweep); }));
  const auto radius = radius_sweep(trials, radius_max, radius_bins, bin_width);
  written.push_back(write_report(dir / "dd_ear.csv",
                                 [&](std::ostream& out) { write_radius_csv(out, radius); }));
  const auto occ = occurrence_rows(trials, bin_width);
  written.push_back(write_report(dir / "occurrence.csv",
                                 [&](std::ostream& out) { write_occurrence_csv(out, occ); }));
  return written;
}

ReportBundle run_experiment(const ExperimentConfig& config) {
  const ExperimentInputs inputs = prepare_inputs(config);
  ReportBundle bundle;
  bundle.trials = run_trials(inputs.network, inputs.demands, inputs.domains, config.kappa,
                             config.seed, config.threads);

  std::filesystem::create_directories(config.output_dir);
  bundle.written.push_back(write_report(config.output_dir / "trials.csv", [&](std::ostream& out) {
    io::write_trials_csv(out, bundle.trials);
  }));
  auto metric_paths = write_metric_reports(bundle.trials, config.output_dir, config.bin_width,
                                           config.radius_max, config.radius_bins);
  bundle.written.insert(bundle.written.end(), metric_paths.begin(), metric_paths.end());

  if (config.run_nsr) {
    const NsrReport nsr =
        nsr_report(bundle.trials, config.covariance, config.nsr_grid, config.nsr_options);
    bundle.written.push_back(write_report(config.output_dir / "nsr.csv",
                                          [&](std::ostream& out) { write_nsr_csv(out, nsr); }));
    bundle.written.push_back(write_report(
        config.output_dir / "nsr_grid.csv", [&](std::ostream& out) { write_nsr_grid_csv(out, nsr); }));
  }
  if (config.run_entropy) {
    const EntropyReport entropy = entropy_report(inputs, config);
    bundle.written.push_back(write_report(
        config.output_dir / "entropy.csv", [&](std::ostream& out) { write_entropy_csv(out, entropy); }));
  }
  return bundle;
}

}  // namespace qnet
