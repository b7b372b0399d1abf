// qnet-ear: failure-domain sweeps and entanglement accessibility reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "qnet/error.hpp"
#include "qnet/experiment.hpp"
#include "qnet/io.hpp"
#include "qnet/seed.hpp"

namespace {

struct Options {
  qnet::ExperimentConfig config;
  std::string network;
  std::string demands;
  std::string domains;
  std::string trials;
};

void add_seed_and_out(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.config.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", o.config.output_dir, "Output directory")->capture_default_str();
}

void add_generator_flags(CLI::App* cmd, Options& o) {
  auto& n = o.config.network_params;
  auto& d = o.config.demand_params;
  cmd->add_option("--nodes", n.node_count, "Generated network: node count")
      ->capture_default_str();
  cmd->add_option("--edge-prob", n.edge_probability, "Generated network: edge probability")
      ->capture_default_str();
  cmd->add_option("--capacity-min", n.capacity_min)->capture_default_str();
  cmd->add_option("--capacity-max", n.capacity_max)->capture_default_str();
  cmd->add_option("--threshold-fraction", n.threshold_fraction,
                  "Threshold as a fraction of capacity")
      ->capture_default_str();
  cmd->add_option("--level-min", n.level_min)->capture_default_str();
  cmd->add_option("--level-max", n.level_max)->capture_default_str();
  cmd->add_option("--fidelity", n.fidelity)->capture_default_str();
  cmd->add_option("--demand-count", d.count, "Generated demands: count")->capture_default_str();
  cmd->add_option("--users", d.users)->capture_default_str();
  cmd->add_option("--required-min", d.required_min)->capture_default_str();
  cmd->add_option("--required-max", d.required_max)->capture_default_str();
}

void add_experiment_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--network", o.network, "Network JSON (generated when absent)");
  cmd->add_option("--demands", o.demands, "Demands JSON (generated when absent)");
  cmd->add_option("--domains", o.domains, "Failure domains JSON (sampled when absent)");
  cmd->add_option("--m", o.config.m, "Number of failure events")->capture_default_str();
  cmd->add_option("--radius-max", o.config.radius_max, "Largest domain radius in hops")
      ->capture_default_str();
  cmd->add_option("--kappa", o.config.kappa, "Fraction of the bottleneck used per extra path")
      ->capture_default_str();
  cmd->add_option("--bin-width", o.config.bin_width, "Ratio bin width")->capture_default_str();
  cmd->add_option("--radius-bins", o.config.radius_bins)->capture_default_str();
  add_seed_and_out(cmd, o);
  add_generator_flags(cmd, o);
}

void add_nsr_flags(CLI::App* cmd, Options& o) {
  auto& g = o.config.nsr_grid;
  g.delta = {0.5, 2.0, 8.0};
  cmd->add_option("--covariance", o.config.covariance,
                  "identity, diagonal:<variance> or a matrix file")
      ->capture_default_str();
  cmd->add_option("--alpha-grid", g.alpha)->delimiter(',')->capture_default_str();
  cmd->add_option("--gamma-grid", g.gamma)->delimiter(',')->capture_default_str();
  cmd->add_option("--delta-grid", g.delta)->delimiter(',')->capture_default_str();
  cmd->add_option("--omega-grid", g.omega)->delimiter(',')->capture_default_str();
  cmd->add_option("--max-iters", o.config.nsr_options.max_iters)->capture_default_str();
  cmd->add_option("--tol", o.config.nsr_options.tol)->capture_default_str();
}

void add_entropy_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--replicates", o.config.entropy_replicates,
                  "Failure draws per event for the entropy samples")
      ->capture_default_str();
  cmd->add_option("--bin-a", o.config.entropy_bin_a, "Radius bin width (0: radius_max/20)")
      ->capture_default_str();
  cmd->add_option("--bin-b", o.config.entropy_bin_b, "Occurrence bin width")
      ->capture_default_str();
}

void resolve_paths(Options& o) {
  if (!o.network.empty()) o.config.network_file = o.network;
  if (!o.demands.empty()) o.config.demands_file = o.demands;
  if (!o.domains.empty()) o.config.domains_file = o.domains;
  o.config.threads = qnet::default_thread_count();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw qnet::Error(fmt::format("{}: write failed", path.string()));
}

void report(const std::vector<std::filesystem::path>& written) {
  for (const auto& p : written) fmt::print("wrote {}\n", p.string());
}

int run_generate(const Options& o) {
  const auto& c = o.config;
  const auto net = qnet::generate_random_network(
      c.network_params, qnet::derive_seed(c.seed, qnet::SeedPurpose::kNetwork));
  const auto demands = qnet::generate_random_demands(
      net, c.demand_params, qnet::derive_seed(c.seed, qnet::SeedPurpose::kDemands));
  const auto domains = qnet::sample_domains(
      net, c.m, c.radius_max, qnet::derive_seed(c.seed, qnet::SeedPurpose::kDomains));
  std::filesystem::create_directories(c.output_dir);
  const std::vector<std::filesystem::path> written{c.output_dir / "network.json",
                                                   c.output_dir / "demands.json",
                                                   c.output_dir / "domains.json"};
  write_text(written[0], qnet::io::network_to_json(net));
  write_text(written[1], qnet::io::demands_to_json(demands));
  write_text(written[2], qnet::io::domains_to_json(domains));
  report(written);
  return 0;
}

int run_validate(const Options& o) {
  const auto problems = qnet::validate(o.config);
  for (const auto& p : problems) fmt::print("{}\n", p);
  if (problems.empty()) fmt::print("ok\n");
  return problems.empty() ? 0 : 1;
}

int run_metrics(const Options& o) {
  const auto trials = qnet::io::load_trials_csv(o.trials);
  report(qnet::write_metric_reports(trials, o.config.output_dir, o.config.bin_width,
                                    o.config.radius_max, o.config.radius_bins));
  return 0;
}

int run_estimate(const Options& o) {
  const auto trials = qnet::io::load_trials_csv(o.trials);
  const auto nsr =
      qnet::nsr_report(trials, o.config.covariance, o.config.nsr_grid, o.config.nsr_options);
  std::filesystem::create_directories(o.config.output_dir);
  const auto nsr_path = o.config.output_dir / "nsr.csv";
  const auto grid_path = o.config.output_dir / "nsr_grid.csv";
  {
    std::ofstream out(nsr_path, std::ios::binary | std::ios::trunc);
    qnet::write_nsr_csv(out, nsr);
    if (!out) throw qnet::Error(fmt::format("{}: write failed", nsr_path.string()));
  }
  {
    std::ofstream out(grid_path, std::ios::binary | std::ios::trunc);
    qnet::write_nsr_grid_csv(out, nsr);
    if (!out) throw qnet::Error(fmt::format("{}: write failed", grid_path.string()));
  }
  const auto& p = nsr.selection.params;
  fmt::print("selected alpha={:.12g} gamma={:.12g} delta={:.12g} omega={:.12g} score={:.12g}\n",
             p.alpha, p.gamma, p.delta, p.omega, nsr.selection.score);
  report({nsr_path, grid_path});
  return 0;
}

int run_entropy(const Options& o) {
  const auto inputs = qnet::prepare_inputs(o.config);
  const auto entropy = qnet::entropy_report(inputs, o.config);
  std::filesystem::create_directories(o.config.output_dir);
  const auto path = o.config.output_dir / "entropy.csv";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  qnet::write_entropy_csv(out, entropy);
  out.close();
  if (!out) throw qnet::Error(fmt::format("{}: write failed", path.string()));
  fmt::print("total entropy {:.12g}\n", entropy.total);
  report({path});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement accessibility under failure domains"};
  app.require_subcommand(1);

  Options gen, val, sim, met, est, ent;

  auto* generate = app.add_subcommand("generate", "Write a random network, demands and domains");
  generate->add_option("--m", gen.config.m, "Number of failure domains")->capture_default_str();
  generate->add_option("--radius-max", gen.config.radius_max)->capture_default_str();
  add_seed_and_out(generate, gen);
  add_generator_flags(generate, gen);

  auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
  add_experiment_flags(validate, val);

  auto* simulate = app.add_subcommand("simulate", "Run the failure sweep and write reports");
  add_experiment_flags(simulate, sim);
  simulate->add_flag("--nsr", sim.config.run_nsr, "Also fit the NSR estimator");
  simulate->add_flag("--entropy", sim.config.run_entropy, "Also write the entropy report");
  add_nsr_flags(simulate, sim);
  add_entropy_flags(simulate, sim);

  auto* metrics = app.add_subcommand("metrics", "Metric reports from an existing trials.csv");
  metrics->add_option("--trials", met.trials, "Trial CSV")->required();
  metrics->add_option("--bin-width", met.config.bin_width)->capture_default_str();
  metrics->add_option("--radius-max", met.config.radius_max)->capture_default_str();
  metrics->add_option("--radius-bins", met.config.radius_bins)->capture_default_str();
  metrics->add_option("--out", met.config.output_dir)->capture_default_str();

  auto* estimate = app.add_subcommand("estimate", "Fit the NSR estimator to trial ratios");
  estimate->add_option("--trials", est.trials, "Trial CSV (ratio column)")->required();
  estimate->add_option("--out", est.config.output_dir)->capture_default_str();
  add_nsr_flags(estimate, est);

  auto* entropy = app.add_subcommand("entropy", "Per-event entropy of the group samples");
  add_experiment_flags(entropy, ent);
  add_entropy_flags(entropy, ent);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return run_generate(gen);
    if (validate->parsed()) {
      resolve_paths(val);
      return run_validate(val);
    }
    if (simulate->parsed()) {
      resolve_paths(sim);
      report(qnet::run_experiment(sim.config).written);
      return 0;
    }
    if (metrics->parsed()) return run_metrics(met);
    if (estimate->parsed()) return run_estimate(est);
    if (entropy->parsed()) {
      resolve_paths(ent);
      ent.config.run_entropy = true;
      return run_entropy(ent);
    }
  } catch (const qnet::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
