#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "qnet/failure.hpp"
#include "qnet/network.hpp"
#include "qnet/routing.hpp"

namespace qnet::io {

/// Every float written to a report: 12 significant digits, shortest form.
std::string format_number(double value);

std::string read_text_file(const std::filesystem::path& path);

// Network files: { "nodes": N, "connections": [ { "id", "a", "b", "level",
// "capacity", "threshold", "fidelity" } ] }

/// All invariant violations in a network document, each qualified by the
/// source name and the offending field. Empty when the document loads.
std::vector<std::string> network_diagnostics(std::string_view text, std::string_view source);

QuantumNetwork parse_network(std::string_view text, std::string_view source = "network");
QuantumNetwork load_network(const std::filesystem::path& path);
std::string network_to_json(const QuantumNetwork& net);

// Demand files: [ { "id", "source", "target", "user", "required" } ]

std::vector<Demand> parse_demands(std::string_view text, std::string_view source = "demands");
std::vector<Demand> load_demands(const std::filesystem::path& path);
std::string demands_to_json(std::span<const Demand> demands);

// Domain files: [ { "f", "center", "radius", "weight" } ]

std::vector<FailureDomain> parse_domains(std::string_view text,
                                         std::string_view source = "domains");
std::vector<FailureDomain> load_domains(const std::filesystem::path& path);
std::string domains_to_json(std::span<const FailureDomain> domains);

/// Header row plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws ParseError when absent.
  std::size_t column(std::string_view name) const;
  /// Cell parsed as a double; throws ParseError naming row and column.
  double number(std::size_t row, std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, std::string_view source = "csv");
CsvTable read_csv(const std::filesystem::path& path);

/// Trial rows: f, weight, radius, ratio, served_total, baseline.
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials);
std::vector<TrialRecord> parse_trials_csv(std::string_view text,
                                          std::string_view source = "trials");
std::vector<TrialRecord> load_trials_csv(const std::filesystem::path& path);

/// Noise covariance of size m from "identity", "diagonal:<variance>", or the
/// path of a CSV/whitespace matrix file with m rows of m numbers.
Eigen::MatrixXd parse_covariance(const std::string& spec, std::size_t m);

}  // namespace qnet::io
