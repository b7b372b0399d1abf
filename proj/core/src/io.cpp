#include "qnet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "qnet/error.hpp"

namespace qnet::io {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (k) out += '\n';
    out += lines[k];
  }
  return out;
}

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", source, e.what()));
  }
}

// Field readers that append a qualified message instead of throwing.
class FieldReader {
 public:
  FieldReader(const json& object, std::string where, std::vector<std::string>& problems)
      : object_(object), where_(std::move(where)), problems_(problems) {}

  bool ok() const { return ok_; }

  std::uint64_t index(const char* key) {
    const json* v = find(key);
    if (!v) return 0;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v->get<std::int64_t>());
    }
    fail(key, "must be a non-negative integer");
    return 0;
  }

  std::int64_t integer(const char* key) {
    const json* v = find(key);
    if (!v) return 0;
    if (v->is_number_integer()) return v->get<std::int64_t>();
    fail(key, "must be an integer");
    return 0;
  }

  double number(const char* key) {
    const json* v = find(key);
    if (!v) return 0.0;
    if (v->is_number()) return v->get<double>();
    fail(key, "must be a number");
    return 0.0;
  }

 private:
  const json* find(const char* key) {
    if (!object_.is_object()) {
      if (ok_) problems_.push_back(where_ + ": expected an object");
      ok_ = false;
      return nullptr;
    }
    const auto it = object_.find(key);
    if (it == object_.end()) {
      fail(key, "is missing");
      return nullptr;
    }
    return &*it;
  }

  void fail(const char* key, const char* what) {
    problems_.push_back(fmt::format("{}: field \"{}\" {}", where_, key, what));
    ok_ = false;
  }

  const json& object_;
  std::string where_;
  std::vector<std::string>& problems_;
  bool ok_ = true;
};

struct NetworkDocument {
  std::size_t nodes = 0;
  std::vector<EntangledConnection> connections;
  std::vector<std::string> problems;
};

NetworkDocument read_network_document(std::string_view text, std::string_view source) {
  NetworkDocument doc;
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    doc.problems.push_back(fmt::format("{}: {}", source, e.what()));
    return doc;
  }
  if (!root.is_object()) {
    doc.problems.push_back(fmt::format("{}: top level must be an object", source));
    return doc;
  }
  FieldReader top(root, std::string(source), doc.problems);
  doc.nodes = top.index("nodes");
  if (!root.contains("connections") || !root["connections"].is_array()) {
    doc.problems.push_back(fmt::format("{}: field \"connections\" must be an array", source));
    return doc;
  }

  const json& list = root["connections"];
  std::set<std::uint64_t> ids;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> pairs;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const json& item = list[k];
    std::string where = fmt::format("{}: connections[{}]", source, k);
    if (item.is_object() && item.contains("id") && item["id"].is_number_integer()) {
      where += fmt::format(" (id {})", item["id"].get<std::int64_t>());
    }
    FieldReader r(item, where, doc.problems);
    EntangledConnection c;
    c.id = r.index("id");
    c.a = r.index("a");
    c.b = r.index("b");
    const std::int64_t level = r.integer("level");
    c.capacity = r.number("capacity");
    c.threshold = r.number("threshold");
    c.fidelity = r.number("fidelity");
    if (!r.ok()) continue;

    if (!ids.insert(c.id).second) doc.problems.push_back(where + ": duplicate id");
    if (c.a >= doc.nodes) {
      doc.problems.push_back(fmt::format("{}: field \"a\" = {} is not a node (nodes = {})",
                                         where, c.a, doc.nodes));
    }
    if (c.b >= doc.nodes) {
      doc.problems.push_back(fmt::format("{}: field \"b\" = {} is not a node (nodes = {})",
                                         where, c.b, doc.nodes));
    }
    if (c.a == c.b) doc.problems.push_back(where + ": endpoints a and b must differ");
    if (level < 1 || level > 63) {
      doc.problems.push_back(fmt::format("{}: field \"level\" = {} must lie in 1..63", where,
                                         level));
    }
    c.level = static_cast<int>(std::clamp<std::int64_t>(level, 1, 63));
    if (!(c.capacity >= 0.0) || !std::isfinite(c.capacity)) {
      doc.problems.push_back(where + ": field \"capacity\" must be finite and >= 0");
    }
    if (!(c.threshold >= 0.0)) {
      doc.problems.push_back(where + ": field \"threshold\" must be >= 0");
    }
    if (c.threshold > c.capacity) {
      doc.problems.push_back(fmt::format("{}: field \"threshold\" = {} exceeds capacity {}",
                                         where, c.threshold, c.capacity));
    }
    if (!(c.fidelity > 0.0 && c.fidelity <= 1.0)) {
      doc.problems.push_back(where + ": field \"fidelity\" must lie in (0, 1]");
    }
    const auto key = std::minmax(c.a, c.b);
    if (c.a != c.b) {
      const auto [it, inserted] = pairs.emplace(std::pair{key.first, key.second}, c.id);
      if (!inserted) {
        doc.problems.push_back(fmt::format("{}: parallel to connection {}", where, it->second));
      }
    }
    doc.connections.push_back(c);
  }

  if (doc.problems.empty()) {
    std::sort(doc.connections.begin(), doc.connections.end(),
              [](const EntangledConnection& x, const EntangledConnection& y) {
                return x.id < y.id;
              });
    for (std::size_t k = 0; k < doc.connections.size(); ++k) {
      if (doc.connections[k].id != k) {
        doc.problems.push_back(fmt::format(
            "{}: connection ids must be dense 0..{}; id {} is missing", source,
            doc.connections.size() - 1, k));
        break;
      }
    }
  }
  return doc;
}

}  // namespace

std::string format_number(double value) { return fmt::format("{:.12g}", value); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("{}: cannot open file", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---------------------------------------------------------------------------

std::vector<std::string> network_diagnostics(std::string_view text, std::string_view source) {
  return read_network_document(text, source).problems;
}

QuantumNetwork parse_network(std::string_view text, std::string_view source) {
  NetworkDocument doc = read_network_document(text, source);
  if (!doc.problems.empty()) throw ParseError(join(doc.problems));
  return QuantumNetwork(doc.nodes, std::move(doc.connections));
}

QuantumNetwork load_network(const std::filesystem::path& path) {
  return parse_network(read_text_file(path), path.string());
}

std::string network_to_json(const QuantumNetwork& net) {
  json root;
  root["nodes"] = net.node_count();
  json list = json::array();
  for (const auto& c : net.connections()) {
    list.push_back({{"id", c.id},
                    {"a", c.a},
                    {"b", c.b},
                    {"level", c.level},
                    {"capacity", c.capacity},
                    {"threshold", c.threshold},
                    {"fidelity", c.fidelity}});
  }
  root["connections"] = std::move(list);
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::vector<Demand> parse_demands(std::string_view text, std::string_view source) {
  const json root = parse_json(text, source);
  if (!root.is_array()) throw ParseError(fmt::format("{}: top level must be an array", source));
  std::vector<std::string> problems;
  std::vector<Demand> demands;
  for (std::size_t k = 0; k < root.size(); ++k) {
    FieldReader r(root[k], fmt::format("{}: demands[{}]", source, k), problems);
    Demand d;
    d.id = r.index("id");
    d.source = r.index("source");
    d.target = r.index("target");
    d.user = r.index("user");
    d.required = r.number("required");
    demands.push_back(d);
  }
  if (!problems.empty()) throw ParseError(join(problems));
  return demands;
}

std::vector<Demand> load_demands(const std::filesystem::path& path) {
  return parse_demands(read_text_file(path), path.string());
}

std::string demands_to_json(std::span<const Demand> demands) {
  json list = json::array();
  for (const auto& d : demands) {
    list.push_back({{"id", d.id},
                    {"source", d.source},
                    {"target", d.target},
                    {"user", d.user},
                    {"required", d.required}});
  }
  return list.dump(2) + "\n";
}

std::vector<FailureDomain> parse_domains(std::string_view text, std::string_view source) {
  const json root = parse_json(text, source);
  if (!root.is_array()) throw ParseError(fmt::format("{}: top level must be an array", source));
  std::vector<std::string> problems;
  std::vector<FailureDomain> domains;
  for (std::size_t k = 0; k < root.size(); ++k) {
    FieldReader r(root[k], fmt::format("{}: domains[{}]", source, k), problems);
    FailureDomain d;
    d.event_index = r.index("f");
    d.center = r.index("center");
    d.radius = r.number("radius");
    d.event_weight = r.number("weight");
    domains.push_back(d);
  }
  if (!problems.empty()) throw ParseError(join(problems));
  return domains;
}

std::vector<FailureDomain> load_domains(const std::filesystem::path& path) {
  return parse_domains(read_text_file(path), path.string());
}

std::string domains_to_json(std::span<const FailureDomain> domains) {
  json list = json::array();
  for (const auto& d : domains) {
    list.push_back({{"f", d.event_index},
                    {"center", d.center},
                    {"radius", d.radius},
                    {"weight", d.event_weight}});
  }
  return list.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(fmt::format("csv: missing column \"{}\"", name));
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::size_t col = column(name);
  const auto& cells = rows.at(row);
  if (col >= cells.size()) {
    throw ParseError(fmt::format("csv: row {} has no column \"{}\"", row + 2, name));
  }
  const std::string& cell = cells[col];
  // strtod accepts the "inf"/"nan" spellings fmt produces.
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw ParseError(fmt::format("csv: line {}, column \"{}\": \"{}\" is not a number",
                                 row + 2, name, cell));
  }
  return v;
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size()) {
        throw ParseError(fmt::format("{}: line {} has {} cells, header has {}", source, line_no,
                                     cells.size(), table.header.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) throw ParseError(fmt::format("{}: missing header row", source));
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text_file(path), path.string());
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials) {
  out << "f,weight,radius,ratio,served_total,baseline\n";
  for (const auto& t : trials) {
    out << t.event_index << ',' << format_number(t.event_weight) << ','
        << format_number(t.radius) << ',' << format_number(t.ratio) << ','
        << format_number(t.served_total) << ',' << format_number(t.baseline) << '\n';
  }
}

std::vector<TrialRecord> parse_trials_csv(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  std::vector<TrialRecord> trials;
  trials.reserve(table.rows.size());
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    TrialRecord t;
    const double f = table.number(k, "f");
    if (!(f >= 1.0) || f != std::floor(f)) {
      throw ParseError(fmt::format("{}: line {}: f must be a positive integer", source, k + 2));
    }
    t.event_index = static_cast<std::size_t>(f);
    t.event_weight = table.number(k, "weight");
    t.radius = table.number(k, "radius");
    t.ratio = table.number(k, "ratio");
    t.served_total = table.number(k, "served_total");
    t.baseline = table.number(k, "baseline");
    trials.push_back(t);
  }
  return trials;
}

std::vector<TrialRecord> load_trials_csv(const std::filesystem::path& path) {
  return parse_trials_csv(read_text_file(path), path.string());
}

Eigen::MatrixXd parse_covariance(const std::string& spec, std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  if (spec == "identity") return Eigen::MatrixXd::Identity(n, n);
  constexpr std::string_view kDiagonal = "diagonal:";
  if (spec.rfind(kDiagonal, 0) == 0) {
    const std::string value = spec.substr(kDiagonal.size());
    char* end = nullptr;
    const double variance = std::strtod(value.c_str(), &end);
    if (value.empty() || end != value.c_str() + value.size() || !(variance > 0.0)) {
      throw ParseError(fmt::format("covariance \"{}\": variance must be a number > 0", spec));
    }
    return variance * Eigen::MatrixXd::Identity(n, n);
  }

  std::string text = read_text_file(spec);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream lines(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::vector<double> row;
    std::string cell;
    while (cells >> cell) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size()) {
        throw ParseError(fmt::format("{}: line {}: \"{}\" is not a number", spec,
                                     rows.size() + 1, cell));
      }
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.size() != m) {
    throw ParseError(fmt::format("{}: expected {} rows, found {}", spec, m, rows.size()));
  }
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != m) {
      throw ParseError(fmt::format("{}: row {} has {} entries, expected {}", spec, i + 1,
                                   rows[i].size(), m));
    }
    for (std::size_t j = 0; j < m; ++j) {
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return cov;
}

}  // namespace qnet::io
