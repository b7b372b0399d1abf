#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qnet/error.hpp"
#include "qnet/io.hpp"

using namespace qnet;

namespace {

bool mentions(const std::vector<std::string>& lines, std::string_view needle) {
  for (const auto& l : lines) {
    if (l.find(needle) != std::string::npos) return true;
  }
  return false;
}

// Half a unit in the twelfth significant digit.
double print_tolerance(double v) { return 5e-12 * std::max(1.0, std::abs(v)); }

}  // namespace

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(io::format_number(0.375), "0.375");
  EXPECT_EQ(io::format_number(1.0), "1");
  EXPECT_EQ(io::format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(io::format_number(8.0 / 14.0), "0.571428571429");
}

TEST(NetworkJson, RoundTrip) {
  const auto net = generate_random_network({20, 0.3, 1.0, 10.0, 0.4, 1, 3, 0.93}, 8);
  const auto text = io::network_to_json(net);
  EXPECT_TRUE(io::network_diagnostics(text, "net").empty());
  const auto back = io::parse_network(text);
  ASSERT_EQ(back.node_count(), net.node_count());
  ASSERT_EQ(back.connection_count(), net.connection_count());
  for (std::size_t k = 0; k < net.connection_count(); ++k) {
    const auto& x = net.connection(k);
    const auto& y = back.connection(k);
    EXPECT_EQ(x.a, y.a);
    EXPECT_EQ(x.b, y.b);
    EXPECT_EQ(x.level, y.level);
    EXPECT_NEAR(x.capacity, y.capacity, print_tolerance(x.capacity));
    EXPECT_NEAR(x.threshold, y.threshold, print_tolerance(x.threshold));
    EXPECT_NEAR(x.fidelity, y.fidelity, print_tolerance(x.fidelity));
  }
  EXPECT_EQ(io::network_to_json(back), text);
}

TEST(NetworkJson, ThresholdAboveCapacityNamesConnection) {
  const std::string text = R"({"nodes": 3, "connections": [
    {"id": 0, "a": 0, "b": 1, "level": 1, "capacity": 5, "threshold": 1, "fidelity": 1},
    {"id": 1, "a": 1, "b": 2, "level": 1, "capacity": 10, "threshold": 12, "fidelity": 1}]})";
  const auto problems = io::network_diagnostics(text, "net.json");
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("net.json"), std::string::npos);
  EXPECT_NE(problems[0].find("id 1"), std::string::npos);
  EXPECT_NE(problems[0].find("threshold"), std::string::npos);
  EXPECT_THROW(io::parse_network(text, "net.json"), ParseError);
}

TEST(NetworkJson, CollectsEveryProblem) {
  const std::string text = R"({"nodes": 2, "connections": [
    {"id": 0, "a": 0, "b": 5, "level": 1, "capacity": 5, "threshold": 1, "fidelity": 1},
    {"id": 1, "a": 0, "b": 1, "level": 0, "capacity": -1, "threshold": 0, "fidelity": 1}]})";
  const auto problems = io::network_diagnostics(text, "n");
  EXPECT_GE(problems.size(), 3u);
  EXPECT_TRUE(mentions(problems, "\"b\""));
  EXPECT_TRUE(mentions(problems, "\"level\""));
  EXPECT_TRUE(mentions(problems, "\"capacity\""));
}

TEST(NetworkJson, MalformedDocuments) {
  EXPECT_THROW(io::parse_network("{\"nodes\": 3,", "bad"), ParseError);
  EXPECT_THROW(io::parse_network("[]", "bad"), ParseError);
  EXPECT_FALSE(io::network_diagnostics("not json", "bad").empty());
  EXPECT_THROW(io::load_network(qnet::testing::scratch_dir("io") / "missing.json"), ParseError);
}

TEST(DemandsJson, RoundTripAndErrors) {
  const std::vector<Demand> demands{{0, 0, 3, 1, 4.5}, {1, 2, 1, 2, 0.125}};
  const auto back = io::parse_demands(io::demands_to_json(demands));
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].id, demands[k].id);
    EXPECT_EQ(back[k].source, demands[k].source);
    EXPECT_EQ(back[k].target, demands[k].target);
    EXPECT_EQ(back[k].user, demands[k].user);
    EXPECT_EQ(back[k].required, demands[k].required);
  }
  EXPECT_THROW(io::parse_demands("{}"), ParseError);
  EXPECT_THROW(io::parse_demands(R"([{"id": 0, "source": "x"}])"), ParseError);
}

TEST(DomainsJson, RoundTrip) {
  const auto domains = sample_domains(qnet::testing::path_network(12), 30, 6.0, 4);
  const auto text = io::domains_to_json(domains);
  const auto back = io::parse_domains(text);
  ASSERT_EQ(back.size(), domains.size());
  for (std::size_t k = 0; k < domains.size(); ++k) {
    EXPECT_EQ(back[k].event_index, domains[k].event_index);
    EXPECT_EQ(back[k].center, domains[k].center);
    EXPECT_NEAR(back[k].radius, domains[k].radius, print_tolerance(domains[k].radius));
    EXPECT_NEAR(back[k].event_weight, domains[k].event_weight, 1e-12);
  }
  EXPECT_EQ(io::domains_to_json(back), text);
}

TEST(Csv, ParsesAndReportsCells) {
  const auto table = io::parse_csv("a,b\n1,2.5\n3,x\n");
  EXPECT_EQ(table.header, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(table.number(0, "b"), 2.5);
  EXPECT_THROW(table.number(1, "b"), ParseError);
  EXPECT_THROW(table.column("c"), ParseError);
  EXPECT_THROW(io::parse_csv("a,b\n1\n"), ParseError);
  EXPECT_THROW(io::parse_csv(""), ParseError);
}

TEST(TrialsCsv, RoundTripIsLossless) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TrialRecord> trials(200);
  for (std::size_t k = 0; k < trials.size(); ++k) {
    auto& t = trials[k];
    t.event_index = k + 1;
    t.event_weight = u(rng) / 100.0;
    t.radius = 8.0 * u(rng);
    t.baseline = 50.0 * u(rng);
    t.served_total = t.baseline * u(rng);
    t.ratio = t.served_total / t.baseline;
  }
  std::ostringstream first;
  io::write_trials_csv(first, trials);
  const auto back = io::parse_trials_csv(first.str());
  ASSERT_EQ(back.size(), trials.size());
  for (std::size_t k = 0; k < trials.size(); ++k) {
    EXPECT_EQ(back[k].event_index, trials[k].event_index);
    EXPECT_NEAR(back[k].ratio, trials[k].ratio, 1e-12);
    EXPECT_NEAR(back[k].event_weight, trials[k].event_weight, 1e-12);
    EXPECT_NEAR(back[k].radius, trials[k].radius, print_tolerance(trials[k].radius));
    EXPECT_NEAR(back[k].served_total, trials[k].served_total,
                print_tolerance(trials[k].served_total));
  }
  std::ostringstream second;
  io::write_trials_csv(second, back);
  EXPECT_EQ(second.str(), first.str());
}

TEST(TrialsCsv, RejectsBadEventIndex) {
  EXPECT_THROW(io::parse_trials_csv("f,weight,radius,ratio,served_total,baseline\n0,1,1,1,1,1\n"),
               ParseError);
  EXPECT_THROW(io::parse_trials_csv("f,weight,radius,ratio\n1,1,1,1\n"), ParseError);
}

TEST(Covariance, Specs) {
  EXPECT_EQ(io::parse_covariance("identity", 3), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(io::parse_covariance("diagonal:0.25", 2), 0.25 * Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(io::parse_covariance("diagonal:-1", 2), ParseError);
  EXPECT_THROW(io::parse_covariance("diagonal:abc", 2), ParseError);

  const auto dir = qnet::testing::scratch_dir("covariance");
  const auto path = dir / "k.csv";
  std::ofstream(path) << "2,0.5\n0.5 1\n";
  Eigen::MatrixXd expect(2, 2);
  expect << 2, 0.5, 0.5, 1;
  EXPECT_EQ(io::parse_covariance(path.string(), 2), expect);
  EXPECT_THROW(io::parse_covariance(path.string(), 3), ParseError);
  EXPECT_THROW(io::parse_covariance((dir / "none.csv").string(), 2), ParseError);
}
