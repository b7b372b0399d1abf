#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "qnet/error.hpp"
#include "qnet/liegroup.hpp"

using namespace qnet::se2;
using qnet::InvalidArgument;

namespace {

constexpr double kPi = std::numbers::pi;

// Rotation block from its 2x2 closed form, translation in the last column.
Matrix3 rigid(double theta, double a, double b) {
  Matrix3 m = Matrix3::Identity();
  m(0, 0) = std::cos(theta);
  m(0, 1) = -std::sin(theta);
  m(1, 0) = std::sin(theta);
  m(1, 1) = std::cos(theta);
  m(0, 2) = a;
  m(1, 2) = b;
  return m;
}

std::vector<Element> box_samples(std::size_t n, double width, double height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(0.0, width), ub(0.0, height);
  std::vector<Element> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(group_function(ua(rng), ub(rng)));
  return out;
}

}  // namespace

TEST(Basis, MatricesAndCommutators) {
  Matrix3 x1 = Matrix3::Zero();
  x1(0, 2) = 1.0;
  EXPECT_EQ(basis(1), x1);
  Matrix3 x2 = Matrix3::Zero();
  x2(1, 2) = 1.0;
  EXPECT_EQ(basis(2), x2);
  const Matrix3 x3 = basis(3);
  EXPECT_EQ(x3(0, 1), -1.0);
  EXPECT_EQ(x3(1, 0), 1.0);
  const Eigen::Matrix2d block = x3.topLeftCorner(2, 2);
  EXPECT_EQ(block.transpose(), -block);
  EXPECT_EQ(basis(1) * basis(2) - basis(2) * basis(1), Matrix3::Zero());
  EXPECT_THROW(basis(0), InvalidArgument);
  EXPECT_THROW(basis(4), InvalidArgument);
}

TEST(Exp, Examples) {
  EXPECT_EQ(exp({0, 0, 0}).matrix(), Matrix3::Identity());
  const auto t = exp({2.0, -0.5, 0.0});
  EXPECT_EQ(t.matrix(), Matrix3::Identity() + 2.0 * basis(1) - 0.5 * basis(2));
  const auto r = exp({0, 0, kPi / 2});
  EXPECT_NEAR(r.matrix()(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(r.matrix()(0, 1), -1.0, 1e-15);
  EXPECT_NEAR(r.matrix()(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(r.matrix()(1, 1), 0.0, 1e-15);
}

// Translation first, rotation second.
TEST(Exp, ProductOfTranslationAndRotation) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng), th = u(rng);
    EXPECT_LE((exp({a, b, th}).matrix() - rigid(th, a, b)).norm(), 1e-14);
    const Element composed = exp({a, b, 0}) * exp_generator(3, th);
    EXPECT_LE((composed.matrix() - exp({a, b, th}).matrix()).norm(), 1e-14);
  }
}

TEST(Exp, NilpotentIdentityIsExact) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(rng), b = u(rng);
    EXPECT_EQ(exp({a, b, 0}).matrix(), Matrix3::Identity() + a * basis(1) + b * basis(2));
  }
}

TEST(Log, Examples) {
  const auto id = log(Element{});
  EXPECT_EQ(id.a, 0.0);
  EXPECT_EQ(id.b, 0.0);
  EXPECT_EQ(id.theta, 0.0);
  const auto t = log(group_function(1.5, -2.0));
  EXPECT_EQ(t.a, 1.5);
  EXPECT_EQ(t.b, -2.0);
  EXPECT_EQ(t.theta, 0.0);
  const auto half_turn = log(Element(rigid(kPi, 0.3, 0.4)));
  EXPECT_DOUBLE_EQ(half_turn.theta, kPi);
  EXPECT_NEAR(half_turn.a, 0.3, 1e-15);
}

TEST(Log, RoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0), angle(-kPi, kPi);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Element g(rigid(angle(rng), u(rng), u(rng)));
    const auto c = log(g);
    EXPECT_GT(c.theta, -kPi);
    EXPECT_LE(c.theta, kPi);
    worst = std::max(worst, (exp(c).matrix() - g.matrix()).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Element, RejectsNonRigidMatrices) {
  Matrix3 m = Matrix3::Identity();
  m(2, 0) = 0.1;
  EXPECT_THROW(Element{m}, InvalidArgument);
  m = Matrix3::Identity();
  m(0, 0) = 2.0;
  EXPECT_THROW(Element{m}, InvalidArgument);
  m = Matrix3::Identity();
  m(0, 0) = -1.0;  // reflection
  EXPECT_THROW(Element{m}, InvalidArgument);
}

TEST(Element, ProductsStayInGroup) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Element acc;
  for (int k = 0; k < 200; ++k) {
    acc = acc * exp({u(rng), u(rng), u(rng)});
    const auto& m = acc.matrix();
    const Eigen::Matrix2d block = m.topLeftCorner(2, 2);
    EXPECT_NEAR(block.determinant(), 1.0, 1e-9);
    EXPECT_EQ(m(2, 0), 0.0);
    EXPECT_EQ(m(2, 1), 0.0);
    EXPECT_EQ(m(2, 2), 1.0);
  }
}

TEST(GroupFunction, TranslationsComposeAndCommute) {
  EXPECT_EQ(group_function(0, 0).matrix(), Matrix3::Identity());
  const auto g = group_function(2.0, 0.5);
  EXPECT_EQ(g.a(), 2.0);
  EXPECT_EQ(g.b(), 0.5);
  const auto p = group_function(1.25, 0.5);
  const auto q = group_function(3.5, 0.25);
  EXPECT_EQ((p * q).matrix(), group_function(4.75, 0.75).matrix());
  EXPECT_EQ((p * q).matrix(), (q * p).matrix());
}

TEST(GroupSampleSet, Validates) {
  EXPECT_THROW(GroupSampleSet({{Element{}, 0.5}, {Element{}, 0.4}}), InvalidArgument);
  EXPECT_THROW(GroupSampleSet({{Element{}, 1.5}, {Element{}, -0.5}}), InvalidArgument);
  EXPECT_EQ(GroupSampleSet::uniform({Element{}, Element{}}).samples()[1].weight, 0.5);
}

TEST(EntropyRate, PointMassAndEqualCells) {
  const BinWidths bins{0.5, 0.1};
  const auto same = GroupSampleSet::uniform(std::vector<Element>(5, group_function(1.1, 0.33)));
  const auto point = entropy_rate(same, bins);
  EXPECT_TRUE(point.degenerate);
  EXPECT_NEAR(point.value, std::log(0.05), 1e-12);

  for (std::size_t k = 2; k <= 6; ++k) {
    std::vector<Element> cells;
    for (std::size_t j = 0; j < k; ++j) cells.push_back(group_function(0.5 * j + 0.25, 0.05));
    const auto est = entropy_rate(GroupSampleSet::uniform(cells), bins);
    EXPECT_FALSE(est.degenerate);
    EXPECT_EQ(est.occupied_cells, k);
    EXPECT_NEAR(est.value, std::log(static_cast<double>(k) * 0.05), 1e-12);
  }
  EXPECT_THROW(entropy_rate(GroupSampleSet::uniform({Element{}}), bins), InvalidArgument);
}

TEST(EntropyRate, UniformBoxMatchesAnalytic) {
  const auto samples = GroupSampleSet::uniform(box_samples(100000, 4.0, 1.0, 5));
  const auto est = entropy_rate(samples, {0.2, 0.05});
  EXPECT_NEAR(est.value, std::log(4.0), 0.05);
}

// Over the same occupied cells, equal weights give the largest entropy.
TEST(EntropyRate, UniformWeightsAreMaximal) {
  std::vector<Element> cells;
  for (int j = 0; j < 8; ++j) cells.push_back(group_function(0.2 * j + 0.1, 0.025 * (j % 3) + 0.01));
  const BinWidths bins{0.2, 0.025};
  const double uniform = entropy_rate(GroupSampleSet::uniform(cells), bins).value;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> w(cells.size());
    double sum = 0.0;
    for (auto& x : w) sum += (x = 1.0 + 0.5 * (u(rng) - 0.5));
    std::vector<WeightedElement> weighted;
    for (std::size_t j = 0; j < cells.size(); ++j) weighted.push_back({cells[j], w[j] / sum});
    EXPECT_LE(entropy_rate(GroupSampleSet(weighted), bins).value, uniform + 1e-12);
  }
}

TEST(EntropyRateTotal, Trapezoid) {
  const std::vector<double> one{0.7};
  EXPECT_EQ(entropy_rate_total(one), 0.7);
  const std::vector<double> flat(6, 1.3);
  EXPECT_NEAR(entropy_rate_total(flat), 5 * 1.3, 1e-12);
  const std::vector<double> ramp{1.0, 2.0, 3.0};
  EXPECT_EQ(entropy_rate_total(ramp), 4.0);
  EXPECT_THROW(entropy_rate_total(std::vector<double>{}), InvalidArgument);

  const BinWidths bins{0.5, 0.1};
  std::vector<GroupSampleSet> sets;
  std::vector<double> values;
  for (int f = 0; f < 4; ++f) {
    sets.push_back(GroupSampleSet::uniform(box_samples(50, 2.0, 0.5, 10 + f)));
    values.push_back(entropy_rate(sets.back(), bins).value);
  }
  EXPECT_DOUBLE_EQ(entropy_rate_total(sets, bins), entropy_rate_total(values));
}

TEST(EntropyRateDerivative, Examples) {
  const std::vector<double> flat(5, 2.0);
  for (std::size_t f = 1; f <= 5; ++f) EXPECT_EQ(entropy_rate_derivative(flat, f), 0.0);
  const std::vector<double> lin{1.0, 3.0, 5.0};
  EXPECT_EQ(entropy_rate_derivative(lin, 2), 2.0);
  EXPECT_EQ(entropy_rate_derivative(lin, 1), 2.0);
  EXPECT_EQ(entropy_rate_derivative(lin, 3), 2.0);
  const std::vector<double> sq{0.0, 1.0, 4.0, 9.0};
  EXPECT_EQ(entropy_rate_derivative(sq, 3), 4.0);
  EXPECT_THROW(entropy_rate_derivative(sq, 0), InvalidArgument);
  EXPECT_THROW(entropy_rate_derivative(sq, 5), InvalidArgument);
  EXPECT_THROW(entropy_rate_derivative(std::vector<double>{1.0}, 1), InvalidArgument);
}

TEST(LieDerivative, Examples) {
  const DensityFunction constant = [](const Element&) { return 0.3; };
  const DensityFunction a_coord = [](const Element& g) { return g.a(); };
  const auto g = group_function(1.2, 0.4);
  for (int i = 1; i <= 3; ++i) EXPECT_EQ(lie_derivative(constant, g, i), 0.0);
  EXPECT_NEAR(lie_derivative(a_coord, g, 1), 1.0, 1e-8);
  EXPECT_NEAR(lie_derivative(a_coord, Element{}, 2), 0.0, 1e-8);

  const DensityFunction bad = [](const Element&) { return std::nan(""); };
  EXPECT_THROW(lie_derivative(bad, g, 1), InvalidArgument);
  EXPECT_THROW(lie_derivative(constant, g, 1, 0.0), InvalidArgument);
}
