#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "qnet/error.hpp"
#include "qnet/estimation.hpp"

using namespace qnet;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// out_i = sum_{j <= i} (1/delta) exp(-(i - j + 1)/delta) exp(q_j), 1-based.
VectorXd direct_forward(const VectorXd& q, double delta) {
  const auto m = q.size();
  VectorXd out = VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      out(i) += std::exp(-static_cast<double>(i - j + 1) / delta) / delta * std::exp(q(j));
    }
  }
  return out;
}

double direct_objective(const VectorXd& q, const VectorXd& r, const MatrixXd& cov,
                        double delta, double omega) {
  const VectorXd res = r - direct_forward(q, delta);
  double penalty = 0.0;
  for (Eigen::Index f = 0; f + 1 < q.size(); ++f) penalty += std::pow(q(f + 1) - q(f), 2);
  return res.dot(cov.inverse() * res) + penalty / (omega * omega);
}

MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index m) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = n(rng);
  return a * a.transpose() / static_cast<double>(m) + MatrixXd::Identity(m, m);
}

// Steep smooth profile used for the recovery checks.
VectorXd steep_profile(Eigen::Index m) {
  VectorXd q(m);
  for (Eigen::Index f = 0; f < m; ++f) {
    const double t = static_cast<double>(f) / static_cast<double>(m - 1);
    q(f) = 1.0 - 12.0 * t + 0.3 * std::sin(std::numbers::pi * t);
  }
  return q;
}

}  // namespace

TEST(ExponentialKernel, Examples) {
  EXPECT_DOUBLE_EQ(exponential_kernel(0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(exponential_kernel(3.0, 3.0), std::exp(-1.0) / 3.0);
  EXPECT_NEAR(exponential_kernel(2.0, 2.0), 0.18394, 1e-5);
  EXPECT_THROW(exponential_kernel(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(exponential_kernel(1.0, -2.0), InvalidArgument);
  const auto taps = kernel_sequence(4, 2.0);
  for (Eigen::Index f = 0; f < 4; ++f)
    EXPECT_DOUBLE_EQ(taps(f), exponential_kernel(static_cast<double>(f + 1), 2.0));
}

TEST(ForwardModel, Examples) {
  const double e = std::exp(1.0);
  const auto out = forward_model(VectorXd::Zero(3), 1.0);
  EXPECT_NEAR(out(0), 1 / e, 1e-15);
  EXPECT_NEAR(out(1), 1 / e + 1 / (e * e), 1e-15);
  EXPECT_NEAR(out(2), 1 / e + 1 / (e * e) + 1 / (e * e * e), 1e-15);

  VectorXd one(1);
  one << 0.7;
  EXPECT_NEAR(forward_model(one, 2.0)(0), exponential_kernel(1.0, 2.0) * std::exp(0.7), 1e-15);

  const auto tiny = forward_model(VectorXd::Constant(5, -800.0), 1.0);
  EXPECT_EQ(tiny.norm(), 0.0);
}

TEST(ForwardModel, MatchesDirectSum) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double delta : {0.3, 1.0, 2.0, 8.0}) {
    for (Eigen::Index m : {1, 2, 7, 40}) {
      VectorXd q(m);
      for (auto& v : q) v = u(rng);
      const VectorXd expect = direct_forward(q, delta);
      EXPECT_LE((forward_model(q, delta) - expect).norm(), 1e-12 * (1.0 + expect.norm()));
    }
  }
}

TEST(ForwardModel, MonotoneInEachEntry) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    VectorXd q(10);
    for (auto& v : q) v = u(rng);
    const auto base = forward_model(q, 1.5);
    const auto j = static_cast<Eigen::Index>(rng() % 10);
    q(j) += 0.5;
    const auto raised = forward_model(q, 1.5);
    for (Eigen::Index i = 0; i < 10; ++i) EXPECT_GE(raised(i), base(i));
  }
}

TEST(ForwardJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorXd q(8);
  for (auto& v : q) v = u(rng);
  const auto jac = forward_jacobian(q, 2.0);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < 8; ++j) {
    VectorXd up = q, down = q;
    up(j) += h;
    down(j) -= h;
    const VectorXd col = (forward_model(up, 2.0) - forward_model(down, 2.0)) / (2 * h);
    EXPECT_LE((jac.col(j) - col).norm(), 1e-8);
  }
}

TEST(NsrProblem, RejectsBadInputs) {
  const VectorXd r = VectorXd::Ones(3);
  EXPECT_THROW(NsrProblem(r, MatrixXd::Identity(2, 2), {}), InvalidArgument);
  MatrixXd asym = MatrixXd::Identity(3, 3);
  asym(0, 1) = 0.1;
  EXPECT_THROW(NsrProblem(r, asym, {}), InvalidArgument);
  MatrixXd indefinite = MatrixXd::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  EXPECT_THROW(NsrProblem(r, indefinite, {}), InvalidArgument);
  EXPECT_THROW(NsrProblem(r, MatrixXd::Zero(3, 3), {}), InvalidArgument);
  EXPECT_THROW(NsrProblem(r, MatrixXd::Identity(3, 3), {0.0, 1.0, 0.0, 1.0}), InvalidArgument);
  EXPECT_THROW(NsrProblem(r, MatrixXd::Identity(3, 3), {0.0, 1.0, 1.0, -1.0}), InvalidArgument);
}

TEST(NsrObjective, UnitResidualExample) {
  VectorXd q(2);
  q << 0.0, 1.0;
  const VectorXd r = forward_model(q, 1.0) + VectorXd::Ones(2);
  const NsrProblem problem(r, MatrixXd::Identity(2, 2), {0.0, 1.0, 1.0, 1.0});
  EXPECT_NEAR(nsr_objective(q, problem), 3.0, 1e-12);
}

TEST(NsrObjective, ZeroAtExactConstantFit) {
  const VectorXd q = VectorXd::Constant(6, 0.4);
  const NsrProblem problem(forward_model(q, 2.0), MatrixXd::Identity(6, 6), {0.0, 1.0, 2.0, 1.0});
  EXPECT_NEAR(nsr_objective(q, problem), 0.0, 1e-28);
}

TEST(NsrObjective, MatchesDirectFormulaAndIsNonNegative) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 10);
    VectorXd q(m), r(m);
    for (auto& v : q) v = u(rng);
    for (auto& v : r) v = u(rng);
    const MatrixXd cov = random_spd(rng, m);
    const double delta = 0.5 + 3.0 * (u(rng) + 2.0) / 4.0;
    const NsrProblem problem(r, cov, {0.0, 1.0, delta, 0.7});
    const double got = nsr_objective(q, problem);
    EXPECT_NEAR(got, direct_objective(q, r, cov, delta, 0.7), 1e-9 * (1.0 + got));
    EXPECT_GE(got, 0.0);
  }
}

TEST(NsrGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 30; ++k) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng() % 12);
    VectorXd q(m), r(m);
    for (auto& v : q) v = u(rng);
    for (auto& v : r) v = u(rng);
    const NsrProblem problem(r, random_spd(rng, m), {0.0, 1.0, 1.0 + (u(rng) + 1.5), 0.5});
    const VectorXd grad = nsr_gradient(q, problem);
    const double h = 1e-6;
    VectorXd fd(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      VectorXd up = q, down = q;
      up(j) += h;
      down(j) -= h;
      fd(j) = (nsr_objective(up, problem) - nsr_objective(down, problem)) / (2 * h);
    }
    EXPECT_LE((grad - fd).norm(), 1e-5 * std::max(1.0, fd.norm()));
  }
}

TEST(GaussNewton, SymmetricPositiveDefinite) {
  VectorXd q = VectorXd::LinSpaced(6, 0.0, -2.0);
  const NsrProblem problem(VectorXd::Ones(6), MatrixXd::Identity(6, 6), {0.0, 1.0, 2.0, 1.0});
  const MatrixXd gn = gauss_newton_matrix(q, problem);
  EXPECT_LE((gn - gn.transpose()).norm(), 1e-12);
  EXPECT_EQ(Eigen::LLT<MatrixXd>(gn).info(), Eigen::Success);
  EXPECT_TRUE(std::isfinite(surrogate_log_likelihood(q, problem)));
}

TEST(NsrEstimate, ObjectiveTraceNeverIncreases) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 0.01);
  const VectorXd truth = steep_profile(30);
  VectorXd r = forward_model(truth, 2.0);
  for (auto& v : r) v += n(rng);
  const NsrProblem problem(r, MatrixXd::Identity(30, 30) * 1e-4, {0.0, 1.0, 2.0, 10.0});
  NsrOptions opts;
  opts.max_iters = 2000;
  const auto est = nsr_estimate(problem, default_initialization(problem), opts);
  ASSERT_GE(est.objective_trace.size(), 2u);
  for (std::size_t k = 1; k < est.objective_trace.size(); ++k)
    EXPECT_LE(est.objective_trace[k], est.objective_trace[k - 1]);
  EXPECT_TRUE(std::isfinite(est.objective_value));
  EXPECT_EQ(est.q_estimate.size(), 30);
}

TEST(NsrEstimate, StationaryStartStays) {
  const VectorXd q = VectorXd::Constant(5, -0.3);
  const NsrProblem problem(forward_model(q, 1.0), MatrixXd::Identity(5, 5), {0.0, 1.0, 1.0, 1.0});
  const auto est = nsr_estimate(problem, q);
  EXPECT_LE((est.q_estimate - q).norm(), 1e-8);
  EXPECT_LE(est.objective_value, 1e-15);
}

TEST(NsrEstimate, HeavyPenaltyFlattens) {
  const VectorXd truth = steep_profile(20);
  const NsrProblem problem(forward_model(truth, 2.0), MatrixXd::Identity(20, 20),
                           {0.0, 1.0, 2.0, 1e-4});
  const auto est = nsr_estimate(problem, default_initialization(problem));
  EXPECT_LT(est.q_estimate.maxCoeff() - est.q_estimate.minCoeff(), 1e-3);
}

TEST(NsrEstimate, RecoversNoiseFreeData) {
  const VectorXd truth = steep_profile(50);
  const VectorXd r = forward_model(truth, 2.0);
  const NsrProblem problem(r, MatrixXd::Identity(50, 50) * 1e-4, {0.0, 1.0, 2.0, 10.0});
  const auto est = nsr_estimate(problem, default_initialization(problem));
  const double rmse = std::sqrt((forward_model(est.q_estimate, 2.0) - r).squaredNorm() / 50.0);
  EXPECT_LE(rmse, 1e-3);
}

TEST(SelectHyperparameters, PicksGeneratingKernelScale) {
  const VectorXd r = forward_model(steep_profile(50), 2.0);
  NsrGrid grid;
  grid.delta = {0.5, 2.0, 8.0};
  grid.omega = {10.0};
  const auto sel = select_hyperparameters(r, MatrixXd::Identity(50, 50) * 1e-4, grid);
  EXPECT_EQ(sel.params.delta, 2.0);
  ASSERT_EQ(sel.evaluated.size(), 3u);
  for (const auto& g : sel.evaluated) EXPECT_LE(g.score, sel.score);
}

TEST(SelectHyperparameters, SinglePointAndDuplicates) {
  const VectorXd r = forward_model(VectorXd::Constant(6, 0.1), 1.0);
  const MatrixXd cov = MatrixXd::Identity(6, 6);
  NsrGrid single;
  single.delta = {1.5};
  EXPECT_EQ(select_hyperparameters(r, cov, single).params.delta, 1.5);

  NsrGrid dup;
  dup.omega = {2.0, 2.0};
  const auto sel = select_hyperparameters(r, cov, dup);
  ASSERT_EQ(sel.evaluated.size(), 2u);
  EXPECT_EQ(sel.evaluated[0].score, sel.evaluated[1].score);
  EXPECT_EQ(sel.score, sel.evaluated[0].score);

  NsrGrid empty;
  empty.delta.clear();
  EXPECT_THROW(select_hyperparameters(r, cov, empty), InvalidArgument);
}
