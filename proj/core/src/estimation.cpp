#include "qnet/estimation.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "qnet/error.hpp"

namespace qnet {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-30;

Eigen::VectorXd to_q(const Eigen::VectorXd& u, const NsrParams& p) {
  return (p.alpha + p.gamma * u.array()).matrix();
}

}  // namespace

NsrProblem::NsrProblem(Eigen::VectorXd observations, Eigen::MatrixXd noise_covariance,
                       NsrParams params)
    : observations_(std::move(observations)),
      covariance_(std::move(noise_covariance)),
      params_(params) {
  const auto m = observations_.size();
  if (m == 0) throw InvalidArgument("observation vector is empty");
  if (covariance_.rows() != m || covariance_.cols() != m) {
    throw InvalidArgument(fmt::format("noise covariance must be {0}x{0}", m));
  }
  if (!observations_.allFinite() || !covariance_.allFinite()) {
    throw InvalidArgument("observations and covariance must be finite");
  }
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidArgument("noise covariance is not symmetric");
  }
  factor_.compute(covariance_);
  if (factor_.info() != Eigen::Success) {
    throw InvalidArgument("noise covariance is not positive-definite");
  }
  if (!(params_.delta > 0.0)) throw InvalidArgument("kernel scale delta must be > 0");
  if (!(params_.omega > 0.0)) throw InvalidArgument("smoothness omega must be > 0");
  if (!std::isfinite(params_.alpha) || !std::isfinite(params_.gamma)) {
    throw InvalidArgument("alpha and gamma must be finite");
  }
}

Eigen::VectorXd NsrProblem::solve_covariance(const Eigen::VectorXd& v) const {
  return factor_.solve(v);
}

NsrProblem NsrProblem::with_params(const NsrParams& params) const {
  return NsrProblem(observations_, covariance_, params);
}

double exponential_kernel(double f, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("kernel scale delta must be > 0");
  if (!(f >= 0.0)) throw InvalidArgument("kernel argument must be >= 0");
  return std::exp(-f / delta) / delta;
}

Eigen::VectorXd kernel_sequence(std::size_t m, double delta) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    d(static_cast<Eigen::Index>(k)) = exponential_kernel(static_cast<double>(k + 1), delta);
  }
  return d;
}

Eigen::VectorXd forward_model(const Eigen::VectorXd& q, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("kernel scale delta must be > 0");
  // d(k) = (1/delta) rho^k with rho = exp(-1/delta), so the convolution
  // obeys out_i = rho * (out_{i-1} + exp(q_i) / delta).
  const double rho = std::exp(-1.0 / delta);
  Eigen::VectorXd out(q.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    acc = rho * (acc + std::exp(q(i)) / delta);
    out(i) = acc;
  }
  return out;
}

Eigen::MatrixXd forward_jacobian(const Eigen::VectorXd& q, double delta) {
  const Eigen::Index m = q.size();
  const Eigen::VectorXd d = kernel_sequence(static_cast<std::size_t>(m), delta);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double ej = std::exp(q(j));
    for (Eigen::Index i = j; i < m; ++i) jac(i, j) = d(i - j) * ej;
  }
  return jac;
}

double nsr_objective(const Eigen::VectorXd& q, const NsrProblem& problem) {
  if (static_cast<std::size_t>(q.size()) != problem.size()) {
    throw InvalidArgument("q and observations differ in length");
  }
  const Eigen::VectorXd residual = problem.observations() - forward_model(q, problem.params().delta);
  const double data = residual.dot(problem.solve_covariance(residual));
  double rough = 0.0;
  for (Eigen::Index f = 0; f + 1 < q.size(); ++f) {
    const double diff = q(f + 1) - q(f);
    rough += diff * diff;
  }
  const double omega = problem.params().omega;
  return data + rough / (omega * omega);
}

Eigen::VectorXd nsr_gradient(const Eigen::VectorXd& q, const NsrProblem& problem) {
  if (static_cast<std::size_t>(q.size()) != problem.size()) {
    throw InvalidArgument("q and observations differ in length");
  }
  const Eigen::Index m = q.size();
  const double delta = problem.params().delta;
  const Eigen::VectorXd residual = problem.observations() - forward_model(q, delta);
  const Eigen::VectorXd w = problem.solve_covariance(residual);

  // Adjoint of the causal convolution: acc_j = sum_{i >= j} d(i - j + 1) w_i
  // runs backwards as acc_j = rho * (w_j / delta + acc_{j+1}).
  const double rho = std::exp(-1.0 / delta);
  Eigen::VectorXd grad(m);
  double acc = 0.0;
  for (Eigen::Index j = m - 1; j >= 0; --j) {
    acc = rho * (w(j) / delta + acc);
    grad(j) = -2.0 * std::exp(q(j)) * acc;
  }
  const double scale = 2.0 / (problem.params().omega * problem.params().omega);
  for (Eigen::Index f = 0; f + 1 < m; ++f) {
    const double diff = q(f + 1) - q(f);
    grad(f) -= scale * diff;
    grad(f + 1) += scale * diff;
  }
  return grad;
}

Eigen::MatrixXd gauss_newton_matrix(const Eigen::VectorXd& q, const NsrProblem& problem) {
  const Eigen::Index m = q.size();
  const Eigen::MatrixXd jac = forward_jacobian(q, problem.params().delta);
  Eigen::MatrixXd weighted(m, m);
  for (Eigen::Index j = 0; j < m; ++j) weighted.col(j) = problem.solve_covariance(jac.col(j));
  Eigen::MatrixXd gn = 2.0 * jac.transpose() * weighted;

  const double scale = 2.0 / (problem.params().omega * problem.params().omega);
  for (Eigen::Index f = 0; f + 1 < m; ++f) {
    gn(f, f) += scale;
    gn(f + 1, f + 1) += scale;
    gn(f, f + 1) -= scale;
    gn(f + 1, f) -= scale;
  }
  return gn;
}

double surrogate_log_likelihood(const Eigen::VectorXd& q, const NsrProblem& problem) {
  const double objective = nsr_objective(q, problem);
  if (!std::isfinite(objective)) return -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd gn = gauss_newton_matrix(q, problem);
  Eigen::LLT<Eigen::MatrixXd> llt(gn);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  if (!(diag.minCoeff() > 0.0)) return -std::numeric_limits<double>::infinity();
  const double log_det = 2.0 * diag.array().log().sum();
  const double m = static_cast<double>(q.size());
  return -0.5 * objective - 0.5 * log_det + 0.5 * m * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd default_initialization(const NsrProblem& problem) {
  const std::size_t m = problem.size();
  const NsrParams& p = problem.params();
  const double tap_sum = kernel_sequence(m, p.delta).sum();
  const double mean = std::max(problem.observations().mean(), 1e-12);
  const double q0 = std::log(mean / tap_sum);
  const double u0 = p.gamma != 0.0 ? (q0 - p.alpha) / p.gamma : 0.0;
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), u0);
}

NsrEstimate nsr_estimate(const NsrProblem& problem, const Eigen::VectorXd& init,
                         const NsrOptions& options) {
  if (options.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (static_cast<std::size_t>(init.size()) != problem.size()) {
    throw InvalidArgument("initial vector and observations differ in length");
  }
  const NsrParams& p = problem.params();

  Eigen::VectorXd u = init;
  double value = nsr_objective(to_q(u, p), problem);
  if (!std::isfinite(value)) throw InvalidArgument("objective is not finite at the initial point");
  Eigen::VectorXd grad = p.gamma * nsr_gradient(to_q(u, p), problem);

  NsrEstimate est;
  est.objective_trace.push_back(value);
  double step = 1.0 / std::max(1.0, grad.norm());

  for (std::size_t it = 0; it < options.max_iters; ++it) {
    const double g2 = grad.squaredNorm();
    if (!(g2 > 0.0)) break;

    double t = step;
    Eigen::VectorXd candidate;
    double candidate_value = std::numeric_limits<double>::infinity();
    bool accepted = false;
    while (t >= kMinStep) {
      candidate = u - t * grad;
      candidate_value = nsr_objective(to_q(candidate, p), problem);
      if (candidate_value <= value - kArmijo * t * g2) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd next_grad = p.gamma * nsr_gradient(to_q(candidate, p), problem);
    const Eigen::VectorXd s = candidate - u;
    const Eigen::VectorXd y = next_grad - grad;
    const double sy = s.dot(y);
    step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * t;

    const double decrease = value - candidate_value;
    u = std::move(candidate);
    grad = next_grad;
    value = candidate_value;
    est.objective_trace.push_back(value);
    ++est.iterations;
    if (decrease < options.tol) break;
  }

  est.q_estimate = to_q(u, p);
  est.objective_value = value;
  est.selected_params = p;
  est.surrogate_log_likelihood = surrogate_log_likelihood(est.q_estimate, problem);
  return est;
}

HyperparameterSelection select_hyperparameters(const Eigen::VectorXd& observations,
                                               const Eigen::MatrixXd& noise_covariance,
                                               const NsrGrid& grid, const NsrOptions& options) {
  if (grid.alpha.empty() || grid.gamma.empty() || grid.delta.empty() || grid.omega.empty()) {
    throw InvalidArgument("every hyperparameter grid must be non-empty");
  }
  HyperparameterSelection best;
  bool found = false;
  for (double alpha : grid.alpha) {
    for (double gamma : grid.gamma) {
      for (double delta : grid.delta) {
        for (double omega : grid.omega) {
          const NsrParams params{alpha, gamma, delta, omega};
          const NsrProblem problem(observations, noise_covariance, params);
          GridEvaluation eval{params, -std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity()};
          NsrEstimate est;
          try {
            est = nsr_estimate(problem, default_initialization(problem), options);
            eval.score = est.surrogate_log_likelihood;
            eval.objective = est.objective_value;
          } catch (const InvalidArgument&) {
            // Non-finite start: the point stays at -inf.
          }
          best.evaluated.push_back(eval);
          if (std::isfinite(eval.score) && (!found || eval.score > best.score)) {
            found = true;
            best.params = params;
            best.score = eval.score;
            best.estimate = std::move(est);
          }
        }
      }
    }
  }
  if (!found) throw Error("no hyperparameter grid point produced a finite score");
  return best;
}

}  // namespace qnet
