#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace qnet {

/// Hyperparameters of the regularized estimator. The optimizer works on u
/// with q = alpha + gamma * u; delta is the kernel scale and omega the
/// smoothness scale (penalty weight omega^-2).
struct NsrParams {
  double alpha = 0.0;
  double gamma = 1.0;
  double delta = 1.0;
  double omega = 1.0;
};

/// Noisy per-domain observation vector with its noise covariance.
class NsrProblem {
 public:
  /// Throws InvalidArgument when dimensions disagree, the covariance is not
  /// symmetric within 1e-10 or not positive-definite, or delta/omega <= 0.
  NsrProblem(Eigen::VectorXd observations, Eigen::MatrixXd noise_covariance, NsrParams params);

  std::size_t size() const { return static_cast<std::size_t>(observations_.size()); }
  const Eigen::VectorXd& observations() const { return observations_; }
  const Eigen::MatrixXd& noise_covariance() const { return covariance_; }
  const NsrParams& params() const { return params_; }

  /// Solves K x = v with the cached Cholesky factor.
  Eigen::VectorXd solve_covariance(const Eigen::VectorXd& v) const;

  NsrProblem with_params(const NsrParams& params) const;

 private:
  Eigen::VectorXd observations_;
  Eigen::MatrixXd covariance_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  NsrParams params_;
};

struct NsrEstimate {
  /// Estimated occurrence vector q = alpha + gamma * u.
  Eigen::VectorXd q_estimate;
  double objective_value = 0.0;
  NsrParams selected_params;
  double surrogate_log_likelihood = 0.0;
  std::size_t iterations = 0;
  /// Objective after each accepted step, starting with the initial value.
  std::vector<double> objective_trace;
};

struct NsrOptions {
  std::size_t max_iters = 20000;
  double tol = 1e-15;
};

/// (1/delta) exp(-f/delta). Throws InvalidArgument for delta <= 0 or f < 0.
double exponential_kernel(double f, double delta);

/// Kernel taps d(1), ..., d(m).
Eigen::VectorXd kernel_sequence(std::size_t m, double delta);

/// Causal convolution of the kernel taps with exp(q), truncated to length m:
/// out_i = sum_{j <= i} d(i - j + 1) exp(q_j).
Eigen::VectorXd forward_model(const Eigen::VectorXd& q, double delta);

/// d out_i / d q_j.
Eigen::MatrixXd forward_jacobian(const Eigen::VectorXd& q, double delta);

/// Mahalanobis data misfit plus omega^-2 times the sum of squared first
/// differences of q.
double nsr_objective(const Eigen::VectorXd& q, const NsrProblem& problem);

/// Analytic gradient of nsr_objective with respect to q.
Eigen::VectorXd nsr_gradient(const Eigen::VectorXd& q, const NsrProblem& problem);

/// Gauss-Newton approximation of the objective's Hessian with respect to q.
Eigen::MatrixXd gauss_newton_matrix(const Eigen::VectorXd& q, const NsrProblem& problem);

/// -objective/2 - log det(GN)/2 + (m/2) log(2 pi). Returns -inf when the
/// Gauss-Newton matrix is not positive-definite.
double surrogate_log_likelihood(const Eigen::VectorXd& q, const NsrProblem& problem);

/// Constant starting point whose forward model matches the observation mean
/// in total, expressed in u coordinates.
Eigen::VectorXd default_initialization(const NsrProblem& problem);

/// Gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking over u. Accepted objectives never increase. Stops when an
/// accepted step decreases the objective by less than `tol`, when no
/// decreasing step exists, or after max_iters.
NsrEstimate nsr_estimate(const NsrProblem& problem, const Eigen::VectorXd& init,
                         const NsrOptions& options = {});

struct NsrGrid {
  std::vector<double> alpha{0.0};
  std::vector<double> gamma{1.0};
  std::vector<double> delta{1.0};
  std::vector<double> omega{1.0};
};

struct GridEvaluation {
  NsrParams params;
  double score = 0.0;
  double objective = 0.0;
};

struct HyperparameterSelection {
  NsrParams params;
  double score = 0.0;
  NsrEstimate estimate;
  /// Every grid point in evaluation order (alpha outermost, omega innermost).
  std::vector<GridEvaluation> evaluated;
};

/// Runs nsr_estimate at every grid point from default_initialization and
/// keeps the highest surrogate score; the first point wins ties. Throws
/// InvalidArgument for an empty grid and Error when no point scores finite.
HyperparameterSelection select_hyperparameters(const Eigen::VectorXd& observations,
                                               const Eigen::MatrixXd& noise_covariance,
                                               const NsrGrid& grid,
                                               const NsrOptions& options = {});

}  // namespace qnet
