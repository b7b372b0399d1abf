#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace qnet::se2 {

using Matrix3 = Eigen::Matrix3d;

/// Coefficients of the algebra basis X1, X2 (translations) and X3 (rotation).
struct AlgebraCoeffs {
  double a = 0.0;
  double b = 0.0;
  double theta = 0.0;
};

/// Homogeneous 3x3 rigid motion of the plane.
///
/// Invariants (checked on construction): bottom row (0, 0, 1) within 1e-12,
/// upper-left block orthogonal with determinant 1 within 1e-9.
class Element {
 public:
  Element() : m_(Matrix3::Identity()) {}
  explicit Element(const Matrix3& m);

  const Matrix3& matrix() const { return m_; }
  double a() const { return m_(0, 2); }
  double b() const { return m_(1, 2); }

  Element operator*(const Element& other) const;

 private:
  Matrix3 m_;
};

/// Basis matrix X_i for i in {1, 2, 3}: X1 = E13, X2 = E23, and X3 the
/// rotation generator with -1 at (1,2) and +1 at (2,1).
Matrix3 basis(int i);

/// exp(a X1 + b X2) exp(theta X3): translation (a, b) composed with a
/// rotation by theta. With theta = 0 this is exactly I + a X1 + b X2.
Element exp(const AlgebraCoeffs& coeffs);

/// Inverse of exp, theta in (-pi, pi].
AlgebraCoeffs log(const Element& g);

/// exp(t X_i) for a single generator.
Element exp_generator(int i, double t);

/// exp(radius X1 + occurrence X2) exp(0 X3).
Element group_function(double radius, double occurrence);

struct WeightedElement {
  Element element;
  double weight = 0.0;
};

/// Weighted samples of the group function for one failure event.
/// Weights must be non-negative and sum to 1 within 1e-9.
class GroupSampleSet {
 public:
  explicit GroupSampleSet(std::vector<WeightedElement> samples);

  /// Equal weights over the given elements.
  static GroupSampleSet uniform(std::vector<Element> elements);

  const std::vector<WeightedElement>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

 private:
  std::vector<WeightedElement> samples_;
};

struct BinWidths {
  double a = 0.2;
  double b = 0.05;
};

struct EntropyEstimate {
  double value = 0.0;
  std::size_t occupied_cells = 0;
  /// Set when every sample falls in one histogram cell; `value` is then
  /// the point-mass entropy log(cell area).
  bool degenerate = false;
};

/// Histogram differential entropy over the (a, b) log-coordinates:
/// -sum p log(p / cell_area). Requires at least two samples.
EntropyEstimate entropy_rate(const GroupSampleSet& samples, const BinWidths& bins);

/// Trapezoidal accumulation of per-event entropies over f = 1..m; a single
/// event returns its own value.
double entropy_rate_total(std::span<const double> per_event);

/// Convenience overload computing each event's entropy first.
double entropy_rate_total(std::span<const GroupSampleSet> per_event, const BinWidths& bins);

/// Finite-difference change of the entropy sequence at 1-based event f:
/// central inside, one-sided at the ends.
double entropy_rate_derivative(std::span<const double> per_event, std::size_t f);

using DensityFunction = std::function<double(const Element&)>;

/// Central difference of t -> pdf(g exp(t X_i)) at t = 0 with step h.
double lie_derivative(const DensityFunction& pdf, const Element& g, int i, double h = 1e-5);

}  // namespace qnet::se2
