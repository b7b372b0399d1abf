#include "qnet/liegroup.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include <Eigen/LU>
#include <fmt/format.h>

#include "qnet/error.hpp"

namespace qnet::se2 {

Element::Element(const Matrix3& m) : m_(m) {
  if (!m_.allFinite()) throw InvalidArgument("SE(2) element has non-finite entries");
  if (std::abs(m_(2, 0)) > 1e-12 || std::abs(m_(2, 1)) > 1e-12 ||
      std::abs(m_(2, 2) - 1.0) > 1e-12) {
    throw InvalidArgument("SE(2) element bottom row must be (0, 0, 1)");
  }
  const Eigen::Matrix2d r = m_.topLeftCorner<2, 2>();
  if ((r.transpose() * r - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(r.determinant() - 1.0) > 1e-9) {
    throw InvalidArgument("SE(2) element rotation block is not a proper rotation");
  }
}

Element Element::operator*(const Element& other) const {
  Matrix3 product = m_ * other.m_;
  // Products of exact rotations drift by rounding only; pin the bottom row.
  product.row(2) << 0.0, 0.0, 1.0;
  return Element(product);
}

Matrix3 basis(int i) {
  Matrix3 x = Matrix3::Zero();
  switch (i) {
    case 1:
      x(0, 2) = 1.0;
      break;
    case 2:
      x(1, 2) = 1.0;
      break;
    case 3:
      x(0, 1) = -1.0;
      x(1, 0) = 1.0;
      break;
    default:
      throw InvalidArgument(fmt::format("SE(2) basis index must be 1, 2 or 3, got {}", i));
  }
  return x;
}

Element exp(const AlgebraCoeffs& c) {
  if (!std::isfinite(c.a) || !std::isfinite(c.b) || !std::isfinite(c.theta)) {
    throw InvalidArgument("algebra coefficients must be finite");
  }
  // X1 and X2 square to zero and multiply to zero, so exp(a X1 + b X2) is
  // I + a X1 + b X2; exp(theta X3) is the planar rotation by theta.
  Matrix3 m = Matrix3::Identity();
  if (c.theta != 0.0) {
    const double cs = std::cos(c.theta);
    const double sn = std::sin(c.theta);
    m(0, 0) = cs;
    m(0, 1) = -sn;
    m(1, 0) = sn;
    m(1, 1) = cs;
  }
  m(0, 2) = c.a;
  m(1, 2) = c.b;
  return Element(m);
}

AlgebraCoeffs log(const Element& g) {
  const Matrix3& m = g.matrix();
  double theta = std::atan2(m(1, 0), m(0, 0));
  if (theta == -std::numbers::pi) theta = std::numbers::pi;
  return {m(0, 2), m(1, 2), theta};
}

Element exp_generator(int i, double t) {
  switch (i) {
    case 1:
      return exp({t, 0.0, 0.0});
    case 2:
      return exp({0.0, t, 0.0});
    case 3:
      return exp({0.0, 0.0, t});
    default:
      throw InvalidArgument(fmt::format("SE(2) basis index must be 1, 2 or 3, got {}", i));
  }
}

Element group_function(double radius, double occurrence) {
  return exp({radius, occurrence, 0.0});
}

// ---------------------------------------------------------------------------

GroupSampleSet::GroupSampleSet(std::vector<WeightedElement> samples)
    : samples_(std::move(samples)) {
  double sum = 0.0;
  for (const auto& s : samples_) {
    if (!(s.weight >= 0.0) || !std::isfinite(s.weight)) {
      throw InvalidArgument("sample weights must be finite and >= 0");
    }
    sum += s.weight;
  }
  if (!samples_.empty() && std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument(fmt::format("sample weights sum to {:.12g}, expected 1", sum));
  }
}

GroupSampleSet GroupSampleSet::uniform(std::vector<Element> elements) {
  std::vector<WeightedElement> samples;
  samples.reserve(elements.size());
  const double w = elements.empty() ? 0.0 : 1.0 / static_cast<double>(elements.size());
  for (auto& e : elements) samples.push_back({std::move(e), w});
  return GroupSampleSet(std::move(samples));
}

EntropyEstimate entropy_rate(const GroupSampleSet& set, const BinWidths& bins) {
  if (set.size() < 2) throw InvalidArgument("entropy_rate needs at least two samples");
  if (!(bins.a > 0.0) || !(bins.b > 0.0)) throw InvalidArgument("bin widths must be > 0");

  const double area = bins.a * bins.b;
  std::map<std::pair<long long, long long>, double> cells;
  double total = 0.0;
  for (const auto& s : set.samples()) {
    const AlgebraCoeffs c = log(s.element);
    const auto ia = static_cast<long long>(std::floor(c.a / bins.a));
    const auto ib = static_cast<long long>(std::floor(c.b / bins.b));
    cells[{ia, ib}] += s.weight;
    total += s.weight;
  }
  if (!(total > 0.0)) throw InvalidArgument("entropy_rate needs positive total weight");

  EntropyEstimate est;
  for (const auto& [cell, w] : cells) {
    if (w <= 0.0) continue;
    ++est.occupied_cells;
    const double p = w / total;
    est.value -= p * std::log(p / area);
  }
  if (est.occupied_cells <= 1) {
    est.degenerate = true;
    est.value = std::log(area);
  }
  return est;
}

double entropy_rate_total(std::span<const double> per_event) {
  if (per_event.empty()) throw InvalidArgument("entropy_rate_total needs at least one event");
  if (per_event.size() == 1) return per_event.front();
  double total = 0.0;
  for (std::size_t f = 0; f + 1 < per_event.size(); ++f) {
    total += 0.5 * (per_event[f] + per_event[f + 1]);
  }
  return total;
}

double entropy_rate_total(std::span<const GroupSampleSet> per_event, const BinWidths& bins) {
  std::vector<double> values;
  values.reserve(per_event.size());
  for (const auto& set : per_event) values.push_back(entropy_rate(set, bins).value);
  return entropy_rate_total(values);
}

double entropy_rate_derivative(std::span<const double> h, std::size_t f) {
  const std::size_t m = h.size();
  if (m < 2) throw InvalidArgument("entropy_rate_derivative needs at least two events");
  if (f < 1 || f > m) {
    throw InvalidArgument(fmt::format("event index {} outside 1..{}", f, m));
  }
  const std::size_t k = f - 1;
  if (k == 0) return h[1] - h[0];
  if (k == m - 1) return h[m - 1] - h[m - 2];
  return 0.5 * (h[k + 1] - h[k - 1]);
}

double lie_derivative(const DensityFunction& pdf, const Element& g, int i, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be > 0");
  const double forward = pdf(g * exp_generator(i, h));
  const double backward = pdf(g * exp_generator(i, -h));
  if (!std::isfinite(forward) || !std::isfinite(backward)) {
    throw InvalidArgument("density is not finite near the evaluation point");
  }
  return (forward - backward) / (2.0 * h);
}

}  // namespace qnet::se2
