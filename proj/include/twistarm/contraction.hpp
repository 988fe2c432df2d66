#ifndef TWISTARM_CONTRACTION_HPP
#define TWISTARM_CONTRACTION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistarm {

struct ContractionFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExtrapolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelValidityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractionSample {
  double pressure_pa = 0.0;
  double length_m = 0.0;
};

// Free-contraction model l(q): polynomial in pressure, fitted and evaluated on
// pressure normalized to [-1, 1] over the sampled range. Raw pascal values
// raised to the fifth power are unusable numerically, so the normalized
// coefficients are the stored representation.
class ContractionModel {
 public:
  ContractionModel() = default;
  ContractionModel(Eigen::VectorXd coeffs, double q_min, double q_max)
      : coeffs_(std::move(coeffs)), q_min_(q_min), q_max_(q_max) {
    if (!(q_max_ > q_min_)) {
      throw ContractionFitError("ContractionModel: empty input range");
    }
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double q_min() const { return q_min_; }
  double q_max() const { return q_max_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }

  // Strict range check: quintics diverge outside the sampled range, so
  // extrapolation is refused rather than warned about.
  double evaluate(double q_pa) const {
    const double tol = 1e-9 * (q_max_ - q_min_);
    if (q_pa < q_min_ - tol || q_pa > q_max_ + tol) {
      throw ExtrapolationError(
          "ContractionModel: pressure " + std::to_string(q_pa) +
          " Pa outside fitted range [" + std::to_string(q_min_) + ", " +
          std::to_string(q_max_) + "] Pa");
    }
    const double t = normalize(std::clamp(q_pa, q_min_, q_max_));
    double l = 0.0;
    for (int k = degree(); k >= 0; --k) {
      l = l * t + coeffs_(k);
    }
    if (!(l > 0.0)) {
      throw ModelValidityError(
          "ContractionModel: nonpositive length at pressure " +
          std::to_string(q_pa) + " Pa");
    }
    return l;
  }

  // Coefficients of the equivalent polynomial in raw pascals (ascending).
  Eigen::VectorXd raw_coefficients() const {
    const int n = degree() + 1;
    const double a = 2.0 / (q_max_ - q_min_);
    const double b = -(q_max_ + q_min_) / (q_max_ - q_min_);
    // t = a q + b; expand sum_k c_k (a q + b)^k by binomials.
    Eigen::VectorXd raw = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) {
      double binom = 1.0;
      for (int j = 0; j <= k; ++j) {
        raw(j) += coeffs_(k) * binom * std::pow(a, j) * std::pow(b, k - j);
        binom = binom * (k - j) / (j + 1.0);
      }
    }
    return raw;
  }

 private:
  double normalize(double q) const {
    return (2.0 * q - (q_min_ + q_max_)) / (q_max_ - q_min_);
  }

  Eigen::VectorXd coeffs_ = Eigen::VectorXd::Zero(1);
  double q_min_ = 0.0;
  double q_max_ = 1.0;
};

// Least-squares polynomial fit on normalized pressure. Householder QR rather
// than normal equations: the degree-5 Vandermonde is already poorly
// conditioned without squaring it.
inline ContractionModel fit_contraction(
    const std::vector<ContractionSample>& samples, int degree = 5) {
  const int m = static_cast<int>(samples.size());
  if (m < degree + 1) {
    throw ContractionFitError("fit_contraction: need at least " +
                              std::to_string(degree + 1) + " samples, got " +
                              std::to_string(m));
  }
  double lo = samples[0].pressure_pa;
  double hi = samples[0].pressure_pa;
  for (const auto& s : samples) {
    lo = std::min(lo, s.pressure_pa);
    hi = std::max(hi, s.pressure_pa);
  }
  if (!(hi > lo)) {
    throw ContractionFitError("fit_contraction: all pressures identical");
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (samples[i].pressure_pa == samples[j].pressure_pa) {
        throw ContractionFitError("fit_contraction: duplicate pressure " +
                                  std::to_string(samples[i].pressure_pa));
      }
    }
  }
  Eigen::MatrixXd vand(m, degree + 1);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    const double t = (2.0 * samples[i].pressure_pa - (lo + hi)) / (hi - lo);
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      vand(i, k) = p;
      p *= t;
    }
    rhs(i) = samples[i].length_m;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vand);
  if (qr.rank() < degree + 1) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(vand);
    const auto& sv = svd.singularValues();
    throw ContractionFitError(
        "fit_contraction: degenerate sample set, condition estimate " +
        std::to_string(sv(0) / std::max(sv(sv.size() - 1), 1e-300)));
  }
  return ContractionModel(qr.solve(rhs), lo, hi);
}

}  // namespace twistarm

#endif  // TWISTARM_CONTRACTION_HPP
