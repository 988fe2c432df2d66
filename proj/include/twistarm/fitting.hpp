#ifndef TWISTARM_FITTING_HPP
#define TWISTARM_FITTING_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "twistarm/rod.hpp"
#include "twistarm/simplex.hpp"

namespace twistarm {

struct UnderdeterminedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AggregationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateHelixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MarkerObservation {
  std::optional<double> s_hint;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::string capture_id;
  std::string marker_id;
};

struct FitResult {
  Twist<SE3> xi_fit = Twist<SE3>::Zero();
  Pose<SE3> base_pose_fit = Pose<SE3>::Identity();
  // Root-mean-square of the per-coordinate position residuals.
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  // Set when the Gauss-Newton Hessian at the optimum has condition > 1e8,
  // e.g. material torsion of a near-straight rod seen through positions only.
  bool ill_conditioned = false;
};

struct FitOptions {
  // Anchor g(0) at a known clamp pose by default; freeing it solves the base
  // pose as the optimal rigid alignment of the model curve to the markers.
  bool anchor_base = true;
  Pose<SE3> base_pose = Pose<SE3>::Identity();
  SimplexOptions simplex;
};

namespace detail {

inline Eigen::Vector3d curve_point(const Twist<SE3>& xi, const Pose<SE3>& base,
                                   double s) {
  return compose(base, expmap(xi, s)).translation;
}

struct FitProblem {
  std::vector<Eigen::Vector3d> positions;
  std::vector<double> s_values;
  bool free_base = false;
  Pose<SE3> anchor = Pose<SE3>::Identity();

  Twist<SE3> xi_of(const Eigen::VectorXd& p) const { return p.head<6>(); }

  // For a free base the optimal rigid placement of the curve is a closed-form
  // point-set alignment, so the base never enters the search space.
  Pose<SE3> base_for(const Twist<SE3>& xi) const {
    if (!free_base) return anchor;
    const int m = static_cast<int>(positions.size());
    Eigen::Matrix3Xd src(3, m), dst(3, m);
    for (int i = 0; i < m; ++i) {
      src.col(i) = expmap(xi, s_values[i]).translation;
      dst.col(i) = positions[i];
    }
    const Eigen::Matrix4d t = Eigen::umeyama(src, dst, false);
    Pose<SE3> base;
    base.rotation = t.topLeftCorner<3, 3>();
    base.translation = t.topRightCorner<3, 1>();
    return base;
  }

  Eigen::VectorXd residuals(const Eigen::VectorXd& p) const {
    const Twist<SE3> xi = xi_of(p);
    const Pose<SE3> base = base_for(xi);
    Eigen::VectorXd r(3 * positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
      r.segment<3>(3 * static_cast<Eigen::Index>(i)) =
          curve_point(xi, base, s_values[i]) - positions[i];
    }
    return r;
  }

  double objective(const Eigen::VectorXd& p) const {
    return residuals(p).squaredNorm();
  }
};

inline Eigen::MatrixXd fd_jacobian(const FitProblem& prob,
                                   const Eigen::VectorXd& p) {
  const int dim = static_cast<int>(p.size());
  const double h = 1e-7;
  Eigen::MatrixXd jac(3 * prob.positions.size(), dim);
  for (int j = 0; j < dim; ++j) {
    Eigen::VectorXd lo = p, hi = p;
    lo(j) -= h;
    hi(j) += h;
    jac.col(j) = (prob.residuals(hi) - prob.residuals(lo)) / (2.0 * h);
  }
  return jac;
}

// Levenberg-Marquardt refinement of the simplex result; the derivative-free
// stage finds the basin, this stage drives the stationarity gap to roundoff.
inline void lm_polish(const FitProblem& prob, Eigen::VectorXd& p,
                      int max_iterations = 60) {
  const int dim = static_cast<int>(p.size());
  Eigen::VectorXd r = prob.residuals(p);
  double ssr = r.squaredNorm();
  double lambda = 1e-6;
  for (int iter = 0; iter < max_iterations; ++iter) {
    const Eigen::MatrixXd jac = fd_jacobian(prob, p);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.norm() < 1e-14 * (1.0 + ssr)) break;
    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      const Eigen::MatrixXd damped =
          jtj + lambda * Eigen::MatrixXd::Identity(dim, dim);
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      const Eigen::VectorXd cand = p + step;
      const Eigen::VectorXd rc = prob.residuals(cand);
      if (rc.squaredNorm() < ssr) {
        p = cand;
        r = rc;
        ssr = rc.squaredNorm();
        lambda = std::max(lambda / 4.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
  }
}

inline bool gauss_newton_ill_conditioned(const FitProblem& prob,
                                         const Eigen::VectorXd& p) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(fd_jacobian(prob, p));
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  // Condition of J^T J is the square of J's.
  return smin <= 0.0 || (sv(0) / smin) * (sv(0) / smin) > 1e8;
}

// Nearest-point arc assignment for markers with unknown s: project each
// observed position onto a dense sampling of the current curve.
inline std::vector<double> project_arcs(const FitProblem& prob,
                                        const Twist<SE3>& xi,
                                        const Pose<SE3>& base) {
  constexpr int kDense = 257;
  std::vector<Eigen::Vector3d> pts(kDense);
  for (int k = 0; k < kDense; ++k) {
    pts[k] = curve_point(xi, base, static_cast<double>(k) / (kDense - 1));
  }
  std::vector<double> s_out(prob.positions.size());
  for (std::size_t i = 0; i < prob.positions.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k < kDense; ++k) {
      const double dist = (pts[k] - prob.positions[i]).squaredNorm();
      if (dist < best) {
        best = dist;
        best_k = k;
      }
    }
    s_out[i] = static_cast<double>(best_k) / (kDense - 1);
  }
  return s_out;
}

}  // namespace detail

// Recover the base-curve twist from measured marker positions by derivative-
// free minimization of the summed squared point distances. Markers without
// s hints are assigned arc locations by alternating nearest-point projection.
inline FitResult fit_twist(const std::vector<MarkerObservation>& observations,
                           const Twist<SE3>& init, const FitOptions& opt = {}) {
  if (observations.size() < 4) {
    throw UnderdeterminedError("fit_twist: need at least 4 observations, got " +
                               std::to_string(observations.size()));
  }
  const bool have_hints = std::all_of(
      observations.begin(), observations.end(),
      [](const MarkerObservation& o) { return o.s_hint.has_value(); });

  detail::FitProblem prob;
  prob.free_base = !opt.anchor_base;
  prob.anchor = opt.base_pose;
  for (const auto& o : observations) {
    prob.positions.push_back(o.position);
  }
  if (have_hints) {
    std::set<double> distinct;
    for (const auto& o : observations) {
      prob.s_values.push_back(*o.s_hint);
      distinct.insert(*o.s_hint);
    }
    if (distinct.size() < 3) {
      throw UnderdeterminedError(
          "fit_twist: observations span fewer than 3 distinct arc locations");
    }
  }

  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(6);
  p0.head<6>() = init;

  FitResult result;
  const double coords = 3.0 * static_cast<double>(prob.positions.size());
  if (have_hints) {
    const SimplexResult sr = nelder_mead(
        [&](const Eigen::VectorXd& p) { return prob.objective(p); }, p0,
        opt.simplex);
    Eigen::VectorXd p = sr.x;
    detail::lm_polish(prob, p);
    result.xi_fit = prob.xi_of(p);
    result.base_pose_fit = prob.base_for(result.xi_fit);
    result.iterations = sr.iterations;
    result.converged = sr.converged;
    result.residual_rms = std::sqrt(prob.objective(p) / coords);
    result.ill_conditioned = detail::gauss_newton_ill_conditioned(prob, p);
    return result;
  }

  // Alternating fit: assign s by projection, optimize, repeat until the
  // assignments stop moving.
  prob.s_values = detail::project_arcs(prob, prob.xi_of(p0),
                                       prob.base_for(prob.xi_of(p0)));
  Eigen::VectorXd p = p0;
  SimplexResult sr;
  for (int outer = 0; outer < 20; ++outer) {
    sr = nelder_mead(
        [&](const Eigen::VectorXd& q) { return prob.objective(q); }, p,
        opt.simplex);
    p = sr.x;
    detail::lm_polish(prob, p);
    result.iterations += sr.iterations;
    const std::vector<double> next = detail::project_arcs(
        prob, prob.xi_of(p), prob.base_for(prob.xi_of(p)));
    double shift = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      shift = std::max(shift, std::abs(next[i] - prob.s_values[i]));
    }
    prob.s_values = next;
    if (shift < 1e-9) break;
  }
  result.xi_fit = prob.xi_of(p);
  result.base_pose_fit = prob.base_for(result.xi_fit);
  result.converged = sr.converged;
  result.residual_rms = std::sqrt(prob.objective(p) / coords);
  result.ill_conditioned = detail::gauss_newton_ill_conditioned(prob, p);
  return result;
}

// Componentwise median of converged fits; faithful to the capture procedure
// even though a componentwise median of twists is not geodesic.
inline FitResult median_aggregate(const std::vector<FitResult>& fits) {
  std::vector<const FitResult*> converged;
  for (const auto& f : fits) {
    if (f.converged) converged.push_back(&f);
  }
  if (converged.empty()) {
    throw AggregationError("median_aggregate: no converged fits");
  }
  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  FitResult out = *converged.front();
  for (int k = 0; k < 6; ++k) {
    std::vector<double> comp;
    for (const auto* f : converged) comp.push_back(f->xi_fit(k));
    out.xi_fit(k) = median_of(comp);
  }
  std::vector<double> res;
  for (const auto* f : converged) {
    res.push_back(f->residual_rms);
    out.iterations += f->iterations;
  }
  out.residual_rms = median_of(res);
  out.converged = true;
  return out;
}

struct AccuracyReport {
  // Per-component model-minus-measured curvature, each scaled by the length
  // of its own twist: omega_k * ||v||.
  Eigen::Vector3d scaled_curvature_error = Eigen::Vector3d::Zero();
  double tip_error_normalized = 0.0;
  std::optional<double> winding_radius_error;
  std::optional<double> pitch_error;
};

inline AccuracyReport accuracy(const Twist<SE3>& model_xi,
                               const Twist<SE3>& measured_xi,
                               const Eigen::Vector3d& model_tip,
                               const Eigen::Vector3d& measured_tip,
                               double arm_length) {
  if (!(arm_length > 0.0)) {
    throw InvalidLengthError("accuracy: arm length must be positive");
  }
  AccuracyReport report;
  report.scaled_curvature_error =
      model_xi.tail<3>() * model_xi.head<3>().norm() -
      measured_xi.tail<3>() * measured_xi.head<3>().norm();
  report.tip_error_normalized = (model_tip - measured_tip).norm() / arm_length;
  return report;
}

struct HelixMetrics {
  double radius = 0.0;  // winding radius [m]
  double pitch = 0.0;   // advance per turn [m]
};

// Screw decomposition of a constant twist: the centerline winds at radius
// ||v_perp|| / ||omega|| about the screw axis and advances 2 pi (v . w_hat) /
// ||omega|| per turn.
inline HelixMetrics helix_metrics(const Twist<SE3>& xi) {
  const Eigen::Vector3d v = xi.head<3>();
  const Eigen::Vector3d w = xi.tail<3>();
  const double wn = w.norm();
  if (wn <= 1e-9) {
    throw DegenerateHelixError(
        "helix_metrics: straight rod has no winding radius");
  }
  const Eigen::Vector3d w_hat = w / wn;
  const double advance = v.dot(w_hat);
  HelixMetrics m;
  m.radius = (v - advance * w_hat).norm() / wn;
  m.pitch = 2.0 * M_PI * advance / wn;
  return m;
}

}  // namespace twistarm

#endif  // TWISTARM_FITTING_HPP
