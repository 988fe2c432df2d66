#ifndef TWISTARM_LIEGROUP_HPP
#define TWISTARM_LIEGROUP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace twistarm {

// Principal-branch violation in the matrix logarithm (rotation angle at pi).
struct BranchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Matrix fed to vee() does not have Lie-algebra structure.
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Group tags. SE(2) and SE(3) are compile-time modes: a design is built in one
// group and stays there, so mixing operands is a type error rather than a
// runtime check.
struct SE2 {
  static constexpr int kDim = 2;   // spatial dimension
  static constexpr int kDof = 3;   // twist size (vx, vy, kappa)
  static constexpr int kAng = 1;   // angular components
  using Rot = Eigen::Matrix2d;
};

struct SE3 {
  static constexpr int kDim = 3;
  static constexpr int kDof = 6;   // (vx, vy, vz, tau, wy, wz)
  static constexpr int kAng = 3;
  using Rot = Eigen::Matrix3d;
};

// Twist-vector ordering is (v; omega) throughout; all matrices (K, Ad) use it.
template <class G>
using Twist = Eigen::Matrix<double, G::kDof, 1>;

template <class G>
using AdjointMatrix = Eigen::Matrix<double, G::kDof, G::kDof>;

template <class G>
using HomMatrix = Eigen::Matrix<double, G::kDim + 1, G::kDim + 1>;

template <class G>
using Vec = Eigen::Matrix<double, G::kDim, 1>;

template <class G>
struct Pose {
  typename G::Rot rotation = G::Rot::Identity();
  Vec<G> translation = Vec<G>::Zero();

  static Pose Identity() { return Pose{}; }

  Pose inverse() const {
    Pose out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  HomMatrix<G> matrix() const {
    HomMatrix<G> m = HomMatrix<G>::Identity();
    m.template topLeftCorner<G::kDim, G::kDim>() = rotation;
    m.template topRightCorner<G::kDim, 1>() = translation;
    return m;
  }
};

template <class G>
Pose<G> compose(const Pose<G>& a, const Pose<G>& b) {
  Pose<G> out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

template <class G>
double pose_distance(const Pose<G>& a, const Pose<G>& b) {
  return (a.matrix() - b.matrix()).norm();
}

inline Eigen::Matrix3d skew3(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

namespace detail {

// Trigonometric coefficients of the exp/log maps with 4-term Taylor fallback
// below theta = 1e-6 to avoid cancellation.
constexpr double kSmallAngle = 1e-6;

inline double coef_a(double t) {  // sin(t)/t
  if (t < kSmallAngle) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0;
  }
  return std::sin(t) / t;
}

inline double coef_b(double t) {  // (1-cos(t))/t^2
  if (t < kSmallAngle) {
    const double t2 = t * t;
    return 0.5 - t2 / 24.0 + t2 * t2 / 720.0 - t2 * t2 * t2 / 40320.0;
  }
  return (1.0 - std::cos(t)) / (t * t);
}

inline double coef_c(double t) {  // (t-sin(t))/t^3
  if (t < kSmallAngle) {
    const double t2 = t * t;
    return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2 * t2 * t2 / 362880.0;
  }
  return (t - std::sin(t)) / (t * t * t);
}

inline double coef_vinv(double t) {  // (1 - a/(2b)) / t^2
  if (t < kSmallAngle) {
    const double t2 = t * t;
    return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  }
  return (1.0 - coef_a(t) / (2.0 * coef_b(t))) / (t * t);
}

}  // namespace detail

// --- hat / vee ---

inline HomMatrix<SE3> hat(const Twist<SE3>& xi) {
  HomMatrix<SE3> m = HomMatrix<SE3>::Zero();
  m.topLeftCorner<3, 3>() = skew3(xi.tail<3>());
  m.topRightCorner<3, 1>() = xi.head<3>();
  return m;
}

inline HomMatrix<SE2> hat(const Twist<SE2>& xi) {
  HomMatrix<SE2> m = HomMatrix<SE2>::Zero();
  m(0, 1) = -xi(2);
  m(1, 0) = xi(2);
  m(0, 2) = xi(0);
  m(1, 2) = xi(1);
  return m;
}

template <class G>
Twist<G> vee(const HomMatrix<G>& m) {
  const double tol = 1e-12 * (1.0 + m.norm());
  if (m.row(G::kDim).norm() > tol) {
    throw StructureError("vee: bottom row of Lie-algebra matrix must be zero");
  }
  const auto w = m.template topLeftCorner<G::kDim, G::kDim>();
  if ((w + w.transpose()).norm() > tol) {
    throw StructureError("vee: angular block must be skew-symmetric");
  }
  Twist<G> xi;
  if constexpr (std::is_same_v<G, SE3>) {
    xi << m(0, 3), m(1, 3), m(2, 3), m(2, 1), m(0, 2), m(1, 0);
  } else {
    xi << m(0, 2), m(1, 2), m(1, 0);
  }
  return xi;
}

// --- exponential map ---

inline Pose<SE3> expmap(const Twist<SE3>& xi, double s = 1.0) {
  const Eigen::Vector3d phi = s * xi.tail<3>();
  const Eigen::Vector3d u = s * xi.head<3>();
  const double t = phi.norm();
  const Eigen::Matrix3d w = skew3(phi);
  const Eigen::Matrix3d w2 = w * w;
  Pose<SE3> g;
  g.rotation = Eigen::Matrix3d::Identity() + detail::coef_a(t) * w +
               detail::coef_b(t) * w2;
  const Eigen::Matrix3d v_mat = Eigen::Matrix3d::Identity() +
                                detail::coef_b(t) * w +
                                detail::coef_c(t) * w2;
  g.translation = v_mat * u;
  return g;
}

inline Pose<SE2> expmap(const Twist<SE2>& xi, double s = 1.0) {
  const double t = s * xi(2);
  const double at = std::abs(t);
  const double a = detail::coef_a(at);
  const double tb = t * detail::coef_b(at);
  Pose<SE2> g;
  g.rotation << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  Eigen::Matrix2d v_mat;
  v_mat << a, -tb, tb, a;
  g.translation = v_mat * (s * xi.head<2>());
  return g;
}

// --- logarithm (principal branch; rotation angle must stay below pi) ---

inline Twist<SE3> logmap(const Pose<SE3>& g) {
  const double c = std::clamp((g.rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double t = std::acos(c);
  if (t > M_PI - 1e-9) {
    throw BranchError("logmap: rotation angle at pi, principal branch ambiguous");
  }
  Eigen::Vector3d phi;
  const Eigen::Matrix3d d = g.rotation - g.rotation.transpose();
  phi << d(2, 1), d(0, 2), d(1, 0);
  phi *= 1.0 / (2.0 * detail::coef_a(t));
  const Eigen::Matrix3d w = skew3(phi);
  const Eigen::Matrix3d v_inv = Eigen::Matrix3d::Identity() - 0.5 * w +
                                detail::coef_vinv(t) * (w * w);
  Twist<SE3> xi;
  xi.head<3>() = v_inv * g.translation;
  xi.tail<3>() = phi;
  return xi;
}

inline Twist<SE2> logmap(const Pose<SE2>& g) {
  const double t = std::atan2(g.rotation(1, 0), g.rotation(0, 0));
  if (std::abs(t) > M_PI - 1e-9) {
    throw BranchError("logmap: rotation angle at pi, principal branch ambiguous");
  }
  const double at = std::abs(t);
  const double a = detail::coef_a(at);
  const double tb = t * detail::coef_b(at);
  const double det = a * a + tb * tb;
  Eigen::Matrix2d v_inv;
  v_inv << a, tb, -tb, a;
  v_inv /= det;
  Twist<SE2> xi;
  xi.head<2>() = v_inv * g.translation;
  xi(2) = t;
  return xi;
}

// --- Adjoint ---

inline AdjointMatrix<SE3> adjoint(const Pose<SE3>& g) {
  AdjointMatrix<SE3> ad = AdjointMatrix<SE3>::Zero();
  ad.topLeftCorner<3, 3>() = g.rotation;
  ad.bottomRightCorner<3, 3>() = g.rotation;
  ad.topRightCorner<3, 3>() = skew3(g.translation) * g.rotation;
  return ad;
}

inline AdjointMatrix<SE2> adjoint(const Pose<SE2>& g) {
  AdjointMatrix<SE2> ad = AdjointMatrix<SE2>::Identity();
  ad.topLeftCorner<2, 2>() = g.rotation;
  ad(0, 2) = g.translation.y();
  ad(1, 2) = -g.translation.x();
  return ad;
}

}  // namespace twistarm

#endif  // TWISTARM_LIEGROUP_HPP
