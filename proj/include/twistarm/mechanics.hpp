#ifndef TWISTARM_MECHANICS_HPP
#define TWISTARM_MECHANICS_HPP

#include <Eigen/Dense>

#include "twistarm/cross_section.hpp"
#include "twistarm/rod.hpp"

namespace twistarm {

struct ArityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Local wrench f = K (xi - xi0).
template <class G>
Twist<G> local_wrench(const Twist<G>& xi, const Twist<G>& xi0,
                      const Stiffness& k) {
  return k.diagonal<G>().asDiagonal() * (xi - xi0);
}

// Elastic energy of one rod, U = 1/2 (xi - xi0)^T K (xi - xi0).
template <class G>
double rod_energy(const Twist<G>& xi, const Twist<G>& xi0,
                  const Stiffness& k) {
  const Twist<G> d = xi - xi0;
  return 0.5 * d.dot(k.diagonal<G>().asDiagonal() * d);
}

// Total energy over all actuators, each seen through its Adjoint map from the
// base-curve twist: sum_i U(Ad_oi^-1 xi_o, l_i e1).
template <class G>
double total_energy(const ManipulatorDesign<G>& design, const Twist<G>& xi_o,
                    const Eigen::VectorXd& lengths) {
  if (lengths.size() != design.actuator_count()) {
    throw ArityError("total_energy: " + std::to_string(lengths.size()) +
                     " lengths for " + std::to_string(design.actuator_count()) +
                     " actuators");
  }
  double u = 0.0;
  const auto adjoints = actuator_adjoints(design);
  for (int i = 0; i < design.actuator_count(); ++i) {
    u += rod_energy<G>(adjoints[i] * xi_o, neutral_twist<G>(lengths(i)),
                       design.stiffness);
  }
  return u;
}

// Assembled linear equilibrium map A xi* = D l.
template <class G>
struct EquilibriumSystem {
  AdjointMatrix<G> a = AdjointMatrix<G>::Zero();
  Eigen::Matrix<double, G::kDof, Eigen::Dynamic> d;
  ManipulatorDesign<G> design;
};

// A = sum_i Ad_oi^-T K Ad_oi^-1, D columns = Ad_oi^-T K e1.
template <class G>
EquilibriumSystem<G> assemble(const ManipulatorDesign<G>& design) {
  EquilibriumSystem<G> sys;
  sys.design = design;
  const int n = design.actuator_count();
  sys.d.resize(G::kDof, n);
  const Twist<G> k_diag = design.stiffness.template diagonal<G>();
  const auto adjoints = actuator_adjoints(design);
  for (int i = 0; i < n; ++i) {
    const AdjointMatrix<G>& ad_inv = adjoints[i];
    sys.a += ad_inv.transpose() * k_diag.asDiagonal() * ad_inv;
    sys.d.col(i) = ad_inv.transpose() * (k_diag.asDiagonal() * Twist<G>::Unit(0));
  }
  // Symmetrize away roundoff; A is symmetric PSD by construction.
  sys.a = ((sys.a + sys.a.transpose()) / 2.0).eval();
  return sys;
}

// Minimum-norm least-squares solve xi* = A^+ D l. K_tau = 0 makes A genuinely
// singular for untilted designs, so the pseudo-inverse uses an SVD with a
// relative cutoff.
template <class G>
Twist<G> solve_equilibrium(const EquilibriumSystem<G>& sys,
                           const Eigen::VectorXd& lengths) {
  if (lengths.size() != sys.d.cols()) {
    throw ArityError("solve_equilibrium: " + std::to_string(lengths.size()) +
                     " lengths for " + std::to_string(sys.d.cols()) +
                     " actuators");
  }
  for (Eigen::Index i = 0; i < lengths.size(); ++i) {
    if (!(lengths(i) > 0.0)) {
      throw InvalidLengthError("solve_equilibrium: nonpositive length at index " +
                               std::to_string(i));
    }
  }
  Eigen::JacobiSVD<AdjointMatrix<G>> svd(
      sys.a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  Twist<G> rhs_u = svd.matrixU().transpose() * (sys.d * lengths);
  for (int i = 0; i < G::kDof; ++i) {
    rhs_u(i) = sv(i) > cutoff ? rhs_u(i) / sv(i) : 0.0;
  }
  return svd.matrixV() * rhs_u;
}

}  // namespace twistarm

#endif  // TWISTARM_MECHANICS_HPP
