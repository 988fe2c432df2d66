#ifndef TWISTARM_CROSS_SECTION_HPP
#define TWISTARM_CROSS_SECTION_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "twistarm/contraction.hpp"
#include "twistarm/liegroup.hpp"

namespace twistarm {

struct InvalidGeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidStiffnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Diagonal Hookean stiffness. Linear entries in [N], angular in [N m^2].
// Diagonal layout follows the (v; omega) twist ordering:
// SE(3): (k_eps, k_gamma, k_gamma, k_tau, k_kappa, k_kappa)
// SE(2): (k_eps, k_gamma, k_kappa)
struct Stiffness {
  double k_eps = 1.0;
  double k_gamma = 10.0;
  double k_tau = 0.0;
  double k_kappa = 1.0;

  Stiffness() = default;
  Stiffness(double eps, double gamma, double tau, double kappa)
      : k_eps(eps), k_gamma(gamma), k_tau(tau), k_kappa(kappa) {
    if (!(k_eps > 0.0) || k_gamma < 0.0 || k_tau < 0.0 || k_kappa < 0.0) {
      throw InvalidStiffnessError(
          "Stiffness: entries must be nonnegative with k_eps > 0");
    }
  }

  template <class G>
  Twist<G> diagonal() const {
    Twist<G> d;
    if constexpr (std::is_same_v<G, SE3>) {
      d << k_eps, k_gamma, k_gamma, k_tau, k_kappa, k_kappa;
    } else {
      d << k_eps, k_gamma, k_kappa;
    }
    return d;
  }
};

// K_eps-normalized stiffness diag(1, 10, 10, 0, 0, k_kappa_bar). Shear fixed
// at 10x strain (stiffer shear has no further effect); torsion defaults to
// zero because the muscles rotate freely in their clamps.
inline Stiffness paper_stiffness(double k_kappa_bar) {
  if (k_kappa_bar < 0.0) {
    throw InvalidStiffnessError("paper_stiffness: negative bending stiffness");
  }
  return Stiffness(1.0, 10.0, 0.0, k_kappa_bar);
}

// Mounting transform of one actuator relative to the base-curve frame,
// identical at every cross-section along the arm.
template <class G>
struct ActuatorMount {
  Pose<G> transform = Pose<G>::Identity();
  std::string label;
};

// Retained construction parameters, used by the spec-file round trip.
struct DesignInfo {
  std::string kind = "explicit";  // planar | radial | helical | explicit
  double width_m = 0.0;
  double diameter_m = 0.0;
  int count = 0;
  double tilt_rad = 0.0;
};

// Uniform-cross-section manipulator: one mount transform per actuator applied
// at every s, a shared per-actuator stiffness, and an optional contraction
// model mapping pressure to neutral length.
template <class G>
struct ManipulatorDesign {
  std::vector<ActuatorMount<G>> mounts;
  Stiffness stiffness;
  std::optional<ContractionModel> contraction;
  DesignInfo info;

  int actuator_count() const { return static_cast<int>(mounts.size()); }
};

// Two actuators at transverse offsets +/- d in the plane, x along the rod.
inline ManipulatorDesign<SE2> planar_design(double width_2d,
                                            Stiffness k = Stiffness{}) {
  if (!(width_2d > 0.0)) {
    throw InvalidGeometryError("planar_design: width must be positive");
  }
  const double d = width_2d / 2.0;
  ManipulatorDesign<SE2> design;
  design.stiffness = k;
  design.info.kind = "planar";
  design.info.width_m = width_2d;
  design.info.count = 2;
  for (int i = 0; i < 2; ++i) {
    ActuatorMount<SE2> mount;
    mount.transform.translation << 0.0, (i == 0 ? d : -d);
    mount.label = "a" + std::to_string(i + 1);
    design.mounts.push_back(mount);
  }
  return design;
}

// n actuators on a circle of the given diameter in the y-z cross-section
// plane, azimuth measured from the body y-axis, x along the rod. A tilt
// rotates each mount about its local radial axis, winding the actuator
// helically about the base-curve.
inline ManipulatorDesign<SE3> helical_design(double diameter, int count,
                                             double tilt,
                                             Stiffness k = Stiffness{}) {
  if (!(diameter > 0.0) || count < 1 || !(std::abs(tilt) < M_PI / 2.0)) {
    throw InvalidGeometryError(
        "helical_design: need diameter > 0, count >= 1, |tilt| < pi/2");
  }
  const double r = diameter / 2.0;
  ManipulatorDesign<SE3> design;
  design.stiffness = k;
  design.info.kind = tilt == 0.0 ? "radial" : "helical";
  design.info.diameter_m = diameter;
  design.info.count = count;
  design.info.tilt_rad = tilt;
  for (int i = 0; i < count; ++i) {
    const double az = 2.0 * M_PI * i / count;
    const Eigen::Vector3d radial(0.0, std::cos(az), std::sin(az));
    ActuatorMount<SE3> mount;
    mount.transform.rotation =
        Eigen::AngleAxisd(tilt, radial).toRotationMatrix();
    mount.transform.translation = r * radial;
    mount.label = "a" + std::to_string(i + 1);
    design.mounts.push_back(mount);
  }
  return design;
}

inline ManipulatorDesign<SE3> radial_design(double diameter, int count,
                                            Stiffness k = Stiffness{}) {
  if (count < 2) {
    throw InvalidGeometryError("radial_design: need at least 2 actuators");
  }
  return helical_design(diameter, count, 0.0, k);
}

// Ad_oi^-1 per mount: maps the base-curve twist to the actuator twist.
template <class G>
std::vector<AdjointMatrix<G>> actuator_adjoints(
    const ManipulatorDesign<G>& design) {
  std::vector<AdjointMatrix<G>> out;
  out.reserve(design.mounts.size());
  for (const auto& mount : design.mounts) {
    out.push_back(adjoint(mount.transform.inverse()));
  }
  return out;
}

}  // namespace twistarm

#endif  // TWISTARM_CROSS_SECTION_HPP
