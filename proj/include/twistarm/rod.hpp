#ifndef TWISTARM_ROD_HPP
#define TWISTARM_ROD_HPP

#include <utility>
#include <vector>

#include "twistarm/liegroup.hpp"

namespace twistarm {

struct InvalidLengthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidSamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Constant-twist rod: current twist, neutral twist from the actuator input,
// and the base pose g(0).
template <class G>
struct RodState {
  Twist<G> xi = Twist<G>::Zero();
  Twist<G> xi0 = Twist<G>::Zero();
  Pose<G> base_pose = Pose<G>::Identity();
};

// Deformation components are (stretch, shears..., torsion, curvatures...),
// the componentwise difference xi - xi0.
template <class G>
using DeformationVector = Twist<G>;

// Neutral twist of an actuator at free-contraction length l: l * e1.
template <class G>
Twist<G> neutral_twist(double l) {
  if (!(l > 0.0)) {
    throw InvalidLengthError("neutral_twist: length must be positive, got " +
                             std::to_string(l));
  }
  Twist<G> xi = Twist<G>::Zero();
  xi(0) = l;
  return xi;
}

template <class G>
DeformationVector<G> deformation(const RodState<G>& state) {
  return state.xi - state.xi0;
}

// Poses at s = 0, 1/(n-1), ..., 1 via g(s) = g(0) o exp(s xi).
template <class G>
std::vector<std::pair<double, Pose<G>>> sample_poses(const RodState<G>& state,
                                                     int n = 64) {
  if (n < 2) {
    throw InvalidSamplingError("sample_poses: need at least 2 samples");
  }
  std::vector<std::pair<double, Pose<G>>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    out.emplace_back(s, compose(state.base_pose, expmap(state.xi, s)));
  }
  return out;
}

}  // namespace twistarm

#endif  // TWISTARM_ROD_HPP
