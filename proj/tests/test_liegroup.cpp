#include <catch_amalgamated.hpp>

#include <random>

#include "twistarm/liegroup.hpp"
#include "twistarm/validate.hpp"

using namespace twistarm;

namespace {

Twist<SE3> translation_twist(double x, double y, double z) {
  Twist<SE3> xi = Twist<SE3>::Zero();
  xi.head<3>() << x, y, z;
  return xi;
}

}  // namespace

TEST_CASE("compose: identity and inverse") {
  std::mt19937_64 rng(1);
  const Pose<SE3> g = oracle::random_pose(rng);
  CHECK(pose_distance(compose(Pose<SE3>::Identity(), g), g) < 1e-14);
  CHECK(pose_distance(compose(g, g.inverse()), Pose<SE3>::Identity()) < 1e-12);
}

TEST_CASE("compose: commuting translations") {
  const Pose<SE3> a = expmap(translation_twist(1, 0, 0));
  const Pose<SE3> b = expmap(translation_twist(0, 2, 0));
  const Pose<SE3> c = compose(a, b);
  CHECK(c.translation.isApprox(Eigen::Vector3d(1, 2, 0)));
  CHECK(c.rotation.isIdentity(1e-15));
}

TEST_CASE("compose: matrix form matches matrix product") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const Pose<SE3> a = oracle::random_pose(rng);
    const Pose<SE3> b = oracle::random_pose(rng);
    CHECK((compose(a, b).matrix() - a.matrix() * b.matrix()).norm() < 1e-12);
  }
}

TEST_CASE("group axioms on random samples") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Pose<SE3> a = oracle::random_pose(rng);
    const Pose<SE3> b = oracle::random_pose(rng);
    const Pose<SE3> c = oracle::random_pose(rng);
    CHECK(pose_distance(compose(compose(a, b), c), compose(a, compose(b, c))) <
          1e-12);
    CHECK(pose_distance(compose(a.inverse(), a), Pose<SE3>::Identity()) <
          1e-12);
  }
}

TEST_CASE("rotation invariants hold on random poses") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Pose<SE3> g = oracle::random_pose(rng);
    CHECK((g.rotation.transpose() * g.rotation - Eigen::Matrix3d::Identity())
              .norm() < 1e-12);
    CHECK(std::abs(g.rotation.determinant() - 1.0) < 1e-12);
    CHECK(g.matrix().row(3).isApprox(Eigen::RowVector4d(0, 0, 0, 1)));
  }
}

TEST_CASE("exp: neutral straight rod is pure translation") {
  const double l = 0.46;
  Twist<SE3> xi = Twist<SE3>::Zero();
  xi(0) = l;
  const Pose<SE3> g = expmap(xi, 1.0);
  CHECK(g.rotation.isIdentity(1e-15));
  CHECK(g.translation.isApprox(Eigen::Vector3d(l, 0, 0)));
}

TEST_CASE("exp: zero exponent gives identity") {
  std::mt19937_64 rng(5);
  const Twist<SE3> xi = oracle::random_twist(rng);
  CHECK(pose_distance(expmap(xi, 0.0), Pose<SE3>::Identity()) < 1e-15);
}

TEST_CASE("exp matches dense scaling-and-squaring matrix exponential") {
  Twist<SE3> half_turn = Twist<SE3>::Zero();
  half_turn(5) = M_PI;
  CHECK((expmap(half_turn).matrix() - oracle::dense_expm(hat(half_turn)))
            .norm() < 1e-10);

  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const Twist<SE3> xi = oracle::random_twist(rng);
    CHECK((expmap(xi).matrix() - oracle::dense_expm(hat(xi))).norm() < 1e-10);
  }
}

TEST_CASE("exp series branch covers tiny rotation magnitudes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> expo(-12.0, -6.0);
  for (int i = 0; i < 100; ++i) {
    Twist<SE3> xi = oracle::random_twist(rng);
    xi.tail<3>() = xi.tail<3>().normalized() * std::pow(10.0, expo(rng));
    CHECK((expmap(xi).matrix() - oracle::dense_expm(hat(xi))).norm() < 1e-10);
    CHECK((logmap(expmap(xi)) - xi).norm() < 1e-9);
  }
}

TEST_CASE("log: identity, translation, and roundtrip") {
  CHECK(logmap(Pose<SE3>::Identity()).norm() == 0.0);

  const Pose<SE3> shift = expmap(translation_twist(0.1, -0.2, 0.3));
  const Twist<SE3> xi = logmap(shift);
  CHECK(xi.head<3>().isApprox(Eigen::Vector3d(0.1, -0.2, 0.3)));
  CHECK(xi.tail<3>().norm() == 0.0);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Twist<SE3> sample = oracle::random_twist(rng);  // |w| <= 3
    CHECK((logmap(expmap(sample)) - sample).norm() < 1e-9);
  }
}

TEST_CASE("log rejects rotations at the branch cut") {
  Twist<SE3> xi = Twist<SE3>::Zero();
  xi(5) = M_PI;
  CHECK_THROWS_AS(logmap(expmap(xi)), BranchError);
}

TEST_CASE("hat/vee roundtrip and structure") {
  CHECK(hat(Twist<SE3>::Zero().eval()).norm() == 0.0);

  std::mt19937_64 rng(9);
  const Twist<SE3> xi = oracle::random_twist(rng);
  CHECK((vee<SE3>(hat(xi)) - xi).norm() == 0.0);
  CHECK(hat(xi).row(3).norm() == 0.0);

  HomMatrix<SE3> bad = hat(xi);
  bad(3, 0) = 1.0;
  CHECK_THROWS_AS(vee<SE3>(bad), StructureError);
  HomMatrix<SE3> bad2 = hat(xi);
  bad2(0, 1) += 1.0;  // breaks skew symmetry
  CHECK_THROWS_AS(vee<SE3>(bad2), StructureError);
}

TEST_CASE("adjoint: identity, homomorphism, inverse") {
  CHECK(adjoint(Pose<SE3>::Identity()).isIdentity(1e-15));

  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const Pose<SE3> a = oracle::random_pose(rng);
    const Pose<SE3> b = oracle::random_pose(rng);
    CHECK((adjoint(compose(a, b)) - adjoint(a) * adjoint(b)).norm() < 1e-10);
    CHECK((adjoint(a.inverse()) - adjoint(a).inverse()).norm() < 1e-10);
  }
}

TEST_CASE("adjoint conjugation identity") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Pose<SE3> g = oracle::random_pose(rng);
    const Twist<SE3> xi = oracle::random_twist(rng);
    for (double s : {0.25, 0.5, 1.0}) {
      const Pose<SE3> lhs = expmap(Twist<SE3>(adjoint(g.inverse()) * xi), s);
      const Pose<SE3> rhs = compose(compose(g.inverse(), expmap(xi, s)), g);
      CHECK(pose_distance(lhs, rhs) < 1e-9);
    }
  }
}

TEST_CASE("SE2: exp/log/adjoint basics") {
  Twist<SE2> xi;
  xi << 0.4, 0.0, 2.0;
  CHECK((logmap(expmap(xi)) - xi).norm() < 1e-12);
  CHECK((vee<SE2>(hat(xi)) - xi).norm() == 0.0);
  CHECK((expmap(xi).matrix() - oracle::dense_expm(hat(xi))).norm() < 1e-12);

  // Offset (0, d) couples stretch into the curvature row with factor -d.
  Pose<SE2> mount;
  mount.translation << 0.0, 0.05;
  const AdjointMatrix<SE2> ad_inv = adjoint(mount.inverse());
  Twist<SE2> stretch;
  stretch << 1.0, 0.0, 0.0;
  const Twist<SE2> mapped = ad_inv.transpose() * stretch;
  CHECK(mapped(2) == Catch::Approx(-0.05).margin(1e-15));
}

TEST_CASE("SE2 conjugation identity") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Twist<SE2> a, b;
    a << uni(rng), uni(rng), 2.0 * uni(rng);
    b << uni(rng), uni(rng), 2.0 * uni(rng);
    const Pose<SE2> g = expmap(a);
    for (double s : {0.25, 0.5, 1.0}) {
      const Pose<SE2> lhs = expmap(Twist<SE2>(adjoint(g.inverse()) * b), s);
      const Pose<SE2> rhs = compose(compose(g.inverse(), expmap(b, s)), g);
      CHECK(pose_distance(lhs, rhs) < 1e-9);
    }
  }
}
