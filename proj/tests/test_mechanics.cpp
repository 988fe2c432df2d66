#include <catch_amalgamated.hpp>

#include <random>

#include "twistarm/mechanics.hpp"
#include "twistarm/validate.hpp"

using namespace twistarm;

TEST_CASE("local_wrench is the diagonal spring law") {
  const Stiffness k(2.0, 5.0, 0.1, 0.3);
  const Twist<SE3> xi0 = neutral_twist<SE3>(0.4);
  CHECK(local_wrench<SE3>(xi0, xi0, k).norm() == 0.0);

  Twist<SE3> stretched = xi0;
  stretched(0) += 0.01;
  const Twist<SE3> f = local_wrench<SE3>(stretched, xi0, k);
  CHECK(f(0) == Catch::Approx(2.0 * 0.01));
  CHECK(f.tail<5>().norm() == 0.0);

  std::mt19937_64 rng(41);
  for (int i = 0; i < 50; ++i) {
    const Twist<SE3> a = oracle::random_twist(rng);
    const Twist<SE3> b = oracle::random_twist(rng);
    const Twist<SE3> d = a - b;
    const Twist<SE3> expected =
        (k.diagonal<SE3>().array() * d.array()).matrix();
    CHECK((local_wrench<SE3>(a, b, k) - expected).norm() < 1e-15);
  }
}

TEST_CASE("rod_energy is the half quadratic form") {
  const Stiffness k(3.0, 10.0, 0.0, 0.5);
  const Twist<SE3> xi0 = neutral_twist<SE3>(0.4);
  CHECK(rod_energy<SE3>(xi0, xi0, k) == 0.0);

  Twist<SE3> stretched = xi0;
  stretched(0) += 0.02;
  CHECK(rod_energy<SE3>(stretched, xi0, k) ==
        Catch::Approx(0.5 * 3.0 * 0.02 * 0.02));

  std::mt19937_64 rng(42);
  for (int i = 0; i < 50; ++i) {
    const Twist<SE3> a = oracle::random_twist(rng);
    const Twist<SE3> b = oracle::random_twist(rng);
    double expected = 0.0;
    const Twist<SE3> diag = k.diagonal<SE3>();
    for (int j = 0; j < 6; ++j) {
      expected += 0.5 * diag(j) * (a(j) - b(j)) * (a(j) - b(j));
    }
    CHECK(rod_energy<SE3>(a, b, k) == Catch::Approx(expected));
    CHECK(rod_energy<SE3>(a, b, k) >= 0.0);
  }
}

TEST_CASE("total_energy sums per-actuator energies through the Adjoints") {
  const auto design = radial_design(0.0508, 3, paper_stiffness(2e-4));
  const Eigen::VectorXd l = Eigen::VectorXd::Constant(3, 0.46);
  CHECK(total_energy(design, neutral_twist<SE3>(0.46), l) ==
        Catch::Approx(0.0).margin(1e-18));

  Eigen::VectorXd l2(2);
  l2 << 0.46, 0.40;
  const auto planar = planar_design(0.1016, paper_stiffness(2e-4));
  CHECK(total_energy(planar, neutral_twist<SE2>(0.43), l2) > 0.0);
  CHECK_THROWS_AS(total_energy(planar, neutral_twist<SE2>(0.43),
                               Eigen::VectorXd::Constant(3, 0.4)),
                  ArityError);

  // Independent per-actuator sum.
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    const auto c = validation::random_case(rng);
    const Twist<SE3> xi = oracle::random_twist(rng, 0.4, 1.5);
    double expected = 0.0;
    for (int a = 0; a < c.design.actuator_count(); ++a) {
      const AdjointMatrix<SE3> ad_inv =
          adjoint(c.design.mounts[a].transform.inverse());
      const Twist<SE3> diff =
          ad_inv * xi - c.lengths(a) * Twist<SE3>::Unit(0);
      expected += 0.5 * diff.dot(
          c.design.stiffness.diagonal<SE3>().asDiagonal() * diff);
    }
    CHECK(total_energy(c.design, xi, c.lengths) == Catch::Approx(expected));
  }
}

TEST_CASE("assemble: planar arm reproduces the analytic coordinate form") {
  for (double d : {0.0254, 0.0381, 0.0508}) {
    const Stiffness k = paper_stiffness(3e-4);
    const auto sys = assemble(planar_design(2.0 * d, k));
    Eigen::Matrix3d a_ref = Eigen::Vector3d(
        2.0 * k.k_eps, 2.0 * k.k_gamma,
        2.0 * k.k_kappa + 2.0 * k.k_eps * d * d).asDiagonal();
    Eigen::Matrix<double, 3, 2> d_ref;
    d_ref << k.k_eps, k.k_eps, 0.0, 0.0, -k.k_eps * d, k.k_eps * d;
    CHECK((sys.a - a_ref).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sys.d - d_ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("assemble: single identity mount gives A = K, D = K e1") {
  ManipulatorDesign<SE3> design;
  design.stiffness = Stiffness(1.0, 10.0, 0.2, 0.5);
  design.mounts.push_back({});
  const auto sys = assemble(design);
  CHECK((sys.a - AdjointMatrix<SE3>(
                     design.stiffness.diagonal<SE3>().asDiagonal()))
            .norm() < 1e-15);
  CHECK((sys.d.col(0) -
         design.stiffness.diagonal<SE3>().asDiagonal() * Twist<SE3>::Unit(0))
            .norm() < 1e-15);
}

TEST_CASE("assemble: coincident mounts sum stiffnesses") {
  ManipulatorDesign<SE3> design;
  design.stiffness = Stiffness(1.0, 10.0, 0.0, 0.5);
  for (int i = 0; i < 3; ++i) design.mounts.push_back({});
  const auto sys = assemble(design);
  CHECK((sys.a - AdjointMatrix<SE3>(
                     3.0 * design.stiffness.diagonal<SE3>().asDiagonal()))
            .norm() < 1e-15);
  for (int i = 0; i < 3; ++i) {
    CHECK(sys.d.col(i)(0) == Catch::Approx(1.0));
  }
}

TEST_CASE("assemble: A is symmetric positive semidefinite") {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 20; ++i) {
    const auto c = validation::random_case(rng);
    const auto sys = assemble(c.design);
    CHECK((sys.a - sys.a.transpose()).norm() < 1e-12);
    const Eigen::SelfAdjointEigenSolver<AdjointMatrix<SE3>> eig(sys.a);
    CHECK(eig.eigenvalues().minCoeff() > -1e-12 * eig.eigenvalues().maxCoeff());
  }
}

TEST_CASE("solve_equilibrium: planar symmetry and bending formula") {
  const double d = 0.0508, L = 0.43;
  const Stiffness k = paper_stiffness(3e-4);
  const auto sys = assemble(planar_design(2.0 * d, k));

  Eigen::VectorXd equal = Eigen::VectorXd::Constant(2, L);
  const Twist<SE2> straight = solve_equilibrium(sys, equal);
  CHECK(straight(0) == Catch::Approx(L).margin(1e-12));
  CHECK(std::abs(straight(2)) < 1e-12);

  const double delta = 0.015;
  Eigen::VectorXd unequal(2);
  unequal << L + delta, L - delta;
  const Twist<SE2> bent = solve_equilibrium(sys, unequal);
  const double expected =
      -2.0 * d * delta * k.k_eps / (2.0 * k.k_kappa + 2.0 * k.k_eps * d * d);
  CHECK(bent(0) == Catch::Approx(L).margin(1e-12));
  CHECK(bent(2) == Catch::Approx(expected).margin(1e-12));

  CHECK_THROWS_AS(solve_equilibrium(sys, Eigen::VectorXd::Constant(3, L)),
                  ArityError);
  Eigen::VectorXd bad(2);
  bad << L, -L;
  CHECK_THROWS_AS(solve_equilibrium(sys, bad), InvalidLengthError);
}

TEST_CASE("paper_stiffness: normalized diagonal and scale invariance") {
  const Stiffness k = paper_stiffness(0.0);
  CHECK((k.diagonal<SE3>() -
         (Twist<SE3>() << 1, 10, 10, 0, 0, 0).finished()).norm() == 0.0);
  CHECK(paper_stiffness(2.5e-4).k_eps == 1.0);
  CHECK_THROWS_AS(paper_stiffness(-1.0), InvalidStiffnessError);

  std::mt19937_64 rng(45);
  const auto c = validation::random_case(rng);
  const Twist<SE3> base = solve_equilibrium(assemble(c.design), c.lengths);
  for (double scale : {0.1, 1.0, 10.0}) {
    auto scaled = c.design;
    scaled.stiffness = Stiffness(
        scale * c.design.stiffness.k_eps, scale * c.design.stiffness.k_gamma,
        scale * c.design.stiffness.k_tau, scale * c.design.stiffness.k_kappa);
    const Twist<SE3> xi = solve_equilibrium(assemble(scaled), c.lengths);
    CHECK((xi - base).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("width-stiffness law: bending diagonal tracks 2Kk + 2Ke d^2") {
  const Stiffness k = paper_stiffness(5e-4);
  for (double d : {0.0254, 0.0381, 0.0508}) {
    const auto sys = assemble(planar_design(2.0 * d, k));
    CHECK(std::abs(sys.a(2, 2) -
                   (2.0 * k.k_kappa + 2.0 * k.k_eps * d * d)) < 1e-12);
  }
}

TEST_CASE("closed-form equilibrium matches the brute-force energy minimizer") {
  std::mt19937_64 rng(46);
  for (int i = 0; i < 10; ++i) {
    const auto c = validation::random_case(rng);
    std::string why;
    INFO(c.summary << " " << why);
    CHECK(validation::check_case_against_oracle(c, &why));
    CHECK(validation::check_stationarity(c, &why));
  }
}

TEST_CASE("helical single-muscle equilibrium agrees with the oracle") {
  const auto design =
      helical_design(0.0508, 3, 0.3, paper_stiffness(2e-4));
  Eigen::VectorXd l(3);
  l << 0.36, 0.46, 0.46;
  std::string why;
  INFO(why);
  CHECK(validation::check_case_against_oracle({design, l, "helical-1"}, &why));
  const Twist<SE3> xi = solve_equilibrium(assemble(design), l);
  CHECK(std::abs(xi(3)) > 1e-8);
  CHECK(xi.tail<2>().norm() > 1e-8);
}
