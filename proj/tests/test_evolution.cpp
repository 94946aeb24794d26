#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "test_util.hpp"

using namespace hepp;
using namespace testing;

namespace {

Mat number_phase(int M, double t) {
  Vec d(M + 1);
  for (int n = 0; n <= M; ++n) d(n) = std::polar(1.0, -n * t);
  return d.asDiagonal();
}

Mat random_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return (a + a.adjoint()) / 2.0;
}

double unitarity_defect(const Mat& u) { return (u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).norm(); }

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("hermitian eigen on dense input") {
    std::mt19937_64 rng(3);
    const Mat h = random_hermitian(rng, 30);
    const HermitianEigen e = hermitian_eigen(h);
    Eigen::SelfAdjointEigenSolver<Mat> ref(h);
    CHECK((e.values - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint() - h).norm() < 1e-11);
  }

  TEST_CASE("block decoupled eigen matches dense") {
    // Parity sectors for a quartic generator, single entries for a diagonal one.
    for (const char* text : {kQuartic, kExample, "a a + a* a* + a* a"}) {
      const Mat h = level_truncation(NcPoly::parse(text), 40, 0.2);
      const HermitianEigen e = hermitian_eigen(h);
      Eigen::SelfAdjointEigenSolver<Mat> ref(h);
      CHECK((e.values - ref.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10 * (1 + ref.eigenvalues().cwiseAbs().maxCoeff()));
      for (Eigen::Index i = 1; i < e.values.size(); ++i) CHECK(e.values(i - 1) <= e.values(i));
      CHECK(unitarity_defect(e.vectors) < 1e-11);
      const Mat back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
      CHECK((back - h).norm() < 1e-10 * (1 + h.norm()));
      const Mat u = exp_minus_i(h, 0.7);
      const Mat oracle = (cplx(0, -0.7) * h).exp();
      CHECK((u - oracle).norm() < 1e-9);
    }
  }

  TEST_CASE("spectral propagator") {
    const int M = 10;
    const SpectralPropagator p(poly_matrix(NcPoly::parse("a* a"), M, 1.0), 1.0);
    CHECK((p.apply(M_PI, 0, basis_state(1, M)) + basis_state(1, M)).norm() < 1e-12);
    CHECK((p.matrix(1.3, 1.3) - Mat::Identity(M + 1, M + 1)).norm() < 1e-13);
    Vec psi = Vec::Random(M + 1);
    CHECK((p.apply(0, 2.1, p.apply(2.1, 0, psi)) - psi).norm() < 1e-12);
    CHECK(p.kind() == Propagator::Kind::TimeIndependent);
    CHECK(p.cutoff() == M);
    CHECK_THROWS_AS(SpectralPropagator(ladder_matrices(4).a, 1.0), NotHermitian);
  }

  TEST_CASE("spectral propagator scales with hbar") {
    const Mat h = level_truncation(NcPoly::parse(kExample), 20, 0.25);
    const SpectralPropagator p(h, 0.25);
    CHECK((p.matrix(0.6, 0.1) - (cplx(0, -0.5 / 0.25) * h).exp()).norm() < 1e-10);
  }

  TEST_CASE("weyl operator") {
    const int M = 60;
    CHECK((weyl(0.0, 0.3, M) - Mat::Identity(M + 1, M + 1)).norm() < 1e-12);
    const Mat u = weyl(1.0, 1.0, M);
    CHECK(unitarity_defect(u) < 1e-9);
    double fact = 1;
    for (int n = 0; n <= M - 10; ++n) {
      if (n) fact *= n;
      CHECK(std::abs(u(n, 0) - std::exp(-0.5) / std::sqrt(fact)) < 1e-8);
    }
    const cplx alpha{0.4, -0.9};
    const double hbar = 0.5;
    const Mat v = weyl(alpha, hbar, M);
    CHECK((weyl(-alpha, hbar, M) - v.adjoint()).norm() < 1e-10);

    // Matrix exponential at a larger cutoff as oracle on the leading block.
    const int big = 160;
    const Ladder l = ladder_matrices(big);
    const Mat gen = (alpha * l.a_dag - std::conj(alpha) * l.a) / std::sqrt(hbar);
    const Mat oracle = gen.exp();
    CHECK((v.topLeftCorner(20, 20) - oracle.topLeftCorner(20, 20)).norm() < 1e-8);

    const WeylFactory f(M);
    const Vec psi = basis_state(3, M);
    CHECK((f.apply(alpha, hbar, psi) - v * psi).norm() < 1e-12);
  }

  TEST_CASE("weyl translation law") {
    const int M = 80;
    const double hbar = 0.2;
    const cplx alpha{0.5, 0.3};
    const Mat u = weyl(alpha, hbar, M);
    const Mat ah = monomial_matrix({T}, M, hbar);
    const Mat lhs = u.adjoint() * ah * u;
    const Mat rhs = ah + alpha * Mat::Identity(M + 1, M + 1);
    CHECK((lhs - rhs).topLeftCorner(30, 30).norm() < 1e-8);
  }

  TEST_CASE("infeasible displacement") {
    const WeylFactory f(20);
    CHECK_NOTHROW(f.check(2.0, 1.0));
    try {
      f.check(3.0, 1.0);
      FAIL("expected infeasible cutoff");
    } catch (const InfeasibleCutoff& e) {
      CHECK(e.required_cutoff() == 36);
    }
    CHECK(required_cutoff(1.0, 0.1) == 40);
    CHECK_THROWS_AS(f.check(1.0, 0.0), std::invalid_argument);
  }

  TEST_CASE("stepped propagator with constant generator") {
    const Mat h = level_truncation(NcPoly::parse(kQuartic), 24, 0.5) / 0.5;
    const SteppedPropagator s([h](double) { return h; }, 24, -1.0, 3.0);
    const SpectralPropagator ref(h, 1.0);
    for (auto [t, u] : {std::pair{2.5, 0.0}, {-0.7, 1.9}, {3.0, -1.0}})
      CHECK((s.matrix(t, u) - ref.matrix(t, u)).norm() < 1e-8);
    CHECK(s.kind() == Propagator::Kind::TimeDependent);
    CHECK(s.max_unitarity_defect() < 1e-10);
  }

  TEST_CASE("zero generator is the identity") {
    const SteppedPropagator s([](double) { return Mat(Mat::Zero(6, 6)); }, 5, 0.0, 2.0);
    CHECK((s.matrix(1.7, 0.2) - Mat::Identity(6, 6)).norm() < 1e-14);
  }

  TEST_CASE("time dependent generator against a fine oracle") {
    // G(t) = N + t (a + a*): compare composed short-step exponentials.
    const int M = 16;
    const Mat n = poly_matrix(NcPoly::parse("a* a"), M, 1.0);
    const Mat x = poly_matrix(NcPoly::parse("a + a*"), M, 1.0);
    const SteppedPropagator s([&](double t) { return Mat(n + t * x); }, M, 0.0, 1.0);
    Mat oracle = Mat::Identity(M + 1, M + 1);
    const int steps = 4000;
    const double dt = 1.0 / steps;
    for (int k = 0; k < steps; ++k) oracle = (cplx(0, -dt) * (n + (k + 0.5) * dt * x)).exp() * oracle;
    CHECK((s.matrix(1.0, 0.0) - oracle).norm() < 1e-6);
    CHECK(unitarity_defect(s.matrix(0.37, 0.81)) < 1e-9);
    CHECK((s.matrix(0.9, 0.4) * s.matrix(0.4, 0.1) - s.matrix(0.9, 0.1)).norm() < 1e-9);
  }

  TEST_CASE("truncated evolution of the harmonic quadratic part") {
    const ClassicalSystem sys = build_system(NcPoly::parse("a* a"));
    const Trajectory traj = integrate(sys, cplx(0.7, 0.2), {0.0, 2.0});
    const auto w0 = quadratic_evolution(sys, traj, 20);
    CHECK((w0->matrix(1.6, 0.0) - number_phase(20, 1.6)).norm() < 1e-9);
    CHECK((w0->matrix(0.0, 0.0) - Mat::Identity(21, 21)).norm() < 1e-14);
    const auto u = truncated_evolution([](double) { return NcPoly::parse("a* a"); }, 0.5, 20, 0.0, 2.0);
    CHECK((u->matrix(2.0, 0.0) - number_phase(20, 2.0)).norm() < 1e-9);
  }

  TEST_CASE("hepp family") {
    const int M = 120;
    const NcPoly h = NcPoly::parse("a* a");
    const Trajectory traj = integrate(build_system(h), 1.0, {0.0, 1.0, 2.0});
    const HeppFamily fam(h, 0.1, M, traj);
    CHECK((fam.matrix(0.0) - Mat::Identity(M + 1, M + 1)).norm() < 1e-9);
    for (double t : {1.0, 2.0}) {
      for (int n : {0, 2}) {
        const Vec psi = basis_state(n, M);
        CHECK((fam.apply(t, psi) - number_phase(M, t) * psi).norm() < 1e-6);
      }
      CHECK(std::abs(fam.phase(t)) < 1e-8);
    }
    CHECK_THROWS_AS(HeppFamily(h, 0.01, 20, traj), InfeasibleCutoff);
  }

  TEST_CASE("hepp family approaches the quadratic evolution") {
    const NcPoly h = NcPoly::parse(kExample);
    const ClassicalSystem sys = build_system(h);
    const Trajectory traj = integrate(sys, 1.0, {0.0, 1.0});
    const auto w0 = quadratic_evolution(sys, traj, 120);
    const Vec vac = basis_state(0, 120);
    const Vec target = w0->apply(1.0, 0.0, vac);
    double prev = 1.0;
    for (double hbar : {0.1, 0.05}) {
      const HeppFamily fam(h, hbar, 120, traj);
      const double e = (fam.apply(1.0, vac) - target).norm();
      CHECK(e > 0);
      CHECK(e < prev);
      prev = e;
    }
  }

  TEST_CASE("l hbar generator") {
    const NcPoly n = NcPoly::parse("a* a");
    CHECK(l_hbar_generator(n, cplx(0.3, 1.1), 0.07) == n);
    const NcPoly q = NcPoly::parse(kQuartic);
    const NcPoly l0 = l_hbar_generator(q, 0.0, 0.2);
    for (const auto& [w, c] : (l0 - q * cplx(0.2)).terms()) CHECK(std::abs(c) < 1e-15);
    const cplx a{0.4, -0.2};
    const auto parts = q.shift_expand(a);
    const NcPoly l1 = l_hbar_generator(q, a, 1.0);
    NcPoly sum;
    for (std::size_t k = 2; k < parts.size(); ++k) sum += parts[k];
    for (const auto& [w, c] : (l1 - sum).terms()) CHECK(std::abs(c) < 1e-14);
    CHECK(l1.is_symmetric(1e-13));
  }
}
