#include "test_util.hpp"

using namespace hepp;
using namespace testing;

namespace {

Trajectory harmonic_traj(cplx a0, std::vector<double> grid) {
  return integrate(build_system(NcPoly::parse("a* a")), a0, grid);
}

}  // namespace

TEST_SUITE("correlators") {
  TEST_CASE("multipoly parsing and degrees") {
    const MultiPoly p = MultiPoly::parse("a1 a2* + 2 a1*");
    CHECK(p.slot_count() == 2);
    CHECK(p.degree() == 2);
    CHECK(p.min_degree() == 1);
    bool constant = false;
    CHECK(MultiPoly::parse("4").min_degree(&constant) == 0);
    CHECK(constant);
    const MultiPoly s = MultiPoly::from_single(NcPoly::parse("a* a"), 2);
    CHECK(s.slot_count() == 2);
    CHECK(MultiPoly::parse(s.to_string()).terms() == s.terms());
  }

  TEST_CASE("harmonic heisenberg expectation") {
    const NcPoly h = NcPoly::parse("a* a");
    const cplx a0{1.0, 0.0};
    const HeppFamily fam(h, 0.1, 100, harmonic_traj(a0, {0.0, 1.0, 2.0}));
    const Vec vac = basis_state(0, 100);
    for (double t : {1.0, 2.0}) {
      const cplx v = heisenberg_expectation(MultiPoly::parse("a1"), fam, {t}, vac, false, false);
      CHECK(close(v, a0 * std::exp(cplx(0, -t)), 1e-6));
      const cplx c = heisenberg_expectation(MultiPoly::parse("a1"), fam, {t}, vac, true, true);
      CHECK(std::abs(c) < 1e-8);
    }
    for (bool center : {false, true})
      CHECK(close(heisenberg_expectation(MultiPoly::parse("(2.5)"), fam, {1.0}, vac, center, center), 2.5, 1e-12));
  }

  TEST_CASE("multi time expectation matches brute force") {
    const NcPoly h = NcPoly::parse(kExample);
    const double hbar = 0.1;
    const int M = 60;
    const cplx a0{0.5, 0.1};
    const Trajectory traj = integrate(build_system(h), a0, {0.0, 0.3, 0.8});
    const HeppFamily fam(h, hbar, M, traj);
    const Vec psi = (basis_state(0, M) + cplx(0, 1) * basis_state(1, M)) / std::sqrt(2.0);

    const Mat hop = level_truncation(h, M, hbar);
    const Mat ah = monomial_matrix({T}, M, hbar);
    auto heis = [&](double t) {
      const Mat u = exp_minus_i(hop, t / hbar);
      return Mat(u.adjoint() * ah * u);
    };
    const Vec phi = weyl(a0, hbar, M) * psi;
    const Mat a1 = heis(0.3), a2 = heis(0.8);
    const cplx expected = phi.dot(a1 * a2.adjoint() * phi) + 2.0 * phi.dot(a2 * phi);
    const cplx got = heisenberg_expectation(MultiPoly::parse("a1 a2* + 2 a2"), fam, {0.3, 0.8}, psi, false, false);
    CHECK(close(got, expected, 1e-9));

    // Centering by the classical path and rescaling by 1/sqrt(hbar).
    const cplx al1 = traj.at(0.3).alpha;
    const Mat c1 = (a1 - al1 * Mat::Identity(M + 1, M + 1)) / std::sqrt(hbar);
    const cplx centered = phi.dot(c1.adjoint() * c1 * phi);
    CHECK(close(heisenberg_expectation(MultiPoly::parse("a1* a1"), fam, {0.3}, psi, true, true), centered, 1e-9));
  }

  TEST_CASE("static exactness identity") {
    const NcPoly p = NcPoly::parse("a*^2 a + (0.5i) a a - (0.5i) a* a* + a* a");
    const double hbar = 0.05;
    const int M = 120;
    const Trajectory traj = integrate(build_system(NcPoly::parse(kExample)), 1.0, {0.0, 0.5});
    const HeppFamily fam(NcPoly::parse(kExample), hbar, M, traj);
    const Vec psi = (basis_state(1, M) - basis_state(2, M)) / std::sqrt(2.0);
    const cplx lhs = heisenberg_expectation(MultiPoly::from_single(p), fam, {0.0}, psi, true, true);
    const cplx rhs = psi.dot(poly_matrix(p, M, 1.0) * psi);
    CHECK(close(lhs, rhs, 1e-8));
  }

  TEST_CASE("fluctuation expectations") {
    const Trajectory traj = integrate(build_system(NcPoly::parse(kExample)), 1.0, {0.0, 0.5, 1.0});
    const Vec vac = basis_state(0, 30);
    for (double t : {0.5, 1.0}) {
      const FlowState s = traj.at(t);
      const cplx comm = fluctuation_expectation(MultiPoly::parse("a1 a1* - a1* a1"), traj, {t}, vac, 1.0,
                                                FluctuationMode::CenteredScaled);
      CHECK(close(comm, 1.0, 1e-8));
      const cplx shifted =
          fluctuation_expectation(MultiPoly::parse("a1"), traj, {t}, vac, 0.2, FluctuationMode::Shifted);
      CHECK(close(shifted, s.alpha, 1e-12));
      const cplx num = fluctuation_expectation(MultiPoly::parse("a1* a1"), traj, {t}, vac, 0.2,
                                               FluctuationMode::CenteredScaled);
      CHECK(close(num, 0.2 * std::norm(s.delta), 1e-10));
    }
  }

  TEST_CASE("classical value") {
    const Trajectory traj = harmonic_traj(1.0, {0.0, 0.4, 1.1});
    const cplx v = classical_value(MultiPoly::parse("a1 a2*"), traj, {0.4, 1.1});
    CHECK(close(v, std::exp(cplx(0, -0.4)) * std::exp(cplx(0, 1.1)), 1e-8));
    CHECK(close(classical_value(MultiPoly::parse("(3-1i)"), traj, {0.4}), cplx(3, -1), 0));
    const Trajectory rest = harmonic_traj(0.0, {0.0, 1.0});
    CHECK(std::abs(classical_value(MultiPoly::parse("a1 a1* + a1"), rest, {1.0})) == 0);
  }

  TEST_CASE("variance") {
    const cplx alpha{0.6, -0.3};
    const double hbar = 0.1;
    const int M = 80;
    const Vec vac = basis_state(0, M);
    CHECK(variance(NcPoly::parse("a* a"), hbar, M, alpha, vac) == doctest::Approx(hbar * std::norm(alpha)).epsilon(1e-8));
    CHECK(std::abs(variance(NcPoly(1.0), hbar, M, alpha, vac)) < 1e-12);
    const NcPoly q = NcPoly::parse("a + a*") * cplx(1 / std::sqrt(2.0));
    CHECK(variance(q, hbar, M, 0.0, vac) == doctest::Approx(hbar / 2));
    CHECK_THROWS_AS(variance(NcPoly::parse("a"), hbar, M, 0.0, vac), std::invalid_argument);
  }

  TEST_CASE("tail monitor") {
    TailMonitor t;
    t.epsilon = 1e-6;
    t.margin = 2;
    Vec v = Vec::Zero(11);
    v(0) = 1;
    t.observe(v);
    CHECK(!t.flagged());
    v(10) = 1e-3;
    t.observe(v);
    CHECK(t.flagged());
  }

  TEST_CASE("auto cutoff") {
    CHECK(auto_cutoff(1.0, 0.1, 4) == 200);
    CHECK(auto_cutoff(1.0, 0.1, 4, 8.0) == 400);
    CHECK(auto_cutoff(0.0, 1.0, 2) == 80);
  }
}
