#include <algorithm>
#include <cmath>
#include <random>

#include "harness.hpp"

namespace hepp {

namespace {

const char* kExampleHamiltonian = "a* a + (0.5) (a* a)(a* a)";

class Ledger {
 public:
  explicit Ledger(InvariantLedger& out) : out_(out) {}
  // Passes when residual <= bound.
  void check(const std::string& id, double residual, double bound) {
    out_.rows.push_back({id, residual, bound, residual <= bound ? "PASS" : "FAIL"});
  }
  void skip(const std::string& id, double bound) { out_.rows.push_back({id, 0.0, bound, "SKIPPED"}); }

 private:
  InvariantLedger& out_;
};

std::vector<Word> all_words(int k) {
  std::vector<Word> out;
  for (int mask = 0; mask < (1 << k); ++mask) {
    Word w;
    for (int i = 0; i < k; ++i) w.push_back((mask >> i) & 1 ? Letter::ThetaStar : Letter::Theta);
    out.push_back(w);
  }
  return out;
}

double max_coeff_diff(const NcPoly& a, const NcPoly& b) {
  double m = 0;
  const NcPoly d = a - b;
  for (const auto& [w, c] : d.terms()) m = std::max(m, std::abs(c));
  return m;
}

double max_coeff_diff(const CPoly& a, const CPoly& b) {
  double m = 0;
  for (const auto& [k, c] : a.terms()) {
    auto it = b.terms().find(k);
    m = std::max(m, std::abs(c - (it == b.terms().end() ? cplx{} : it->second)));
  }
  for (const auto& [k, c] : b.terms())
    if (!a.terms().count(k)) m = std::max(m, std::abs(c));
  return m;
}

void ncpoly_checks(Ledger& L, std::mt19937_64& rng) {
  double anti = 0, symbol = 0, submult = 0, recon = 0, sym = 0, oracle = 0;
  std::uniform_real_distribution<double> re(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const NcPoly p = random_poly(rng, 4, false), q = random_poly(rng, 4, false);
    const NcPoly pq = p * q;
    anti = std::max(anti, max_coeff_diff(pq.involution(), q.involution() * p.involution()));
    symbol = std::max(symbol, max_coeff_diff(pq.symbol(), p.symbol() * q.symbol()));
    submult = std::max(submult, pq.l1_norm() - p.l1_norm() * q.l1_norm());

    const cplx alpha{re(rng), re(rng)};
    NcPoly sum;
    for (const auto& part : p.shift_expand(alpha)) sum += part;
    recon = std::max(recon, max_coeff_diff(sum.shifted(-alpha), p));

    const NcPoly s = random_poly(rng, 4, true);
    for (const auto& part : s.shift_expand(alpha))
      for (const auto& [w, c] : part.terms())
        sym = std::max(sym, std::abs(c - std::conj(part.coeff(involution(w)))));

    const double hbar = i % 2 ? 0.3 : 1.0;
    oracle = std::max(oracle, normal_order_defect(p, hbar, 24));
  }
  L.check("ncpoly.involution_antihomomorphism", anti, 1e-12);
  L.check("ncpoly.symbol_homomorphism", symbol, 1e-12);
  L.check("ncpoly.l1_submultiplicative", std::max(0.0, submult), 1e-12);
  L.check("ncpoly.shift_reconstruction", recon, 1e-12);
  L.check("ncpoly.shift_preserves_symmetry", sym, 1e-12);
  L.check("ncpoly.normal_order_oracle", oracle, 1e-10);
}

void classical_checks(Ledger& L, std::mt19937_64& rng) {
  const ClassicalSystem sys = build_system(NcPoly::parse(kExampleHamiltonian));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double fd = 0;
  const double eps = 1e-5;
  for (int i = 0; i < 100; ++i) {
    cplx a;
    do a = cplx{2 * u(rng), 2 * u(rng)};
    while (std::abs(a) > 2.0);
    const double hx = (sys.h_cl.eval(a + eps).real() - sys.h_cl.eval(a - eps).real()) / (2 * eps);
    const double hy =
        (sys.h_cl.eval(a + cplx{0, eps}).real() - sys.h_cl.eval(a - cplx{0, eps}).real()) / (2 * eps);
    const cplx expected = cplx{0, -1} * 0.5 * cplx{hx, hy};
    fd = std::max(fd, std::abs(vector_field(sys, a) - expected));
  }
  L.check("classical.vector_field_finite_difference", fd, 1e-6);

  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(0.1 * i);
  const cplx a0{1.0};
  const Trajectory traj = integrate(sys, a0, grid, 1e-10);
  const double e0 = traj.energy(0.0);
  double det = 0, drift = 0;
  for (const auto& s : traj.samples()) {
    det = std::max(det, std::abs(std::norm(s.gamma) - std::norm(s.delta) - 1.0));
    drift = std::max(drift, std::abs(traj.energy(s.t) - e0));
  }
  L.check("classical.symplectic_determinant", det, 1e-8);
  L.check("classical.energy_drift", drift, 1e-8 * (1.0 + std::abs(e0)));

  double flow = 0;
  const double h = 1e-5;
  for (cplx z : {cplx{1, 0}, cplx{0, 1}}) {
    const Trajectory plus = integrate(sys, a0 + h * z, grid, 1e-12);
    const Trajectory minus = integrate(sys, a0 - h * z, grid, 1e-12);
    for (std::size_t i = 0; i < grid.size(); i += 10) {
      const FlowState s = traj.at(grid[i]);
      const cplx diff = (plus.at(grid[i]).alpha - minus.at(grid[i]).alpha) / (2 * h);
      flow = std::max(flow, std::abs(diff - (s.gamma * z + s.delta * std::conj(z))));
    }
  }
  L.check("classical.flow_differential", flow, 1e-4);
}

void fock_checks(Ledger& L, std::mt19937_64& rng, const SuiteOptions& opts) {
  const int kmax = 4;
  for (int M : opts.sizes) {
    const std::string sfx = "@M=" + std::to_string(M);
    if (M < kmax + 2) {
      for (const char* id : {"fock.ccr", "fock.ccr_hbar", "fock.diagonal_shift", "fock.coefficient_bound",
                             "fock.norm_bound", "fock.truncated_norm_bound", "fock.tail_bound",
                             "fock.commutator_bound"})
        L.skip(std::string(id) + sfx, 0.0);
      continue;
    }
    Ladder lad = ladder_matrices(M);
    if (opts.fault_injection) {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (Eigen::Index i = 0; i + 1 <= M; ++i) lad.a(i, i + 1) += 1e-3 * (1.0 + 0.5 * u(rng));
      lad.a_dag = lad.a.adjoint();
    }
    const Mat comm = lad.a * lad.a_dag - lad.a_dag * lad.a;
    const Mat id = Mat::Identity(M - 1, M - 1);
    L.check("fock.ccr" + sfx, (comm.topLeftCorner(M - 1, M - 1) - id).norm(), 1e-12);
    const double hbar = 0.3;
    const Mat ah = monomial_matrix({Letter::Theta}, M, hbar), ahd = monomial_matrix({Letter::ThetaStar}, M, hbar);
    L.check("fock.ccr_hbar" + sfx, ((ah * ahd - ahd * ah).topLeftCorner(M - 1, M - 1) - hbar * id).norm(), 1e-12);

    int diag_bad = 0;
    double coeff = 0, norm341 = 0, norm351 = 0, tail355 = 0, comm347 = 0;
    std::normal_distribution<double> g;
    for (int k = 1; k <= kmax; ++k) {
      for (const Word& w : all_words(k)) {
        const int shift = index_shift(w);
        const Mat mono = monomial_matrix(w, M, 1.0);
        const auto diags = occupied_diagonals(mono);
        if (!(diags.empty() || (diags.size() == 1 && *diags.begin() == shift))) ++diag_bad;

        const LadderCoeff c = monomial_coeff(w);
        for (long n = 0; n <= M; ++n) {
          const double v = c(n);
          const double cap = std::pow(static_cast<double>(n + c.q), 0.5 * k);
          coeff = std::max(coeff, std::max(-v, v - cap * (1 + 1e-12)));
        }

        const Mat exact = level_truncation(NcPoly(w), M, 1.0);
        const double ell = std::abs(shift);
        for (int beta = 0; beta <= 2; ++beta) {
          const double kk = std::pow(k, 0.5 * k);
          const double b341 = kk * std::pow(k + 1.0, beta);
          norm341 = std::max(norm341, op_norm(exact, beta + 0.5 * k, beta) / b341);
          const double b351 = std::pow(M + k, 0.5 * k) * std::pow(1.0 + ell, beta);
          norm351 = std::max(norm351, op_norm(exact, beta, beta) / b351);

          const int big = 2 * M + k;
          const Mat full = level_truncation(NcPoly(w), big, 1.0);
          const Mat tail = full - truncate(full, M);
          for (double extra : {0.0, 1.0}) {
            const double aw = beta + 0.5 * k + extra;
            const double b355 = tail_bound(k, beta, aw, M);
            tail355 = std::max(tail355, op_norm(tail, aw, beta) / b355);
          }

          const int lim = interior_limit(w, M);
          if (lim >= 0) {
            Vec phi = Vec::Zero(M + 1);
            for (int n = 0; n <= lim; ++n) phi(n) = cplx{g(rng), g(rng)};
            const Vec up = number_weights(M, beta), down = number_weights(M, -beta);
            const Vec lhs = up.cwiseProduct(exact * down.cwiseProduct(phi)) - exact * phi;
            const double rhs = beta * kk * ell * std::pow(1.0 + ell, std::abs(beta - 1.0)) *
                               number_weights(M, 0.5 * k - 1.0).cwiseProduct(phi).norm();
            const double scale = std::max(rhs, 1e-12 * (exact * phi).norm());
            comm347 = std::max(comm347, scale > 0 ? lhs.norm() / scale : lhs.norm() > 0 ? 1e300 : 0.0);
          }
        }
      }
    }
    L.check("fock.diagonal_shift" + sfx, diag_bad, 0.0);
    L.check("fock.coefficient_bound" + sfx, std::max(0.0, coeff), 0.0);
    L.check("fock.norm_bound" + sfx, norm341, 1.0 + 1e-12);
    L.check("fock.truncated_norm_bound" + sfx, norm351, 1.0 + 1e-12);
    L.check("fock.tail_bound" + sfx, tail355, 1.0 + 1e-12);
    L.check("fock.commutator_bound" + sfx, comm347, 1.0 + 1e-12);
  }
}

void evolution_checks(Ledger& L, std::mt19937_64& rng, const SuiteOptions& opts) {
  const int M = opts.sizes.empty() ? 60 : std::max(8, *std::max_element(opts.sizes.begin(), opts.sizes.end()));
  const NcPoly h = NcPoly::parse(kExampleHamiltonian);
  const ClassicalSystem sys = build_system(h);
  const Trajectory traj = integrate(sys, cplx{1.0}, {0.0, 5.0}, 1e-10);
  const SpectralPropagator spec(level_truncation(h, M, 0.1), 0.1);
  StepPolicy policy;
  policy.max_step = 0.01;
  const auto w0 = quadratic_evolution(sys, traj, M, policy);

  std::uniform_real_distribution<double> u(0.0, 5.0);
  const Mat id = Mat::Identity(M + 1, M + 1);
  double unit_s = 0, unit_w = 0, comp_s = 0, comp_w = 0, inv_s = 0, inv_w = 0;
  for (int i = 0; i < 20; ++i) {
    const double t = u(rng), s = u(rng), r = u(rng);
    const Mat us = spec.matrix(t, s), uw = w0->matrix(t, s);
    unit_s = std::max(unit_s, (us.adjoint() * us - id).norm());
    unit_w = std::max(unit_w, (uw.adjoint() * uw - id).norm());
    comp_s = std::max(comp_s, (us * spec.matrix(s, r) - spec.matrix(t, r)).norm());
    comp_w = std::max(comp_w, (uw * w0->matrix(s, r) - w0->matrix(t, r)).norm());
    inv_s = std::max(inv_s, (spec.matrix(s, t) - us.adjoint()).norm());
    inv_w = std::max(inv_w, (w0->matrix(s, t) - uw.adjoint()).norm());
  }
  L.check("evolution.spectral_unitarity", unit_s, 1e-8);
  L.check("evolution.spectral_composition", comp_s, 1e-7);
  L.check("evolution.spectral_inverse", inv_s, 1e-12);
  L.check("evolution.stepped_unitarity", unit_w, 1e-8);
  L.check("evolution.stepped_composition", comp_w, 1e-7);
  L.check("evolution.stepped_inverse", inv_w, 1e-8);

  // Vacuum-sector derivative checks at t = 0.7.
  const double t = 0.7, eps = 1e-4;
  auto gen = [&](double x) { return level_truncation(quadratic_part(sys, traj.at(x).alpha), M, 1.0); };
  const Vec omega = basis_state(0, M);
  const Vec mid = w0->apply(t, 0.0, omega);
  const Vec fd = (w0->apply(t + eps, 0.0, omega) - w0->apply(t - eps, 0.0, omega)) / (2 * eps);
  const Vec expected = cplx{0, -1} * (gen(t) * mid);
  L.check("evolution.generator_consistency", (fd - expected).norm() / expected.norm(), 1e-4);

  const Ladder lad = ladder_matrices(M);
  auto heis = [&](double x) {
    const Mat w = w0->matrix(x, 0.0);
    return Vec(w.adjoint() * (lad.a * (w * omega)));
  };
  const Vec dh = (heis(t + eps) - heis(t - eps)) / (2 * eps);
  const Mat g = gen(t);
  const Vec rhs = cplx{0, 1} * (w0->matrix(t, 0.0).adjoint() * ((g * lad.a - lad.a * g) * mid));
  L.check("evolution.heisenberg_derivative", (dh - rhs).norm() / std::max(1e-300, rhs.norm()), 1e-4);

  const int bm = 300, block = 5;
  const Trajectory short_traj = integrate(sys, cplx{1.0}, {0.0, 2.0}, 1e-10);
  StepPolicy coarse;
  coarse.max_step = 0.02;
  const auto wb = quadratic_evolution(sys, short_traj, bm, coarse);
  double bog = 0;
  for (double x : {0.5, 1.0, 2.0}) {
    bog = std::max(bog, bogoliubov_residual(short_traj, *wb, x, block, false));
    bog = std::max(bog, bogoliubov_residual(short_traj, *wb, x, block, true));
  }
  L.check("evolution.bogoliubov_law@M=300", bog, 1e-5);
}

void correlator_checks(Ledger& L, std::mt19937_64& rng) {
  const int M = 80;
  const double hbar = 0.1;
  const cplx alpha{0.5, -0.3};
  std::normal_distribution<double> g;
  Vec psi = Vec::Zero(M + 1);
  for (int n = 0; n < 4; ++n) psi(n) = cplx{g(rng), g(rng)};
  psi /= psi.norm();
  const Vec phi = WeylFactory(M).apply(alpha, hbar, psi);
  double ident = 0;
  for (int i = 0; i < 10; ++i) {
    const NcPoly p = random_poly(rng, 4, false);
    const cplx lhs = phi.dot(level_truncation(p.shifted(-alpha / std::sqrt(hbar)), M, 1.0) * phi);
    const cplx rhs = psi.dot(level_truncation(p, M, 1.0) * psi);
    ident = std::max(ident, std::abs(lhs - rhs));
  }
  L.check("correlators.exact_identity", ident, 1e-8);

  const ClassicalSystem sys = build_system(NcPoly::parse(kExampleHamiltonian));
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.5 * i);
  const Trajectory traj = integrate(sys, cplx{1.0}, grid, 1e-10);
  const MultiPoly comm = MultiPoly::parse("a1 a1* - a1* a1");
  double ccr = 0;
  const Vec vac = basis_state(0, 8);
  for (double t : grid)
    ccr = std::max(ccr, std::abs(fluctuation_expectation(comm, traj, {t}, vac, 1.0, FluctuationMode::CenteredScaled) -
                                 1.0));
  L.check("correlators.fluctuation_ccr", ccr, 1e-8);
}

void harness_checks(Ledger& L, std::mt19937_64& rng) {
  std::vector<std::pair<double, double>> lin, root, noisy;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    lin.emplace_back(h, h);
    root.emplace_back(h, std::sqrt(h));
    noisy.emplace_back(h, 3 * std::sqrt(h) * (1 + 0.01 * u(rng)));
  }
  L.check("harness.fit_linear", std::abs(fit_rate(lin).slope - 1.0), 1e-12);
  L.check("harness.fit_sqrt", std::abs(fit_rate(root).slope - 0.5), 1e-12);
  L.check("harness.fit_noisy", std::abs(fit_rate(noisy).slope - 0.5), 0.05);
}

}  // namespace

NcPoly random_poly(std::mt19937_64& rng, int max_degree, bool symmetric) {
  std::uniform_int_distribution<int> len(0, max_degree), pick(0, 1), count(1, 5);
  std::normal_distribution<double> g;
  NcPoly p;
  const int terms = count(rng);
  for (int i = 0; i < terms; ++i) {
    Word w;
    const int k = len(rng);
    for (int j = 0; j < k; ++j) w.push_back(pick(rng) ? Letter::ThetaStar : Letter::Theta);
    p.add_term(w, cplx{g(rng), g(rng)});
  }
  if (symmetric) p = (p + p.involution()) * cplx{0.5};
  return p;
}

double normal_order_defect(const NcPoly& p, double hbar, int M) {
  const int block = M - p.degree() + 1;
  if (block < 1) throw std::invalid_argument("normal_order_defect: cutoff below polynomial degree");
  const Mat direct = poly_matrix(p, M, hbar);
  const Mat ordered = poly_matrix(normal_order(p).specialize(hbar), M, hbar);
  return (direct - ordered).topLeftCorner(block, block).cwiseAbs().maxCoeff();
}

double tail_bound(int k, double beta, double alpha_weight, int M) {
  return std::pow(k, 0.5 * k) * std::pow(k + 1.0, beta) * std::pow(M - k + 2.0, beta + 0.5 * k - alpha_weight);
}

double bogoliubov_residual(const Trajectory& traj, const SteppedPropagator& w0, double t, int block,
                           bool creation) {
  const int M = w0.cutoff();
  const Ladder lad = ladder_matrices(M);
  const Mat u = w0.matrix(t, 0.0);
  const FlowState s = traj.at(t);
  Mat d;
  if (!creation)
    d = u.adjoint() * lad.a * u - (s.gamma * lad.a + s.delta * lad.a_dag);
  else
    d = u.adjoint() * lad.a_dag * u - (std::conj(s.delta) * lad.a + std::conj(s.gamma) * lad.a_dag);
  return d.topLeftCorner(block, block).norm();
}

InvariantLedger run_operator_inequalities(const SuiteOptions& opts) {
  InvariantLedger out;
  Ledger L(out);
  std::mt19937_64 rng(opts.seed);
  fock_checks(L, rng, opts);
  return out;
}

InvariantLedger run_invariant_suite(const SuiteOptions& opts) {
  InvariantLedger out;
  Ledger L(out);
  std::mt19937_64 rng(opts.seed);
  ncpoly_checks(L, rng);
  classical_checks(L, rng);
  fock_checks(L, rng, opts);
  evolution_checks(L, rng, opts);
  correlator_checks(L, rng);
  harness_checks(L, rng);
  return out;
}

}  // namespace hepp
