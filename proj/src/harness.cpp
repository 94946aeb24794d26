#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace hepp {

namespace {

NcPoly single_slot(const MultiPoly& p) {
  if (p.slot_count() > 1) throw std::invalid_argument("static study needs a single-slot observable");
  NcPoly out;
  for (const auto& [w, c] : p.terms()) {
    Word word;
    for (const auto& l : w) word.push_back(l.letter);
    out.add_term(word, c);
  }
  return out;
}

Vec initial_state(const SimConfig& cfg, int M) {
  Vec psi = Vec::Zero(M + 1);
  if (cfg.psi.empty()) {
    psi(0) = 1.0;
    return psi;
  }
  if (static_cast<int>(cfg.psi.size()) > M + 1)
    throw InfeasibleCutoff("initial state does not fit below the cutoff", static_cast<int>(cfg.psi.size()) - 1);
  for (std::size_t i = 0; i < cfg.psi.size(); ++i) psi(static_cast<Eigen::Index>(i)) = cfg.psi[i];
  return psi / psi.norm();
}

Vec padded(const Vec& v, Eigen::Index n) {
  Vec r = Vec::Zero(n);
  r.head(std::min(n, v.size())) = v.head(std::min(n, v.size()));
  return r;
}

int psi_length(const SimConfig& cfg) { return cfg.psi.empty() ? 1 : static_cast<int>(cfg.psi.size()); }

struct SweepContext {
  const SimConfig& cfg;
  const Study& study;
  NcPoly h;
  ClassicalSystem sys;
  Trajectory traj;
  std::vector<double> times;
  std::vector<Vec> w0_states;  // W0(t) psi at the w0 cutoff, per time
  bool w0_flag = false;
};

std::vector<ConvergenceRow> w_distance_rows(const SweepContext& ctx, double hbar, int M) {
  const SimConfig& cfg = ctx.cfg;
  HeppFamily family(ctx.h, hbar, M, ctx.traj);
  const Vec psi = initial_state(cfg, M);
  std::vector<ConvergenceRow> rows;
  for (std::size_t i = 0; i < ctx.times.size(); ++i) {
    TailMonitor tail{cfg.tail_eps};
    const Vec v = family.apply(ctx.times[i], psi);
    tail.observe(v);
    const Eigen::Index n = std::max(v.size(), ctx.w0_states[i].size());
    const double value = (padded(v, n) - padded(ctx.w0_states[i], n)).norm();
    rows.push_back({hbar, ctx.times[i], "w_distance", value, tail.flagged() || ctx.w0_flag});
  }
  return rows;
}

std::vector<ConvergenceRow> correlator_rows(const SweepContext& ctx, double hbar, int M) {
  const SimConfig& cfg = ctx.cfg;
  const Study& st = ctx.study;
  HeppFamily family(ctx.h, hbar, M, ctx.traj);
  const Vec psi = initial_state(cfg, M);
  std::vector<std::vector<double>> slot_sets;
  if (st.observable.slot_count() <= 1) {
    for (double t : ctx.times) slot_sets.push_back({t});
  } else {
    slot_sets.push_back(cfg.times);
  }
  const FluctuationMode mode = st.center ? FluctuationMode::CenteredScaled : FluctuationMode::Shifted;
  const double rhs_hbar = st.rescale ? 1.0 : hbar;
  std::vector<ConvergenceRow> rows;
  for (const auto& ts : slot_sets) {
    const double t = *std::max_element(ts.begin(), ts.end());
    TailMonitor tail{cfg.tail_eps};
    const cplx lhs = heisenberg_expectation(st.observable, family, ts, psi, st.center, st.rescale, &tail);
    const cplx rhs = fluctuation_expectation(st.observable, ctx.traj, ts, psi, rhs_hbar, mode, &tail);
    rows.push_back({hbar, t, "correlator_residual", std::abs(lhs - rhs), tail.flagged()});
    if (!st.center) {
      const cplx cl = classical_value(st.observable, ctx.traj, ts);
      rows.push_back({hbar, t, "classical_residual", std::abs(lhs - cl), tail.flagged()});
    }
  }
  return rows;
}

std::vector<ConvergenceRow> static_rows(const SweepContext& ctx, double hbar, int M) {
  const SimConfig& cfg = ctx.cfg;
  const NcPoly p = single_slot(ctx.study.observable);
  const Vec psi = initial_state(cfg, M);
  const cplx alpha = cfg.alpha0;
  const Vec phi = WeylFactory(M).apply(alpha, hbar, psi);
  TailMonitor tail{cfg.tail_eps};
  tail.observe(phi);

  const cplx plain = phi.dot(level_truncation(p, M, hbar) * phi);
  cplx value_at_alpha{};
  for (const auto& [w, c] : p.terms()) {
    cplx term = c;
    for (auto l : w) term *= l == Letter::Theta ? alpha : std::conj(alpha);
    value_at_alpha += term;
  }

  // (a_hbar - alpha) / sqrt(hbar) = a - alpha / sqrt(hbar).
  const NcPoly centered_p = p.shifted(-alpha / std::sqrt(hbar));
  const Vec centered = level_truncation(centered_p, M, 1.0) * phi;
  const cplx identity_lhs = phi.dot(centered);
  const cplx identity_rhs = psi.dot(level_truncation(p, M, 1.0) * psi);

  return {{hbar, 0.0, "exact_identity_residual", std::abs(identity_lhs - identity_rhs), tail.flagged()},
          {hbar, 0.0, "static_residual", std::abs(plain - value_at_alpha), tail.flagged()}};
}

std::string fit_label(const std::string& metric, double t, bool several_times) {
  if (!several_times) return metric;
  char buf[64];
  std::snprintf(buf, sizeof buf, "@t=%.17g", t);
  return metric + buf;
}

}  // namespace

Study Study::from_name(const std::string& name, const SimConfig& cfg) {
  Study s;
  if (name == "w_distance") {
    s.kind = StudyKind::WDistance;
  } else if (name == "correlator") {
    s.kind = StudyKind::Correlator;
    s.observable = MultiPoly::parse(cfg.observable);
    s.center = cfg.center;
    s.rescale = cfg.rescale;
  } else if (name == "static") {
    s.kind = StudyKind::Static;
    s.observable = MultiPoly::parse(cfg.observable);
  } else {
    throw ConfigError("unknown study '" + name + "' (expected w_distance, correlator or static)");
  }
  return s;
}

const FitEntry* ConvergenceReport::find_fit(const std::string& metric) const {
  for (const auto& f : fits)
    if (f.metric == metric) return &f;
  return nullptr;
}

std::vector<double> ConvergenceReport::values(const std::string& metric, double t) const {
  std::vector<std::pair<double, double>> v;
  for (const auto& r : rows)
    if (r.metric == metric && r.t == t) v.emplace_back(r.hbar, r.value);
  std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::vector<double> out;
  for (auto& [h, x] : v) out.push_back(x);
  return out;
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw FitRefused("rate fit needs at least 4 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [h, v] : points) {
    if (!(h > 0)) throw FitRefused("rate fit needs positive hbar");
    if (!(v > 0)) throw FitRefused("rate fit needs positive values");
    const double x = std::log(h), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(points.size());
  const double den = n * sxx - sx * sx;
  if (den == 0) throw FitRefused("rate fit needs distinct hbar values");
  RateFit f;
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  for (const auto& [h, v] : points) {
    const double r = std::log(v) - (f.slope * std::log(h) + f.intercept);
    f.sse += r * r;
  }
  return f;
}

int working_cutoff(const SimConfig& cfg, double alpha_max, double hbar, int degree) {
  if (cfg.cutoff_mode == CutoffMode::Fixed) return cfg.fixed_cutoff;
  return std::max(auto_cutoff(alpha_max, hbar, degree, cfg.kappa), psi_length(cfg) + 4 * degree);
}

ConvergenceReport run_convergence(const SimConfig& cfg, const Study& study) {
  cfg.validate();
  SweepContext ctx{cfg, study, NcPoly::parse(cfg.hamiltonian), {}, {}, {}, {}};
  ctx.sys = build_system(ctx.h);
  if (!cfg.skip_assumption_check) {
    const auto screen = check_assumption1(ctx.h, cfg.hbars, cfg.assumption_cutoffs);
    if (screen.verdict != "PASS")
      throw AssumptionNotMet("assumption screen verdict " + screen.verdict +
                             "; set skip_assumption_check = true to override");
  }

  ctx.times = cfg.times;
  std::sort(ctx.times.begin(), ctx.times.end());
  ctx.times.erase(std::unique(ctx.times.begin(), ctx.times.end()), ctx.times.end());
  if (study.kind == StudyKind::Static) ctx.times = {0.0};
  std::vector<double> grid = ctx.times;
  grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  ctx.traj = integrate(ctx.sys, cfg.alpha0, grid, cfg.ode_tol);

  if (study.kind == StudyKind::WDistance) {
    StepPolicy policy;
    policy.max_step = cfg.max_step;
    const int m0 = std::max(cfg.w0_cutoff, psi_length(cfg) + 8);
    auto w0 = quadratic_evolution(ctx.sys, ctx.traj, m0, policy);
    const Vec psi = initial_state(cfg, m0);
    TailMonitor tail{cfg.tail_eps};
    for (double t : ctx.times) {
      ctx.w0_states.push_back(w0->apply(t, 0.0, psi));
      tail.observe(ctx.w0_states.back());
    }
    ctx.w0_flag = tail.flagged();
  }

  const int degree = ctx.h.degree();
  const std::size_t n = cfg.hbars.size();
  std::vector<int> cutoffs(n);
  for (std::size_t i = 0; i < n; ++i) cutoffs[i] = working_cutoff(cfg, ctx.traj.alpha_max(), cfg.hbars[i], degree);

  std::vector<std::vector<ConvergenceRow>> results(n);
  std::vector<std::exception_ptr> errors(n);
  auto task = [&](std::size_t i) {
    try {
      switch (study.kind) {
        case StudyKind::WDistance: results[i] = w_distance_rows(ctx, cfg.hbars[i], cutoffs[i]); break;
        case StudyKind::Correlator: results[i] = correlator_rows(ctx, cfg.hbars[i], cutoffs[i]); break;
        case StudyKind::Static: results[i] = static_rows(ctx, cfg.hbars[i], cutoffs[i]); break;
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.concurrency), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) task(i);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ConvergenceReport report;
  report.cutoffs = cutoffs;
  for (auto& r : results) report.rows.insert(report.rows.end(), r.begin(), r.end());
  std::sort(report.rows.begin(), report.rows.end(), [](const ConvergenceRow& a, const ConvergenceRow& b) {
    if (a.hbar != b.hbar) return a.hbar < b.hbar;
    if (a.t != b.t) return a.t < b.t;
    return a.metric < b.metric;
  });

  std::map<std::string, std::map<double, std::vector<const ConvergenceRow*>>> groups;
  for (const auto& r : report.rows) groups[r.metric][r.t].push_back(&r);
  for (const auto& [metric, by_t] : groups) {
    for (const auto& [t, rows] : by_t) {
      FitEntry e;
      e.metric = fit_label(metric, t, by_t.size() > 1);
      std::vector<std::pair<double, double>> clean;
      bool all_small = true;
      for (const auto* r : rows) {
        if (r->truncation_flag) continue;
        clean.emplace_back(r->hbar, r->value);
        if (r->value > cfg.noise_floor) all_small = false;
      }
      if (!clean.empty() && all_small) {
        e.status = "below noise floor";
      } else if (clean.size() < 4) {
        e.status = "insufficient clean rows";
      } else {
        try {
          e.fit = fit_rate(clean);
          e.status = "ok";
        } catch (const FitRefused&) {
          e.status = "below noise floor";
        }
      }
      report.fits.push_back(e);
    }
  }
  return report;
}

AssumptionReport check_assumption1(const NcPoly& h, const std::vector<double>& hbars, std::vector<int> cutoffs) {
  const double tol = 1e-12 * std::max(1.0, h.l1_norm());
  if (!h.is_symmetric(tol)) throw AsymmetricHamiltonian("assumption screen needs a symmetric H", h.asymmetric_pairs(tol));
  if (cutoffs.size() < 2) throw std::invalid_argument("assumption screen needs at least two cutoffs");
  std::sort(cutoffs.begin(), cutoffs.end());
  const int d = std::max(1, h.degree());

  AssumptionReport report;
  bool any_fail = false, any_unstable = false;
  for (double hbar : hbars) {
    struct Level {
      int M;
      double min_eig, C, c[2];
    };
    std::vector<Level> levels;
    for (int M : cutoffs) {
      const int n = M - d + 1;
      if (n < 2) throw std::invalid_argument("assumption screen cutoff too small for deg(H)");
      Mat b = level_truncation(h, M, hbar).topLeftCorner(n, n);
      b = 0.5 * (b + b.adjoint()).eval();
      const HermitianEigen eig = hermitian_eigen(b);
      Level lv{M, eig.values(0), 0.0, {0.0, 0.0}};
      lv.C = std::max(0.0, 1.0 - lv.min_eig);
      for (int beta = 1; beta <= 2; ++beta) {
        Eigen::VectorXd s(n);
        for (int i = 0; i < n; ++i) s(i) = std::pow(eig.values(i) + lv.C, -0.5 * beta);
        const Mat root = eig.vectors * s.asDiagonal() * eig.vectors.adjoint();
        Eigen::VectorXd num(n);
        for (int i = 0; i < n; ++i) num(i) = std::pow(hbar * i, beta);
        Mat q = root * num.asDiagonal() * root;
        q = 0.5 * (q + q.adjoint()).eval();
        lv.c[beta - 1] = hermitian_eigen(q).values(n - 1);
      }
      levels.push_back(lv);
    }
    const Level& hi = levels[levels.size() - 1];
    const Level& lo = levels[levels.size() - 2];
    std::string verdict = "PASS";
    if (std::abs(hi.min_eig - lo.min_eig) > 1e-3 * (1.0 + std::abs(lo.min_eig))) {
      verdict = "FAIL";
    } else {
      for (int b = 0; b < 2; ++b) {
        const double a = hi.c[b], c = lo.c[b];
        if (!(a > 0 && c > 0) || std::max(a, c) > 2.0 * std::min(a, c)) verdict = "UNSTABLE";
      }
    }
    any_fail |= verdict == "FAIL";
    any_unstable |= verdict == "UNSTABLE";
    for (const auto& lv : levels)
      for (int beta = 1; beta <= 2; ++beta)
        report.records.push_back({hbar, lv.M, lv.min_eig, lv.C, beta, lv.c[beta - 1], verdict});
  }
  report.verdict = any_fail ? "FAIL" : any_unstable ? "UNSTABLE" : "PASS";
  return report;
}

bool InvariantLedger::all_passed() const {
  return std::none_of(rows.begin(), rows.end(), [](const InvariantRow& r) { return r.verdict == "FAIL"; });
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void emit_csv(const ConvergenceReport& r, std::ostream& os) {
  os << "hbar,t,metric,value,truncation_flag\n";
  for (const auto& row : r.rows)
    os << format_double(row.hbar) << ',' << format_double(row.t) << ',' << row.metric << ','
       << format_double(row.value) << ',' << (row.truncation_flag ? 1 : 0) << '\n';
  for (const auto& f : r.fits) {
    os << "# fit " << f.metric << ' ';
    if (f.status == "ok")
      os << format_double(f.fit.slope) << ' ' << format_double(f.fit.intercept) << ' ' << format_double(f.fit.sse);
    else
      os << "nan nan nan " << f.status;
    os << '\n';
  }
}

void emit_csv(const AssumptionReport& r, std::ostream& os) {
  os << "hbar,M,min_eig,C,beta,c_beta,verdict\n";
  for (const auto& x : r.records)
    os << format_double(x.hbar) << ',' << x.M << ',' << format_double(x.min_eig) << ',' << format_double(x.C) << ','
       << x.beta << ',' << format_double(x.c_beta) << ',' << x.verdict << '\n';
  if (!r.records.empty()) os << "# verdict " << r.verdict << " (" << r.caveat << ")\n";
}

void emit_csv(const InvariantLedger& r, std::ostream& os) {
  os << "invariant,max_residual,bound,verdict\n";
  for (const auto& x : r.rows)
    os << x.id << ',' << format_double(x.residual) << ',' << format_double(x.bound) << ',' << x.verdict << '\n';
}

namespace {

template <class Report>
void emit_to_path(const Report& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing", path);
  emit_csv(r, out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'", path);
}

}  // namespace

void emit_csv(const ConvergenceReport& r, const std::string& path) { emit_to_path(r, path); }
void emit_csv(const AssumptionReport& r, const std::string& path) { emit_to_path(r, path); }
void emit_csv(const InvariantLedger& r, const std::string& path) { emit_to_path(r, path); }

}  // namespace hepp
