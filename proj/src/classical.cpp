#include "classical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace hepp {

ClassicalSystem build_system(const NcPoly& h) {
  const double tol = 1e-12 * std::max(1.0, h.l1_norm());
  if (auto bad = h.asymmetric_pairs(tol); !bad.empty()) {
    std::string msg = "Hamiltonian is not symmetric; offending word pairs:";
    for (const auto& [w, s] : bad) msg += " (" + word_to_string(w) + " | " + word_to_string(s) + ")";
    throw AsymmetricHamiltonian(msg, std::move(bad));
  }
  if (h.degree() < 2) throw std::invalid_argument("Hamiltonian must have degree >= 2");
  ClassicalSystem sys;
  sys.h = h;
  sys.h_cl = h.symbol();
  sys.dh_dzbar = sys.h_cl.derivative(0, 1);
  sys.u_poly = sys.h_cl.derivative(0, 2);
  sys.v_poly = sys.h_cl.derivative(1, 1);
  return sys;
}

cplx vector_field(const ClassicalSystem& sys, cplx alpha) { return cplx{0, -1} * sys.dh_dzbar.eval(alpha); }

Linearization linearization_coeffs(const ClassicalSystem& sys, cplx alpha) {
  return {sys.u_poly.eval(alpha), sys.v_poly.eval(alpha).real()};
}

namespace {

using State = Trajectory::State;

State pack(const FlowState& s) {
  return {s.alpha.real(), s.alpha.imag(), s.gamma.real(), s.gamma.imag(), s.delta.real(), s.delta.imag(), s.f};
}

FlowState unpack(double t, const State& y) {
  return {t, {y[0], y[1]}, {y[2], y[3]}, {y[4], y[5]}, y[6]};
}

State rhs(const ClassicalSystem& sys, const State& y) {
  const cplx alpha{y[0], y[1]}, gamma{y[2], y[3]}, delta{y[4], y[5]};
  const cplx minus_i{0, -1};
  const cplx alpha_dot = minus_i * sys.dh_dzbar.eval(alpha);
  const cplx u = sys.u_poly.eval(alpha);
  const double v = sys.v_poly.eval(alpha).real();
  const cplx gamma_dot = minus_i * (v * gamma + u * std::conj(delta));
  const cplx delta_dot = minus_i * (v * delta + u * std::conj(gamma));
  const double f_dot = sys.h_cl.eval(alpha).real() - (alpha * std::conj(alpha_dot)).imag();
  return {alpha_dot.real(), alpha_dot.imag(), gamma_dot.real(), gamma_dot.imag(),
          delta_dot.real(), delta_dot.imag(), f_dot};
}

// Dormand-Prince 5(4) tableau with the Hairer continuous extension.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

template <typename F>
State combine(const State& y, double h, F&& f) {
  State r;
  for (int i = 0; i < 7; ++i) r[i] = y[i] + h * f(i);
  return r;
}

std::vector<Trajectory::Segment> sweep(const ClassicalSystem& sys, const State& y_start, double t_end, double tol) {
  std::vector<Trajectory::Segment> segs;
  if (t_end == 0.0) return segs;
  const double dir = t_end > 0 ? 1.0 : -1.0;
  double t = 0.0;
  double h = dir * std::min(1e-2, std::abs(t_end));
  State y = y_start;
  State k1 = rhs(sys, y);
  int rejects_in_row = 0;
  while (dir * (t_end - t) > 0) {
    if (dir * (t + h - t_end) > 0) h = t_end - t;
    const State k2 = rhs(sys, combine(y, h, [&](int i) { return a21 * k1[i]; }));
    const State k3 = rhs(sys, combine(y, h, [&](int i) { return a31 * k1[i] + a32 * k2[i]; }));
    const State k4 = rhs(sys, combine(y, h, [&](int i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }));
    const State k5 = rhs(sys, combine(y, h, [&](int i) {
      return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
    }));
    const State k6 = rhs(sys, combine(y, h, [&](int i) {
      return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
    }));
    const State y1 = combine(y, h, [&](int i) {
      return a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i];
    });
    const State k7 = rhs(sys, y1);
    double err = 0;
    for (int i = 0; i < 7; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(y1[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / 7.0);
    if (!std::isfinite(err)) err = 1e10;
    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    if (err <= 1.0) {
      Trajectory::Segment s;
      s.t0 = t;
      s.h = h;
      for (int i = 0; i < 7; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        s.rcont[0][i] = y[i];
        s.rcont[1][i] = ydiff;
        s.rcont[2][i] = bspl;
        s.rcont[3][i] = ydiff - h * k7[i] - bspl;
        s.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      segs.push_back(s);
      t += h;
      y = y1;
      k1 = k7;
      h *= rejects_in_row ? std::min(fac, 1.0) : fac;
      rejects_in_row = 0;
    } else {
      h *= std::min(fac, 1.0);
      ++rejects_in_row;
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "step-size underflow after t = %.17g", t);
      throw StepUnderflow(buf, t);
    }
  }
  return segs;
}

State eval_segment(const Trajectory::Segment& s, double t) {
  const double th = (t - s.t0) / s.h, th1 = 1.0 - th;
  State y;
  for (int i = 0; i < 7; ++i)
    y[i] = s.rcont[0][i] + th * (s.rcont[1][i] + th1 * (s.rcont[2][i] + th * (s.rcont[3][i] + th1 * s.rcont[4][i])));
  return y;
}

}  // namespace

Trajectory::Trajectory(CPoly h_cl, std::vector<Segment> forward, std::vector<Segment> backward, FlowState origin,
                       std::vector<double> grid)
    : h_cl_(std::move(h_cl)), forward_(std::move(forward)), backward_(std::move(backward)), origin_(origin) {
  for (const auto& s : forward_) t_max_ = std::max(t_max_, s.t0 + s.h);
  for (const auto& s : backward_) t_min_ = std::min(t_min_, s.t0 + s.h);
  alpha_max_ = std::abs(origin_.alpha);
  for (const auto* segs : {&forward_, &backward_})
    for (const auto& s : *segs) {
      alpha_max_ = std::max(alpha_max_, std::hypot(s.rcont[0][0], s.rcont[0][1]));
      alpha_max_ = std::max(alpha_max_, std::abs(at(s.t0 + 0.5 * s.h).alpha));
      alpha_max_ = std::max(alpha_max_, std::abs(at(s.t0 + s.h).alpha));
    }
  for (double t : grid) samples_.push_back(at(t));
}

FlowState Trajectory::at(double t) const {
  if (t == 0.0) return origin_;
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  if (t > t_max_ + slack || t < t_min_ - slack) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "time %.17g outside trajectory range [%.17g, %.17g]", t, t_min_, t_max_);
    throw std::out_of_range(buf);
  }
  const auto& segs = t > 0 ? forward_ : backward_;
  const double dir = t > 0 ? 1.0 : -1.0;
  auto it = std::lower_bound(segs.begin(), segs.end(), t,
                             [dir](const Segment& s, double x) { return dir * (s.t0 + s.h) < dir * x; });
  if (it == segs.end()) --it;
  return unpack(t, eval_segment(*it, t));
}

double Trajectory::energy(double t) const { return h_cl_.eval(at(t).alpha).real(); }

void Trajectory::write_csv(std::ostream& os) const {
  os << "t,re_alpha,im_alpha,re_gamma,im_gamma,re_delta,im_delta,f,energy\n";
  char buf[512];
  for (const auto& s : samples_) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.alpha.real(),
                  s.alpha.imag(), s.gamma.real(), s.gamma.imag(), s.delta.real(), s.delta.imag(), s.f,
                  h_cl_.eval(s.alpha).real());
    os << buf;
  }
}

Trajectory integrate(const ClassicalSystem& sys, cplx alpha0, const std::vector<double>& t_grid, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("integrate: tolerance must be positive");
  if (std::find(t_grid.begin(), t_grid.end(), 0.0) == t_grid.end())
    throw std::invalid_argument("integrate: time grid must contain 0");
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw std::invalid_argument("integrate: time grid must be sorted");
  FlowState origin;
  origin.alpha = alpha0;
  const State y0 = pack(origin);
  auto fwd = sweep(sys, y0, t_grid.back(), tol);
  auto bwd = sweep(sys, y0, t_grid.front(), tol);
  return Trajectory(sys.h_cl, std::move(fwd), std::move(bwd), origin, t_grid);
}

double alpha_bound_ratio(const Trajectory& traj, double c1, double c) {
  const double e0 = traj.energy(0.0);
  return traj.alpha_max() * traj.alpha_max() / (c1 * (e0 + c));
}

}  // namespace hepp
