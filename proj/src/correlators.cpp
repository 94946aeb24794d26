#include "correlators.hpp"

#include <algorithm>
#include <cmath>

namespace hepp {

MultiPoly::MultiPoly(Terms terms) : terms_(std::move(terms)) {}

MultiPoly MultiPoly::parse(const std::string& text) { return MultiPoly(parse_slot_terms(text)); }

MultiPoly MultiPoly::from_single(const NcPoly& p, int slot) {
  Terms t;
  for (const auto& [w, c] : p.terms()) {
    SlotWord sw;
    for (auto l : w) sw.push_back({slot, l});
    t.emplace(sw, c);
  }
  return MultiPoly(std::move(t));
}

int MultiPoly::slot_count() const {
  int n = 0;
  for (const auto& [w, c] : terms_)
    for (const auto& l : w) n = std::max(n, l.slot);
  return n;
}

int MultiPoly::degree() const {
  int d = 0;
  for (const auto& [w, c] : terms_) d = std::max(d, static_cast<int>(w.size()));
  return d;
}

int MultiPoly::min_degree(bool* constant) const {
  int best = -1;
  for (const auto& [w, c] : terms_)
    if (!w.empty() && (best < 0 || static_cast<int>(w.size()) < best)) best = static_cast<int>(w.size());
  if (constant) *constant = best < 0;
  return best < 0 ? 0 : best;
}

std::string MultiPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [w, c] : terms_) {
    if (!s.empty()) s += " + ";
    if (w.empty() || c != cplx{1.0}) s += format_coeff(c);
    for (const auto& l : w) {
      if (!s.empty() && s.back() != ' ') s += ' ';
      s += "a" + std::to_string(l.slot) + (l.letter == Letter::ThetaStar ? "*" : "");
    }
  }
  return s;
}

void TailMonitor::observe(const Vec& v) {
  const Eigen::Index n = v.size();
  const Eigen::Index m = std::clamp<Eigen::Index>(margin < 0 ? n / 8 : margin, 1, n);
  const double total = v.norm();
  if (total == 0) return;
  max_tail = std::max(max_tail, v.tail(m).norm() / total);
}

namespace {

// Truncated ladder actions scaled by s.
Vec lower(const Vec& v, double s) {
  const Eigen::Index n = v.size();
  Vec r = Vec::Zero(n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) r(k) = s * std::sqrt(static_cast<double>(k + 1)) * v(k + 1);
  return r;
}

Vec raise(const Vec& v, double s) {
  const Eigen::Index n = v.size();
  Vec r = Vec::Zero(n);
  for (Eigen::Index k = 1; k < n; ++k) r(k) = s * std::sqrt(static_cast<double>(k)) * v(k - 1);
  return r;
}

void check_times(const MultiPoly& p, const std::vector<double>& times) {
  if (static_cast<int>(times.size()) < p.slot_count())
    throw std::invalid_argument("correlator uses slot " + std::to_string(p.slot_count()) + " but only " +
                                std::to_string(times.size()) + " times were given");
}

}  // namespace

cplx heisenberg_expectation(const MultiPoly& p, const HeppFamily& family, const std::vector<double>& times,
                            const Vec& psi, bool center, bool rescale, TailMonitor* tail) {
  check_times(p, times);
  const double hbar = family.hbar();
  const double root = std::sqrt(hbar);
  const double scale = rescale ? 1.0 / root : 1.0;
  const Vec phi = family.weyl().apply(family.trajectory().at(0.0).alpha, hbar, psi);
  if (tail) tail->observe(phi);
  cplx total{};
  for (const auto& [word, c] : p.terms()) {
    Vec v = phi;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      const double t = times[it->slot - 1];
      const cplx alpha = family.trajectory().at(t).alpha;
      Vec w = family.quantum().apply(t, 0.0, v);
      if (it->letter == Letter::Theta) {
        Vec r = lower(w, root);
        if (center) r -= alpha * w;
        w = r;
      } else {
        Vec r = raise(w, root);
        if (center) r -= std::conj(alpha) * w;
        w = r;
      }
      v = family.quantum().apply(0.0, t, w) * scale;
      if (tail) tail->observe(v);
    }
    total += c * phi.dot(v);
  }
  return total;
}

cplx fluctuation_expectation(const MultiPoly& p, const Trajectory& traj, const std::vector<double>& times,
                             const Vec& psi, double hbar, FluctuationMode mode, TailMonitor* tail) {
  check_times(p, times);
  const double root = std::sqrt(hbar);
  cplx total{};
  for (const auto& [word, c] : p.terms()) {
    Vec v = psi;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      const FlowState s = traj.at(times[it->slot - 1]);
      Vec r;
      if (it->letter == Letter::Theta) {
        r = s.gamma * lower(v, root) + s.delta * raise(v, root);
        if (mode == FluctuationMode::Shifted) r += s.alpha * v;
      } else {
        r = std::conj(s.delta) * lower(v, root) + std::conj(s.gamma) * raise(v, root);
        if (mode == FluctuationMode::Shifted) r += std::conj(s.alpha) * v;
      }
      v = std::move(r);
      if (tail) tail->observe(v);
    }
    total += c * psi.dot(v);
  }
  return total;
}

cplx classical_value(const MultiPoly& p, const Trajectory& traj, const std::vector<double>& times) {
  check_times(p, times);
  cplx total{};
  for (const auto& [word, c] : p.terms()) {
    cplx term = c;
    for (const auto& l : word) {
      const cplx alpha = traj.at(times[l.slot - 1]).alpha;
      term *= l.letter == Letter::Theta ? alpha : std::conj(alpha);
    }
    total += term;
  }
  return total;
}

double variance(const NcPoly& a, double hbar, int M, cplx alpha, const Vec& psi, TailMonitor* tail) {
  const double tol = 1e-12 * std::max(1.0, a.l1_norm());
  if (!a.is_symmetric(tol)) throw std::invalid_argument("variance: observable must be symmetric");
  const Mat op = level_truncation(a, M, hbar);
  const Vec phi = WeylFactory(M).apply(alpha, hbar, psi);
  const Vec a_phi = op * phi;
  if (tail) {
    tail->observe(phi);
    tail->observe(a_phi);
  }
  const double mean = phi.dot(a_phi).real();
  return a_phi.squaredNorm() - mean * mean;
}

int auto_cutoff(double alpha_max, double hbar, int degree, double kappa) {
  return static_cast<int>(std::ceil(kappa * (alpha_max * alpha_max / hbar + 10.0 * degree)));
}

}  // namespace hepp
