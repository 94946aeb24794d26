#pragma once

#include <vector>

#include "evolution.hpp"

namespace hepp {

// Noncommutative polynomial in the letters (slot i, theta) and (slot i, theta*).
class MultiPoly {
 public:
  using Terms = std::map<SlotWord, cplx>;

  MultiPoly() = default;
  explicit MultiPoly(Terms terms);
  static MultiPoly parse(const std::string& text);
  static MultiPoly from_single(const NcPoly& p, int slot = 1);

  const Terms& terms() const { return terms_; }
  int slot_count() const;
  int degree() const;
  int min_degree(bool* constant = nullptr) const;
  std::string to_string() const;

 private:
  Terms terms_;
};

struct TailMonitor {
  double epsilon = 1e-8;
  int margin = -1;  // < 0: M / 8
  double max_tail = 0;
  bool flagged() const { return max_tail > epsilon; }
  void observe(const Vec& v);
};

enum class FluctuationMode { CenteredScaled, Shifted };

struct CorrelatorResult {
  cplx lhs, rhs, classical;
  double residual = 0;
  double hbar = 0;
  std::vector<double> times;
  bool truncation_flag = false;
};

// <P({X_i})>_{U(alpha0) psi} with X_i the Heisenberg-picture ladder operators
// at times[i-1], optionally centered by alpha(t_i) and rescaled by 1/sqrt(hbar).
cplx heisenberg_expectation(const MultiPoly& p, const HeppFamily& family, const std::vector<double>& times,
                            const Vec& psi, bool center, bool rescale, TailMonitor* tail = nullptr);

// <P({[alpha(t_i) +] sqrt(hbar) a(t_i), ...})>_psi with a(t) = gamma a + delta a^dag.
cplx fluctuation_expectation(const MultiPoly& p, const Trajectory& traj, const std::vector<double>& times,
                             const Vec& psi, double hbar, FluctuationMode mode, TailMonitor* tail = nullptr);

cplx classical_value(const MultiPoly& p, const Trajectory& traj, const std::vector<double>& times);

double variance(const NcPoly& a, double hbar, int M, cplx alpha, const Vec& psi, TailMonitor* tail = nullptr);

// ceil(kappa (alpha_max^2 / hbar + 10 d)).
int auto_cutoff(double alpha_max, double hbar, int degree, double kappa = 4.0);

}  // namespace hepp
