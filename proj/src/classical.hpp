#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "ncpoly.hpp"

namespace hepp {

struct ClassicalSystem {
  NcPoly h;
  CPoly h_cl;      // symbol of h
  CPoly dh_dzbar;  // first Wirtinger derivative in conj(z)
  CPoly u_poly;    // second derivative in conj(z)
  CPoly v_poly;    // mixed derivative, real-valued
};

class AsymmetricHamiltonian : public std::invalid_argument {
 public:
  AsymmetricHamiltonian(const std::string& msg, std::vector<std::pair<Word, Word>> pairs)
      : std::invalid_argument(msg), pairs_(std::move(pairs)) {}
  const std::vector<std::pair<Word, Word>>& pairs() const { return pairs_; }

 private:
  std::vector<std::pair<Word, Word>> pairs_;
};

ClassicalSystem build_system(const NcPoly& h);

// d alpha / dt = -i dH/d(conj alpha).
cplx vector_field(const ClassicalSystem& sys, cplx alpha);

struct Linearization {
  cplx u;
  double v;
};
Linearization linearization_coeffs(const ClassicalSystem& sys, cplx alpha);

struct FlowState {
  double t = 0;
  cplx alpha;
  cplx gamma{1.0};
  cplx delta;
  double f = 0;
};

class StepUnderflow : public std::runtime_error {
 public:
  StepUnderflow(const std::string& msg, double last_good) : std::runtime_error(msg), last_good_(last_good) {}
  double last_good_time() const { return last_good_; }

 private:
  double last_good_;
};

class Trajectory {
 public:
  using State = std::array<double, 7>;

  // One accepted step with its continuous extension.
  struct Segment {
    double t0 = 0, h = 0;
    std::array<State, 5> rcont{};
  };

  Trajectory() = default;
  Trajectory(CPoly h_cl, std::vector<Segment> forward, std::vector<Segment> backward, FlowState origin,
             std::vector<double> grid);

  FlowState at(double t) const;
  const std::vector<FlowState>& samples() const { return samples_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double energy(double t) const;
  // sup |alpha| over all accepted step endpoints and samples.
  double alpha_max() const { return alpha_max_; }
  std::size_t step_count() const { return forward_.size() + backward_.size(); }

  void write_csv(std::ostream& os) const;

 private:
  CPoly h_cl_;
  std::vector<Segment> forward_, backward_;
  FlowState origin_;
  std::vector<FlowState> samples_;
  double t_min_ = 0, t_max_ = 0, alpha_max_ = 0;
};

Trajectory integrate(const ClassicalSystem& sys, cplx alpha0, const std::vector<double>& t_grid, double tol = 1e-10);

// max_t |alpha(t)|^2 / (c1 (H(alpha0) + c)); values <= 1 are consistent with
// the a-priori bound that holds under the growth hypothesis.
double alpha_bound_ratio(const Trajectory& traj, double c1, double c);

}  // namespace hepp
