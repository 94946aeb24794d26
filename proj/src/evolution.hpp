#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "classical.hpp"
#include "fock.hpp"

namespace hepp {

struct HermitianEigen {
  Eigen::VectorXd values;
  Mat vectors;
};

// LAPACK zheevd on the upper triangle.
HermitianEigen hermitian_eigen(const Mat& h);
// exp(-i * scale * h) for Hermitian h.
Mat exp_minus_i(const Mat& h, double scale);

class NotHermitian : public std::invalid_argument {
 public:
  NotHermitian(const std::string& msg, double defect) : std::invalid_argument(msg), defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

class InfeasibleCutoff : public std::runtime_error {
 public:
  InfeasibleCutoff(const std::string& msg, int required) : std::runtime_error(msg), required_(required) {}
  int required_cutoff() const { return required_; }

 private:
  int required_;
};

class Propagator {
 public:
  enum class Kind { TimeIndependent, TimeDependent };
  virtual ~Propagator() = default;
  virtual Kind kind() const = 0;
  virtual int cutoff() const = 0;
  // U(t, s): the state at time t given the state at time s.
  virtual Mat matrix(double t, double s) const = 0;
  virtual Vec apply(double t, double s, const Vec& psi) const = 0;
};

// exp(-i H (t - s) / hbar) from one eigendecomposition.
class SpectralPropagator final : public Propagator {
 public:
  SpectralPropagator(const Mat& h, double hbar);
  Kind kind() const override { return Kind::TimeIndependent; }
  int cutoff() const override { return cutoff_of(eig_.vectors); }
  Mat matrix(double t, double s) const override;
  Vec apply(double t, double s, const Vec& psi) const override;
  const HermitianEigen& spectrum() const { return eig_; }
  double hbar() const { return hbar_; }

 private:
  HermitianEigen eig_;
  double hbar_;
};

// Hermitian generator G(t) of i dU/dt = G(t) U.
using Generator = std::function<Mat(double)>;

struct StepPolicy {
  double max_step = 1e-2;
  // When positive, also enforce step * ||G(t)|| <= norm_bound.
  double norm_bound = 0.0;
  // Memory budget for cached step-grid unitaries.
  double cache_megabytes = 256.0;
};

// Fourth-order commutator-free Magnus stepping on a uniform grid anchored at
// t = 0. U(t, s) = E(t) E(s)^* with E(t) = U(t, 0).
class SteppedPropagator final : public Propagator {
 public:
  SteppedPropagator(Generator g, int M, double t_lo, double t_hi, StepPolicy policy = {});
  Kind kind() const override { return Kind::TimeDependent; }
  int cutoff() const override { return M_; }
  Mat matrix(double t, double s) const override;
  Vec apply(double t, double s, const Vec& psi) const override;

  double step() const { return h_; }
  double max_unitarity_defect() const { return unitarity_defect_; }
  // One scheme step from t0 to t0 + dt.
  Mat step_matrix(double t0, double dt) const;

 private:
  Mat from_origin(double t) const;

  Generator gen_;
  int M_;
  double t_lo_, t_hi_, h_;
  int every_ = 1;
  std::vector<Mat> fwd_, bwd_;  // E(k * every * h) and E(-k * every * h)
  double unitarity_defect_ = 0;
};

// Displacement operators at a fixed cutoff from one eigendecomposition of
// i(a^dag - a); other directions follow by the phase rotation exp(i phi N).
class WeylFactory {
 public:
  explicit WeylFactory(int M, double safety = 4.0);
  int cutoff() const { return M_; }
  // Throws InfeasibleCutoff when |alpha|^2 / hbar > M / safety.
  void check(cplx alpha, double hbar) const;
  Mat matrix(cplx alpha, double hbar) const;
  Vec apply(cplx alpha, double hbar, const Vec& psi) const;

 private:
  int M_;
  double safety_;
  HermitianEigen eig_;
};

Mat weyl(cplx alpha, double hbar, int M);
int required_cutoff(double alpha_abs, double hbar, double safety = 4.0);

std::unique_ptr<SteppedPropagator> truncated_evolution(std::function<NcPoly(double)> gen, double hbar, int M,
                                                       double t_lo, double t_hi, StepPolicy policy = {});

// Degree-2 part of the shifted Hamiltonian at alpha.
NcPoly quadratic_part(const ClassicalSystem& sys, cplx alpha);

// W_0: generated by the degree-2 part of H shifted along the trajectory.
std::unique_ptr<SteppedPropagator> quadratic_evolution(const ClassicalSystem& sys, const Trajectory& traj, int M,
                                                       StepPolicy policy = {});

// sum_{k >= 2} hbar^{k/2 - 1} H_k(alpha).
NcPoly l_hbar_generator(const NcPoly& h, cplx alpha, double hbar);

class HeppFamily {
 public:
  HeppFamily(const NcPoly& h, double hbar, int M, Trajectory traj, double safety = 4.0);
  Vec apply(double t, const Vec& psi) const;
  Mat matrix(double t) const;
  double phase(double t) const { return traj_.at(t).f; }
  double hbar() const { return hbar_; }
  int cutoff() const { return M_; }
  const Trajectory& trajectory() const { return traj_; }
  const Mat& h_op() const { return h_op_; }
  const SpectralPropagator& quantum() const { return quantum_; }
  const WeylFactory& weyl() const { return weyl_; }

 private:
  double hbar_;
  int M_;
  Trajectory traj_;
  Mat h_op_;
  SpectralPropagator quantum_;
  WeylFactory weyl_;
};

}  // namespace hepp
