#include "evolution.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hepp {

namespace {

HermitianEigen dense_eigen(const Mat& h) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  HermitianEigen e{Eigen::VectorXd(n), h};
  if (n == 0) return e;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                                         reinterpret_cast<lapack_complex_double*>(e.vectors.data()), n,
                                         e.values.data());
  if (info != 0) throw std::runtime_error("zheevd failed with info " + std::to_string(info));
  return e;
}

// Index sets of the connected components of the sparsity graph of h.
std::vector<std::vector<Eigen::Index>> decoupled_blocks(const Mat& h) {
  const Eigen::Index n = h.rows();
  std::vector<Eigen::Index> parent(n);
  for (Eigen::Index i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < c; ++r)
      if (h(r, c) != cplx{} || h(c, r) != cplx{}) parent[find(r)] = find(c);
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<Eigen::Index> slot(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Eigen::Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(i);
  }
  return blocks;
}

Mat gather(const Mat& h, const std::vector<Eigen::Index>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Mat b(k, k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index r = 0; r < k; ++r) b(r, c) = h(idx[r], idx[c]);
  return b;
}

}  // namespace

HermitianEigen hermitian_eigen(const Mat& h) {
  const auto blocks = decoupled_blocks(h);
  if (blocks.size() <= 1) return dense_eigen(h);
  const Eigen::Index n = h.rows();
  std::vector<std::pair<double, Vec>> pairs;
  pairs.reserve(n);
  for (const auto& idx : blocks) {
    const HermitianEigen e = dense_eigen(gather(h, idx));
    for (Eigen::Index j = 0; j < e.values.size(); ++j) {
      Vec v = Vec::Zero(n);
      for (std::size_t r = 0; r < idx.size(); ++r) v(idx[r]) = e.vectors(static_cast<Eigen::Index>(r), j);
      pairs.emplace_back(e.values(j), std::move(v));
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  HermitianEigen out{Eigen::VectorXd(n), Mat(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values(j) = pairs[j].first;
    out.vectors.col(j) = pairs[j].second;
  }
  return out;
}

namespace {

Mat reconstruct(const HermitianEigen& e, const Vec& diag) {
  return e.vectors * diag.asDiagonal() * e.vectors.adjoint();
}

Vec phases(const Eigen::VectorXd& lambda, double scale) {
  Vec d(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) d(i) = std::polar(1.0, -scale * lambda(i));
  return d;
}

void require_hermitian(const Mat& h, const char* who) {
  const double defect = hermitian_defect(h);
  if (defect > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: operator is not Hermitian (max asymmetry %.3e)", who, defect);
    throw NotHermitian(buf, defect);
  }
}

}  // namespace

Mat exp_minus_i(const Mat& h, double scale) {
  const auto blocks = decoupled_blocks(h);
  if (blocks.size() <= 1) {
    const HermitianEigen e = dense_eigen(h);
    return reconstruct(e, phases(e.values, scale));
  }
  Mat out = Mat::Zero(h.rows(), h.cols());
  for (const auto& idx : blocks) {
    const HermitianEigen e = dense_eigen(gather(h, idx));
    const Mat u = reconstruct(e, phases(e.values, scale));
    for (std::size_t c = 0; c < idx.size(); ++c)
      for (std::size_t r = 0; r < idx.size(); ++r)
        out(idx[r], idx[c]) = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return out;
}

// ---------------------------------------------------------------- spectral

SpectralPropagator::SpectralPropagator(const Mat& h, double hbar) : hbar_(hbar) {
  if (!(hbar > 0)) throw std::invalid_argument("spectral_propagator: hbar must be positive");
  require_hermitian(h, "spectral_propagator");
  eig_ = hermitian_eigen(h);
}

Mat SpectralPropagator::matrix(double t, double s) const {
  return reconstruct(eig_, phases(eig_.values, (t - s) / hbar_));
}

Vec SpectralPropagator::apply(double t, double s, const Vec& psi) const {
  Vec c = eig_.vectors.adjoint() * psi;
  c = c.cwiseProduct(phases(eig_.values, (t - s) / hbar_));
  return eig_.vectors * c;
}

// ---------------------------------------------------------------- stepped

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kNode1 = 0.5 - kSqrt3 / 6.0, kNode2 = 0.5 + kSqrt3 / 6.0;
const double kWeight1 = (3.0 - 2.0 * kSqrt3) / 12.0, kWeight2 = (3.0 + 2.0 * kSqrt3) / 12.0;

double inf_norm(const Mat& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

SteppedPropagator::SteppedPropagator(Generator g, int M, double t_lo, double t_hi, StepPolicy policy)
    : gen_(std::move(g)), M_(M), t_lo_(std::min(t_lo, 0.0)), t_hi_(std::max(t_hi, 0.0)) {
  if (!(policy.max_step > 0)) throw std::invalid_argument("stepped propagator: max_step must be positive");
  h_ = policy.max_step;
  if (policy.norm_bound > 0) {
    double gmax = 0;
    const int probes = 16;
    for (int i = 0; i <= probes; ++i) gmax = std::max(gmax, inf_norm(gen_(t_lo_ + (t_hi_ - t_lo_) * i / probes)));
    if (gmax > 0) h_ = std::min(h_, policy.norm_bound / gmax);
  }
  if (h_ < 1e-12) throw StepUnderflow("stepped propagator: step-size underflow", 0.0);
  const long nf = static_cast<long>(std::floor(t_hi_ / h_ + 1e-10));
  const long nb = static_cast<long>(std::floor(-t_lo_ / h_ + 1e-10));
  const double mb = static_cast<double>((M + 1) * (M + 1)) * 16.0 / 1048576.0;
  every_ = std::max(1, static_cast<int>(std::ceil(static_cast<double>(nf + nb + 2) * mb / policy.cache_megabytes)));

  for (int dir : {1, -1}) {
    auto& store = dir > 0 ? fwd_ : bwd_;
    const long n = dir > 0 ? nf : nb;
    Mat u = Mat::Identity(M + 1, M + 1);
    store.push_back(u);
    for (long k = 0; k < n; ++k) {
      const Mat s = step_matrix(dir * k * h_, dir * h_);
      unitarity_defect_ = std::max(unitarity_defect_, (s.adjoint() * s - Mat::Identity(M + 1, M + 1)).norm());
      u = s * u;
      if ((k + 1) % every_ == 0) store.push_back(u);
    }
  }
}

Mat SteppedPropagator::step_matrix(double t0, double dt) const {
  const Mat g1 = gen_(t0 + kNode1 * dt);
  const Mat g2 = gen_(t0 + kNode2 * dt);
  require_hermitian(g1, "stepped propagator");
  require_hermitian(g2, "stepped propagator");
  const Mat first = exp_minus_i(kWeight2 * g1 + kWeight1 * g2, dt);
  const Mat second = exp_minus_i(kWeight1 * g1 + kWeight2 * g2, dt);
  return second * first;
}

Mat SteppedPropagator::from_origin(double t) const {
  if (t > t_hi_ + 1e-12 || t < t_lo_ - 1e-12) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "time %.17g outside propagator window [%.17g, %.17g]", t, t_lo_, t_hi_);
    throw std::out_of_range(buf);
  }
  const double dir = t < 0 ? -1.0 : 1.0;
  const double x = std::abs(t) / h_;
  long j = static_cast<long>(std::floor(x));
  if (x - static_cast<double>(j) > 1.0 - 1e-10) ++j;
  const auto& store = dir > 0 ? fwd_ : bwd_;
  const long c = std::min<long>(j / every_, static_cast<long>(store.size()) - 1);
  Mat u = store[c];
  for (long i = c * every_; i < j; ++i) u = step_matrix(dir * i * h_, dir * h_) * u;
  const double rest = std::abs(t) - static_cast<double>(j) * h_;
  if (rest > 1e-14) u = step_matrix(dir * j * h_, dir * rest) * u;
  return u;
}

Mat SteppedPropagator::matrix(double t, double s) const { return from_origin(t) * from_origin(s).adjoint(); }

Vec SteppedPropagator::apply(double t, double s, const Vec& psi) const {
  return from_origin(t) * (from_origin(s).adjoint() * psi);
}

// ---------------------------------------------------------------- Weyl

int required_cutoff(double alpha_abs, double hbar, double safety) {
  return static_cast<int>(std::ceil(safety * alpha_abs * alpha_abs / hbar));
}

WeylFactory::WeylFactory(int M, double safety) : M_(M), safety_(safety) {
  const Ladder l = ladder_matrices(M);
  eig_ = hermitian_eigen(cplx{0, 1} * (l.a_dag - l.a));
}

void WeylFactory::check(cplx alpha, double hbar) const {
  if (!(hbar > 0)) throw std::invalid_argument("weyl: hbar must be positive");
  const int need = required_cutoff(std::abs(alpha), hbar, safety_);
  if (need > M_) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "displacement |alpha|^2/hbar = %.6g infeasible at cutoff %d; need M >= %d",
                  std::norm(alpha) / hbar, M_, need);
    throw InfeasibleCutoff(buf, need);
  }
}

Mat WeylFactory::matrix(cplx alpha, double hbar) const {
  check(alpha, hbar);
  const double r = std::abs(alpha) / std::sqrt(hbar);
  const Vec rot = phases(Eigen::VectorXd::LinSpaced(M_ + 1, 0, M_), -std::arg(alpha));
  return rot.asDiagonal() * reconstruct(eig_, phases(eig_.values, r)) * rot.conjugate().asDiagonal();
}

Vec WeylFactory::apply(cplx alpha, double hbar, const Vec& psi) const {
  check(alpha, hbar);
  const double r = std::abs(alpha) / std::sqrt(hbar);
  const Vec rot = phases(Eigen::VectorXd::LinSpaced(M_ + 1, 0, M_), -std::arg(alpha));
  Vec c = eig_.vectors.adjoint() * rot.conjugate().cwiseProduct(psi);
  c = c.cwiseProduct(phases(eig_.values, r));
  return rot.cwiseProduct(eig_.vectors * c);
}

Mat weyl(cplx alpha, double hbar, int M) { return WeylFactory(M).matrix(alpha, hbar); }

// ---------------------------------------------------------------- generators

std::unique_ptr<SteppedPropagator> truncated_evolution(std::function<NcPoly(double)> gen, double hbar, int M,
                                                       double t_lo, double t_hi, StepPolicy policy) {
  if (!(hbar > 0)) throw std::invalid_argument("truncated_evolution: hbar must be positive");
  Generator g = [gen = std::move(gen), hbar, M](double t) { return Mat(level_truncation(gen(t), M, hbar) / hbar); };
  return std::make_unique<SteppedPropagator>(std::move(g), M, t_lo, t_hi, policy);
}

NcPoly quadratic_part(const ClassicalSystem& sys, cplx alpha) {
  auto parts = sys.h.shift_expand(alpha);
  return parts.size() > 2 ? parts[2] : NcPoly{};
}

std::unique_ptr<SteppedPropagator> quadratic_evolution(const ClassicalSystem& sys, const Trajectory& traj, int M,
                                                       StepPolicy policy) {
  auto shared = std::make_shared<const std::pair<ClassicalSystem, Trajectory>>(sys, traj);
  auto gen = [shared](double t) { return quadratic_part(shared->first, shared->second.at(t).alpha); };
  return truncated_evolution(gen, 1.0, M, traj.t_min(), traj.t_max(), policy);
}

NcPoly l_hbar_generator(const NcPoly& h, cplx alpha, double hbar) {
  if (!(hbar > 0)) throw std::invalid_argument("l_hbar_generator: hbar must be positive");
  const auto parts = h.shift_expand(alpha);
  NcPoly l;
  for (std::size_t k = 2; k < parts.size(); ++k) l += parts[k] * cplx{std::pow(hbar, 0.5 * k - 1.0)};
  return l;
}

// ---------------------------------------------------------------- Hepp family

HeppFamily::HeppFamily(const NcPoly& h, double hbar, int M, Trajectory traj, double safety)
    : hbar_(hbar),
      M_(M),
      traj_(std::move(traj)),
      h_op_(level_truncation(h, M, hbar)),
      quantum_(h_op_, hbar),
      weyl_(M, safety) {
  weyl_.check(traj_.alpha_max(), hbar);
}

Vec HeppFamily::apply(double t, const Vec& psi) const {
  const FlowState s = traj_.at(t);
  Vec v = weyl_.apply(traj_.at(0.0).alpha, hbar_, psi);
  v = quantum_.apply(t, 0.0, v);
  v = weyl_.apply(-s.alpha, hbar_, v);
  return std::polar(1.0, s.f / hbar_) * v;
}

Mat HeppFamily::matrix(double t) const {
  const FlowState s = traj_.at(t);
  return std::polar(1.0, s.f / hbar_) * weyl_.matrix(-s.alpha, hbar_) * quantum_.matrix(t, 0.0) *
         weyl_.matrix(traj_.at(0.0).alpha, hbar_);
}

}  // namespace hepp
