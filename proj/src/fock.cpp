#include "fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace hepp {

Ladder ladder_matrices(int M) {
  if (M < 1) throw std::invalid_argument("ladder_matrices: cutoff must be >= 1");
  Ladder l{Mat::Zero(M + 1, M + 1), Mat::Zero(M + 1, M + 1)};
  for (int n = 1; n <= M; ++n) l.a(n - 1, n) = std::sqrt(static_cast<double>(n));
  l.a_dag = l.a.adjoint();
  return l;
}

double LadderCoeff::operator()(long n) const {
  if (n < 0 || n + shift < 0) return 0.0;
  double c = 1.0;
  long m = n;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (*it == Letter::Theta) {
      if (m == 0) return 0.0;
      c *= std::sqrt(static_cast<double>(m));
      --m;
    } else {
      ++m;
      c *= std::sqrt(static_cast<double>(m));
    }
  }
  return c;
}

long LadderCoeff::peak(long n) const {
  long m = n, top = n;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    m += (*it == Letter::Theta) ? -1 : 1;
    top = std::max(top, m);
  }
  return top;
}

LadderCoeff monomial_coeff(const Word& word) {
  return LadderCoeff{word, index_shift(word), count_theta_star(word)};
}

namespace {

// Column n of the truncated product: follow the index, dropping paths that
// leave 0..M (a truncated creation operator annihilates Omega_M).
void accumulate_monomial(Mat& out, const Word& word, cplx scale) {
  const int M = cutoff_of(out);
  for (int n = 0; n <= M; ++n) {
    double c = 1.0;
    long m = n;
    bool alive = true;
    for (auto it = word.rbegin(); it != word.rend() && alive; ++it) {
      if (*it == Letter::Theta) {
        if (m == 0) alive = false;
        else c *= std::sqrt(static_cast<double>(m--));
      } else {
        if (m == M) alive = false;
        else c *= std::sqrt(static_cast<double>(++m));
      }
    }
    if (alive) out(m, n) += scale * c;
  }
}

}  // namespace

Mat monomial_matrix(const Word& word, int M, double hbar) {
  Mat out = Mat::Zero(M + 1, M + 1);
  accumulate_monomial(out, word, std::pow(hbar, 0.5 * static_cast<double>(word.size())));
  return out;
}

Mat poly_matrix(const NcPoly& p, int M, double hbar) {
  Mat out = Mat::Zero(M + 1, M + 1);
  for (const auto& [w, c] : p.terms()) accumulate_monomial(out, w, c * std::pow(hbar, 0.5 * static_cast<double>(w.size())));
  return out;
}

Mat level_truncation(const NcPoly& p, int M, double hbar) {
  const int ambient = M + p.degree();
  return poly_matrix(p, ambient, hbar).topLeftCorner(M + 1, M + 1);
}

int interior_limit(const Word& word, int M) {
  // The rise above the starting index is the same for every start column;
  // paths that hit the vacuum vanish and never reach the edge.
  const long rise = monomial_coeff(word).peak(0);
  return static_cast<int>(std::max<long>(-1, M - rise));
}

int interior_limit(const NcPoly& p, int M) {
  int lim = M;
  for (const auto& [w, c] : p.terms()) lim = std::min(lim, interior_limit(w, M));
  return lim;
}

Mat truncate(const Mat& q, int M_small) {
  if (M_small > cutoff_of(q)) throw std::invalid_argument("truncate: M_small exceeds cutoff");
  Mat r = Mat::Zero(q.rows(), q.cols());
  if (M_small >= 0) r.topLeftCorner(M_small + 1, M_small + 1) = q.topLeftCorner(M_small + 1, M_small + 1);
  return r;
}

Vec basis_state(int n, int M) {
  if (n < 0 || n > M) throw std::invalid_argument("basis_state: index outside 0..M");
  Vec v = Vec::Zero(M + 1);
  v(n) = 1.0;
  return v;
}

Vec number_weights(int M, double beta) {
  Vec w(M + 1);
  for (int n = 0; n <= M; ++n) w(n) = std::pow(static_cast<double>(n + 1), beta);
  return w;
}

double beta_norm(const Vec& psi, double beta) {
  return psi.cwiseProduct(number_weights(cutoff_of(psi), beta)).norm();
}

double op_norm(const Mat& t, double beta_in, double beta_out) {
  const int M = cutoff_of(t);
  Mat w = number_weights(M, beta_out).asDiagonal() * t;
  w = w * number_weights(M, -beta_in).asDiagonal();
  Eigen::BDCSVD<Mat> svd(w);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double bound_K(double beta, int d) {
  if (d < 1) throw std::invalid_argument("bound_K: degree must be >= 1");
  const double dd = d;
  return beta * std::pow(dd, 1.0 + dd / 2.0) * std::pow(1.0 + dd, std::abs(beta - 1.0));
}

std::set<int> occupied_diagonals(const Mat& m, double tol) {
  std::set<int> d;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (std::abs(m(r, c)) > tol) d.insert(static_cast<int>(r - c));
  return d;
}

double hermitian_defect(const Mat& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

namespace {

void header(std::ostream& os, int M, double hbar) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", hbar);
  os << "# fock M=" << M << " hbar=" << buf << "\nrow,col,re,im\n";
}

void entry(std::ostream& os, long r, long c, cplx v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%ld,%ld,%.17g,%.17g\n", r, c, v.real(), v.imag());
  os << buf;
}

}  // namespace

void dump_csv(std::ostream& os, const Mat& m, double hbar) {
  header(os, cutoff_of(m), hbar);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (m(r, c) != cplx{}) entry(os, r, c, m(r, c));
}

void dump_csv(std::ostream& os, const Vec& v, double hbar) {
  header(os, cutoff_of(v), hbar);
  for (Eigen::Index r = 0; r < v.size(); ++r)
    if (v(r) != cplx{}) entry(os, r, 0, v(r));
}

}  // namespace hepp
