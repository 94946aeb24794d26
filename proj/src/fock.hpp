#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <set>

#include "ncpoly.hpp"

namespace hepp {

// Dense operators and states on span{Omega_0, ..., Omega_M}; dimension M+1.
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline int cutoff_of(const Mat& m) { return static_cast<int>(m.rows()) - 1; }
inline int cutoff_of(const Vec& v) { return static_cast<int>(v.size()) - 1; }

struct Ladder {
  Mat a;
  Mat a_dag;
};

Ladder ladder_matrices(int M);

// A Omega_n = c(n) Omega_{n + shift} for the monomial operator of `word`.
struct LadderCoeff {
  Word word;
  int shift = 0;
  int q = 0;  // number of creation letters
  double operator()(long n) const;
  // Largest Fock index visited while applying the word to Omega_n.
  long peak(long n) const;
};

LadderCoeff monomial_coeff(const Word& word);

// hbar^{k/2} times the product of truncated ladder matrices in word order.
Mat monomial_matrix(const Word& word, int M, double hbar);
Mat poly_matrix(const NcPoly& p, int M, double hbar);
// Exact level-M truncation P_M P(a_hbar, a_hbar^dag) P_M (no edge artifacts).
Mat level_truncation(const NcPoly& p, int M, double hbar);

// Largest n such that no index visited while applying any word to Omega_m,
// m <= n, exceeds M. Entries in columns 0..limit are free of edge effects.
int interior_limit(const Word& word, int M);
int interior_limit(const NcPoly& p, int M);

// Zeroes entries outside the leading (M_small+1)^2 block.
Mat truncate(const Mat& q, int M_small);

Vec basis_state(int n, int M);
Vec number_weights(int M, double beta);  // (n+1)^beta
double beta_norm(const Vec& psi, double beta);
double op_norm(const Mat& t, double beta_in, double beta_out);
double bound_K(double beta, int d);

// Diagonal offsets (row - col) carrying entries above `tol`.
std::set<int> occupied_diagonals(const Mat& m, double tol = 0.0);
double hermitian_defect(const Mat& m);

void dump_csv(std::ostream& os, const Mat& m, double hbar);
void dump_csv(std::ostream& os, const Vec& v, double hbar);

}  // namespace hepp
