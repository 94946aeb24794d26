#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hepp {

using cplx = std::complex<double>;

enum class Letter : std::uint8_t { Theta = 0, ThetaStar = 1 };

// Letters applied in reading order: the rightmost letter acts first on a state.
using Word = std::vector<Letter>;

Word involution(const Word& w);
int count_theta(const Word& w);
int count_theta_star(const Word& w);
// #THETA_STAR - #THETA: the Fock index shift of the monomial operator.
int index_shift(const Word& w);
std::string word_to_string(const Word& w);

class CPoly;

class NcPoly {
 public:
  using Terms = std::map<Word, cplx>;

  NcPoly() = default;
  explicit NcPoly(cplx constant);
  NcPoly(const Word& w, cplx coeff = 1.0);

  static NcPoly theta();
  static NcPoly theta_star();
  static NcPoly parse(const std::string& text);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  cplx coeff(const Word& w) const;
  void add_term(const Word& w, cplx c);

  int degree() const;
  // Shortest nonconstant word; `constant` is set when there is none.
  int min_degree(bool* constant = nullptr) const;
  NcPoly homogeneous(int k) const;

  NcPoly involution() const;
  bool is_symmetric(double tol = 0.0) const;
  // Pairs (w, w*) whose coefficients violate P = P*.
  std::vector<std::pair<Word, Word>> asymmetric_pairs(double tol = 0.0) const;

  CPoly symbol() const;
  // |P_k| for k = 0..deg followed by the total |P|.
  std::vector<double> l1_norms() const;
  double l1_norm() const;

  // P(theta + alpha, theta* + conj(alpha)) split into homogeneous parts 0..deg.
  std::vector<NcPoly> shift_expand(cplx alpha) const;
  NcPoly shifted(cplx alpha) const;

  std::string to_string() const;

  NcPoly& operator+=(const NcPoly& o);
  NcPoly& operator-=(const NcPoly& o);
  NcPoly& operator*=(cplx s);
  friend NcPoly operator+(NcPoly a, const NcPoly& b) { return a += b; }
  friend NcPoly operator-(NcPoly a, const NcPoly& b) { return a -= b; }
  friend NcPoly operator*(NcPoly a, cplx s) { return a *= s; }
  friend NcPoly operator*(cplx s, NcPoly a) { return a *= s; }
  friend NcPoly operator*(const NcPoly& a, const NcPoly& b);
  bool operator==(const NcPoly& o) const { return terms_ == o.terms_; }

 private:
  Terms terms_;
};

NcPoly pow(const NcPoly& p, unsigned n);

// Element of C[sqrt(hbar)]<theta, theta*>; the power counts sqrt(hbar) factors.
class HbarPoly {
 public:
  using Key = std::pair<int, Word>;
  using Terms = std::map<Key, cplx>;

  const Terms& terms() const { return terms_; }
  void add_term(int sqrt_hbar_power, const Word& w, cplx c);
  HbarPoly& operator+=(const HbarPoly& o);
  // Multiplies every term by sqrt(hbar)^k.
  HbarPoly scaled(int k, cplx c) const;

  NcPoly specialize(double hbar) const;
  NcPoly hbar_order(int sqrt_hbar_power) const;
  bool is_normal_ordered() const;

 private:
  Terms terms_;
};

HbarPoly normal_order(const NcPoly& p);
bool is_normal_word(const Word& w);

// Polynomial in commuting z, conj(z); key is (deg_z, deg_zbar).
class CPoly {
 public:
  using Terms = std::map<std::pair<int, int>, cplx>;

  CPoly() = default;
  const Terms& terms() const { return terms_; }
  void add_term(int dz, int dzbar, cplx c);

  cplx eval(cplx z) const;
  CPoly derivative(int dz, int dzbar) const;
  bool is_real_valued(double tol = 0.0) const;
  int degree() const;

  CPoly& operator+=(const CPoly& o);
  friend CPoly operator*(const CPoly& a, const CPoly& b);
  bool operator==(const CPoly& o) const { return terms_ == o.terms_; }

 private:
  Terms terms_;
};

// One letter of a multi-time word: time slot (1-based) and letter.
struct SlotLetter {
  int slot = 1;
  Letter letter = Letter::Theta;
  auto operator<=>(const SlotLetter&) const = default;
};
using SlotWord = std::vector<SlotLetter>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset, std::set<std::string> expected);
  std::size_t offset() const { return offset_; }
  const std::set<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::set<std::string> expected_;
};

// Parses the polynomial grammar; letters may carry a slot index (a2, a2*).
std::map<SlotWord, cplx> parse_slot_terms(const std::string& text);

std::string format_coeff(cplx c);

}  // namespace hepp
