#include "ncpoly.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

namespace hepp {

Word involution(const Word& w) {
  Word r(w.rbegin(), w.rend());
  for (auto& l : r) l = (l == Letter::Theta) ? Letter::ThetaStar : Letter::Theta;
  return r;
}

int count_theta(const Word& w) {
  return static_cast<int>(std::count(w.begin(), w.end(), Letter::Theta));
}

int count_theta_star(const Word& w) {
  return static_cast<int>(std::count(w.begin(), w.end(), Letter::ThetaStar));
}

int index_shift(const Word& w) { return count_theta_star(w) - count_theta(w); }

std::string word_to_string(const Word& w) {
  std::string s;
  for (auto l : w) {
    if (!s.empty()) s += ' ';
    s += (l == Letter::Theta) ? "a" : "a*";
  }
  return s.empty() ? "1" : s;
}

// ---------------------------------------------------------------- NcPoly

NcPoly::NcPoly(cplx constant) { add_term({}, constant); }

NcPoly::NcPoly(const Word& w, cplx coeff) { add_term(w, coeff); }

NcPoly NcPoly::theta() { return NcPoly(Word{Letter::Theta}); }
NcPoly NcPoly::theta_star() { return NcPoly(Word{Letter::ThetaStar}); }

cplx NcPoly::coeff(const Word& w) const {
  auto it = terms_.find(w);
  return it == terms_.end() ? cplx{} : it->second;
}

void NcPoly::add_term(const Word& w, cplx c) {
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

int NcPoly::degree() const {
  int d = 0;
  for (const auto& [w, c] : terms_) d = std::max(d, static_cast<int>(w.size()));
  return d;
}

int NcPoly::min_degree(bool* constant) const {
  int best = -1;
  for (const auto& [w, c] : terms_)
    if (!w.empty() && (best < 0 || static_cast<int>(w.size()) < best)) best = static_cast<int>(w.size());
  if (constant) *constant = best < 0;
  return best < 0 ? 0 : best;
}

NcPoly NcPoly::homogeneous(int k) const {
  NcPoly r;
  for (const auto& [w, c] : terms_)
    if (static_cast<int>(w.size()) == k) r.terms_.emplace(w, c);
  return r;
}

NcPoly NcPoly::involution() const {
  NcPoly r;
  for (const auto& [w, c] : terms_) r.add_term(hepp::involution(w), std::conj(c));
  return r;
}

std::vector<std::pair<Word, Word>> NcPoly::asymmetric_pairs(double tol) const {
  std::vector<std::pair<Word, Word>> bad;
  std::set<Word> seen;
  auto check = [&](const Word& w) {
    Word s = hepp::involution(w);
    const Word& lo = std::min(w, s);
    if (!seen.insert(lo).second) return;
    if (std::abs(coeff(w) - std::conj(coeff(s))) > tol) bad.emplace_back(lo, std::max(w, s));
  };
  for (const auto& [w, c] : terms_) check(w);
  return bad;
}

bool NcPoly::is_symmetric(double tol) const { return asymmetric_pairs(tol).empty(); }

CPoly NcPoly::symbol() const {
  CPoly r;
  for (const auto& [w, c] : terms_) r.add_term(count_theta(w), count_theta_star(w), c);
  return r;
}

std::vector<double> NcPoly::l1_norms() const {
  std::vector<double> n(degree() + 2, 0.0);
  for (const auto& [w, c] : terms_) n[w.size()] += std::abs(c);
  double total = 0;
  for (std::size_t k = 0; k + 1 < n.size(); ++k) total += n[k];
  n.back() = total;
  return n;
}

double NcPoly::l1_norm() const { return l1_norms().back(); }

std::vector<NcPoly> NcPoly::shift_expand(cplx alpha) const {
  std::vector<NcPoly> parts(degree() + 1);
  const cplx alpha_bar = std::conj(alpha);
  for (const auto& [w, c] : terms_) {
    const std::size_t k = w.size();
    if (k > 24) throw std::invalid_argument("shift_expand: word too long");
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      Word kept;
      cplx coeff = c;
      for (std::size_t i = 0; i < k; ++i) {
        if (mask & (1u << i))
          kept.push_back(w[i]);
        else
          coeff *= (w[i] == Letter::Theta) ? alpha : alpha_bar;
      }
      parts[kept.size()].add_term(kept, coeff);
    }
  }
  return parts;
}

NcPoly NcPoly::shifted(cplx alpha) const {
  NcPoly r;
  for (const auto& part : shift_expand(alpha)) r += part;
  return r;
}

std::string format_coeff(cplx c) {
  char buf[96];
  if (c.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "(%.17g)", c.real());
  } else {
    std::snprintf(buf, sizeof buf, "(%.17g%c%.17gi)", c.real(), c.imag() < 0 ? '-' : '+', std::abs(c.imag()));
  }
  return buf;
}

std::string NcPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (const auto& [w, c] : terms_) {
    if (!s.empty()) s += " + ";
    if (w.empty()) {
      s += format_coeff(c);
    } else {
      if (c != cplx{1.0, 0.0}) s += format_coeff(c) + " ";
      s += word_to_string(w);
    }
  }
  return s;
}

NcPoly& NcPoly::operator+=(const NcPoly& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, c);
  return *this;
}

NcPoly& NcPoly::operator-=(const NcPoly& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, -c);
  return *this;
}

NcPoly& NcPoly::operator*=(cplx s) {
  if (s == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, c] : terms_) c *= s;
  std::erase_if(terms_, [](const auto& kv) { return kv.second == cplx{}; });
  return *this;
}

NcPoly operator*(const NcPoly& a, const NcPoly& b) {
  NcPoly r;
  for (const auto& [wa, ca] : a.terms()) {
    for (const auto& [wb, cb] : b.terms()) {
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      r.add_term(w, ca * cb);
    }
  }
  return r;
}

NcPoly pow(const NcPoly& p, unsigned n) {
  NcPoly r(cplx{1.0});
  for (unsigned i = 0; i < n; ++i) r = r * p;
  return r;
}

// ---------------------------------------------------------------- HbarPoly

void HbarPoly::add_term(int sqrt_hbar_power, const Word& w, cplx c) {
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.emplace(Key{sqrt_hbar_power, w}, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

HbarPoly& HbarPoly::operator+=(const HbarPoly& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
  return *this;
}

HbarPoly HbarPoly::scaled(int k, cplx c) const {
  HbarPoly r;
  for (const auto& [key, v] : terms_) r.add_term(key.first + k, key.second, v * c);
  return r;
}

NcPoly HbarPoly::specialize(double hbar) const {
  NcPoly r;
  const double root = std::sqrt(hbar);
  for (const auto& [key, c] : terms_) r.add_term(key.second, c * std::pow(root, key.first));
  return r;
}

NcPoly HbarPoly::hbar_order(int sqrt_hbar_power) const {
  NcPoly r;
  for (const auto& [key, c] : terms_)
    if (key.first == sqrt_hbar_power) r.add_term(key.second, c);
  return r;
}

bool is_normal_word(const Word& w) {
  return std::is_sorted(w.begin(), w.end(), [](Letter x, Letter y) { return x > y; });
}

bool HbarPoly::is_normal_ordered() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& kv) { return is_normal_word(kv.first.second); });
}

HbarPoly normal_order(const NcPoly& p) {
  std::map<Word, HbarPoly> memo;
  std::function<const HbarPoly&(const Word&)> order = [&](const Word& w) -> const HbarPoly& {
    if (auto it = memo.find(w); it != memo.end()) return it->second;
    HbarPoly r;
    std::size_t i = 0;
    while (i + 1 < w.size() && !(w[i] == Letter::Theta && w[i + 1] == Letter::ThetaStar)) ++i;
    if (i + 1 >= w.size()) {
      r.add_term(0, w, 1.0);
    } else {
      Word swapped = w;
      std::swap(swapped[i], swapped[i + 1]);
      Word contracted = w;
      contracted.erase(contracted.begin() + static_cast<long>(i), contracted.begin() + static_cast<long>(i) + 2);
      r += order(swapped);
      r += order(contracted).scaled(2, 1.0);
    }
    return memo.emplace(w, std::move(r)).first->second;
  };
  HbarPoly result;
  for (const auto& [w, c] : p.terms()) result += order(w).scaled(0, c);
  return result;
}

// ---------------------------------------------------------------- CPoly

void CPoly::add_term(int dz, int dzbar, cplx c) {
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.emplace(std::make_pair(dz, dzbar), c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

cplx CPoly::eval(cplx z) const {
  cplx s{};
  const cplx zb = std::conj(z);
  for (const auto& [k, c] : terms_) s += c * std::pow(z, k.first) * std::pow(zb, k.second);
  return s;
}

CPoly CPoly::derivative(int dz, int dzbar) const {
  CPoly r;
  for (const auto& [k, c] : terms_) {
    if (k.first < dz || k.second < dzbar) continue;
    double f = 1.0;
    for (int i = 0; i < dz; ++i) f *= k.first - i;
    for (int i = 0; i < dzbar; ++i) f *= k.second - i;
    r.add_term(k.first - dz, k.second - dzbar, c * f);
  }
  return r;
}

bool CPoly::is_real_valued(double tol) const {
  for (const auto& [k, c] : terms_) {
    auto it = terms_.find({k.second, k.first});
    cplx mirror = it == terms_.end() ? cplx{} : it->second;
    if (std::abs(c - std::conj(mirror)) > tol) return false;
  }
  return true;
}

int CPoly::degree() const {
  int d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.first + k.second);
  return d;
}

CPoly& CPoly::operator+=(const CPoly& o) {
  for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
  return *this;
}

CPoly operator*(const CPoly& a, const CPoly& b) {
  CPoly r;
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) r.add_term(ka.first + kb.first, ka.second + kb.second, ca * cb);
  return r;
}

// ---------------------------------------------------------------- parser

ParseError::ParseError(const std::string& msg, std::size_t offset, std::set<std::string> expected)
    : std::runtime_error([&] {
        std::string s = msg + " at byte " + std::to_string(offset);
        if (!expected.empty()) {
          s += "; expected one of:";
          for (const auto& e : expected) s += " '" + e + "'";
        }
        return s;
      }()),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

constexpr unsigned kMaxExponent = 64;

using SlotTerms = std::map<SlotWord, cplx>;

void add_slot_term(SlotTerms& t, const SlotWord& w, cplx c) {
  if (c == cplx{}) return;
  auto [it, inserted] = t.emplace(w, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) t.erase(it);
  }
}

SlotTerms multiply(const SlotTerms& a, const SlotTerms& b) {
  SlotTerms r;
  for (const auto& [wa, ca] : a)
    for (const auto& [wb, cb] : b) {
      SlotWord w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      add_slot_term(r, w, ca * cb);
    }
  return r;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  SlotTerms parse() {
    SlotTerms p = poly();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character", {"+", "-", "a", "a*", "(", "end of input"});
    return p;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg, std::set<std::string> expected) const {
    throw ParseError(msg, pos_, std::move(expected));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool starts_number(char c) const { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; }

  SlotTerms poly() {
    SlotTerms acc;
    double sign = 1.0;
    if (char c = peek(); c == '+' || c == '-') {
      sign = c == '-' ? -1.0 : 1.0;
      ++pos_;
    }
    for (;;) {
      for (const auto& [w, c] : term()) add_slot_term(acc, w, sign * c);
      char c = peek();
      if (c != '+' && c != '-') break;
      sign = c == '-' ? -1.0 : 1.0;
      ++pos_;
    }
    return acc;
  }

  SlotTerms term() {
    const std::size_t start = (skip_ws(), pos_);
    cplx coeff{1.0};
    bool any = false;
    if (starts_number(peek())) {
      coeff = number();
      any = true;
    } else if (peek() == '(') {
      const std::size_t save = pos_;
      if (auto c = try_paren_coeff()) {
        coeff = *c;
        any = true;
      } else {
        pos_ = save;
      }
    }
    SlotTerms acc;
    acc.emplace(SlotWord{}, coeff);
    for (;;) {
      char c = peek();
      if (c != 'a' && c != '(') break;
      acc = multiply(acc, factor());
      any = true;
    }
    if (!any) {
      pos_ = start;
      fail("expected a term", {"number", "(", "a", "a*"});
    }
    return acc;
  }

  SlotTerms factor() {
    SlotTerms base;
    if (peek() == 'a') {
      ++pos_;
      SlotLetter l;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        l.slot = static_cast<int>(uint_value("slot index"));
        if (l.slot < 1) fail("slot index must be positive", {"uint >= 1"});
      }
      if (pos_ < s_.size() && s_[pos_] == '*') {
        ++pos_;
        l.letter = Letter::ThetaStar;
      }
      base.emplace(SlotWord{l}, 1.0);
    } else {
      ++pos_;  // '('
      base = poly();
      if (peek() != ')') fail("unbalanced parenthesis", {")", "+", "-"});
      ++pos_;
    }
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      const std::size_t at = pos_;
      const unsigned long long n = uint_value("exponent");
      if (n > kMaxExponent) {
        pos_ = at;
        fail("exponent overflow (max " + std::to_string(kMaxExponent) + ")", {"uint <= 64"});
      }
      SlotTerms r;
      r.emplace(SlotWord{}, 1.0);
      for (unsigned long long i = 0; i < n; ++i) r = multiply(r, base);
      return r;
    }
    return base;
  }

  unsigned long long uint_value(const char* what) {
    const std::size_t begin = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (begin == pos_) fail(std::string("expected ") + what, {"uint"});
    unsigned long long v = 0;
    auto [p, ec] = std::from_chars(s_.data() + begin, s_.data() + pos_, v);
    if (ec != std::errc()) {
      pos_ = begin;
      fail(std::string(what) + " overflow", {"uint"});
    }
    return v;
  }

  double number() {
    skip_ws();
    const std::size_t begin = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) {
      pos_ = begin;
      fail("expected a number", {"number"});
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      const std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0;
    auto [p, ec] = std::from_chars(s_.data() + begin, s_.data() + pos_, v);
    if (ec != std::errc() || p != s_.data() + pos_) {
      pos_ = begin;
      fail("malformed number", {"number"});
    }
    return v;
  }

  double signed_number() {
    double sign = 1.0;
    if (char c = peek(); c == '+' || c == '-') {
      sign = c == '-' ? -1.0 : 1.0;
      ++pos_;
    }
    if (!starts_number(peek())) fail("expected a number", {"number"});
    return sign * number();
  }

  // '(' float ((+|-) float 'i')? ')' and the pure imaginary '(' float 'i' ')'.
  std::optional<cplx> try_paren_coeff() {
    ++pos_;  // '('
    char c = peek();
    if (!starts_number(c) && c != '-' && c != '+') return std::nullopt;
    const std::size_t save = pos_;
    double re = 0;
    try {
      re = signed_number();
    } catch (const ParseError&) {
      pos_ = save;
      return std::nullopt;
    }
    if (peek() == 'i') {
      ++pos_;
      if (peek() != ')') return std::nullopt;
      ++pos_;
      return cplx{0.0, re};
    }
    if (peek() == ')') {
      ++pos_;
      return cplx{re, 0.0};
    }
    c = peek();
    if (c != '+' && c != '-') return std::nullopt;
    ++pos_;
    if (!starts_number(peek())) return std::nullopt;
    double im = number();
    if (c == '-') im = -im;
    if (peek() != 'i') return std::nullopt;
    ++pos_;
    if (peek() != ')') return std::nullopt;
    ++pos_;
    return cplx{re, im};
  }
};

}  // namespace

std::map<SlotWord, cplx> parse_slot_terms(const std::string& text) { return Parser(text).parse(); }

NcPoly NcPoly::parse(const std::string& text) {
  NcPoly r;
  for (const auto& [sw, c] : parse_slot_terms(text)) {
    Word w;
    for (const auto& sl : sw) {
      if (sl.slot != 1) throw ParseError("single-mode polynomial cannot use slot " + std::to_string(sl.slot), 0, {"a", "a*"});
      w.push_back(sl.letter);
    }
    r.add_term(w, c);
  }
  return r;
}

}  // namespace hepp
