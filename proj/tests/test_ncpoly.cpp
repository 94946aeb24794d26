#include <random>

#include "test_util.hpp"

using namespace hepp;
using namespace testing;

TEST_SUITE("ncpoly") {
  TEST_CASE("parse single word") {
    const NcPoly p = NcPoly::parse("a* a");
    CHECK(p.terms().size() == 1);
    CHECK(p.coeff({S, T}) == cplx{1.0});
  }

  TEST_CASE("parse collects terms") {
    const NcPoly p = NcPoly::parse("3 + a a* + a*^3");
    CHECK(p.terms().size() == 3);
    CHECK(p.coeff({}) == cplx{3.0});
    CHECK(p.coeff({T, S}) == cplx{1.0});
    CHECK(p.coeff({S, S, S}) == cplx{1.0});
  }

  TEST_CASE("parse quartic matches hand expansion") {
    const NcPoly p = NcPoly::parse(kQuartic);
    // Every word of (a - a*)(a + a*)^2 (a - a*) carries sign (+-1) from the outer factors.
    NcPoly expected;
    for (int mask = 0; mask < 16; ++mask) {
      Word w;
      double sign = 1;
      for (int i = 0; i < 4; ++i) {
        const bool star = (mask >> i) & 1;
        w.push_back(star ? S : T);
        if (star && (i == 0 || i == 3)) sign = -sign;
      }
      expected.add_term(w, -0.875 * sign);
    }
    expected.add_term({T, T, T, T}, 1.0);
    expected.add_term({S, S, S, S}, 1.0);
    CHECK(p == expected);
    CHECK(p.is_symmetric());
    CHECK(p.involution() == p);
    const auto norms = p.l1_norms();
    REQUIRE(norms.size() == 6);
    CHECK(norms[4] == doctest::Approx(12.5));
    CHECK(norms[5] == doctest::Approx(12.5));
  }

  TEST_CASE("parse errors carry offset and expectations") {
    try {
      (void)NcPoly::parse("a* + * a");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 5);
      CHECK(!e.expected().empty());
    }
    CHECK_THROWS_AS(NcPoly::parse("a^"), ParseError);
    CHECK_THROWS_AS(NcPoly::parse("(a + a*"), ParseError);
    CHECK_THROWS_AS(NcPoly::parse("a2"), ParseError);
    CHECK_THROWS_AS(NcPoly::parse("a^65"), ParseError);
  }

  TEST_CASE("complex coefficients") {
    const NcPoly p = NcPoly::parse("(2i) a a a* + (1-0.5i) a*");
    CHECK(p.coeff({T, T, S}) == cplx{0, 2});
    CHECK(p.coeff({S}) == cplx{1, -0.5});
  }

  TEST_CASE("canonical form round trips") {
    for (const char* text : {"a* a", kExample, kQuartic, "(2i) a a a* + (1-0.5i) a* + 3", "0"}) {
      const NcPoly p = NcPoly::parse(text);
      CHECK(NcPoly::parse(p.to_string()) == p);
    }
    CHECK(NcPoly().to_string() == "0");
  }

  TEST_CASE("multiplication concatenates words") {
    const NcPoly a(Word{T, T, S}), b(Word{S, T});
    CHECK(a * b == NcPoly(Word{T, T, S, S, T}));
    CHECK(a * NcPoly(1.0) == a);
    const NcPoly x = NcPoly::theta(), y = NcPoly::theta_star();
    const NcPoly lhs = (x + y) * (x - y);
    NcPoly rhs;
    rhs.add_term({T, T}, 1);
    rhs.add_term({T, S}, -1);
    rhs.add_term({S, T}, 1);
    rhs.add_term({S, S}, -1);
    CHECK(lhs == rhs);
  }

  TEST_CASE("involution reverses and conjugates") {
    CHECK(NcPoly(Word{T, T, S}, cplx{0, 2}).involution() == NcPoly(Word{T, S, S}, cplx{0, -2}));
    CHECK(NcPoly::theta_star().involution() == NcPoly::theta());
  }

  TEST_CASE("symbol") {
    const CPoly s = NcPoly::parse("a a* a + a* a a*").symbol();
    CHECK(s.terms().size() == 2);
    CHECK(s.terms().at({2, 1}) == cplx{1.0});
    CHECK(s.terms().at({1, 2}) == cplx{1.0});
    CHECK(NcPoly::parse("(a* a)^2").symbol().terms().at({2, 2}) == cplx{1.0});
  }

  TEST_CASE("symbol derivatives") {
    const CPoly f = NcPoly::parse(kExample).symbol();
    const CPoly d = f.derivative(0, 1);
    CPoly expected;
    expected.add_term(1, 0, 1.0);
    expected.add_term(2, 1, 1.0);
    CHECK(d == expected);
    const CPoly mixed = f.derivative(1, 1);
    CPoly m;
    m.add_term(0, 0, 1.0);
    m.add_term(1, 1, 2.0);
    CHECK(mixed == m);
    CHECK(NcPoly::theta_star().symbol().derivative(1, 0).terms().empty());
  }

  TEST_CASE("shift expansion") {
    const NcPoly p = NcPoly::parse("a a* a + a* a a*");
    const cplx alpha{0.7, -0.4};
    const auto parts = p.shift_expand(alpha);
    REQUIRE(parts.size() == 4);
    const double m = std::norm(alpha);
    CHECK(close(parts[1].coeff({T}), 2 * m + std::conj(alpha) * std::conj(alpha), 1e-14));
    CHECK(close(parts[1].coeff({S}), 2 * m + alpha * alpha, 1e-14));
    CHECK(close(parts[0].coeff({}), p.symbol().eval(alpha), 1e-14));

    const auto zero = p.shift_expand(0.0);
    CHECK(zero[3] == p);
    CHECK(zero[0].is_zero());

    const auto n = NcPoly::parse("a* a").shift_expand(1.0);
    CHECK(n[0] == NcPoly(1.0));
    CHECK(n[1] == NcPoly::parse("a + a*"));
    CHECK(n[2] == NcPoly::parse("a* a"));
  }

  TEST_CASE("normal ordering") {
    const HbarPoly a = normal_order(NcPoly(Word{T, S}));
    CHECK(max_coeff_diff(a.specialize(0.3), NcPoly::parse("a* a + 0.3")) < 1e-15);
    const HbarPoly b = normal_order(NcPoly(Word{T, T, S}));
    CHECK(b.is_normal_ordered());
    CHECK(b.hbar_order(0) == NcPoly(Word{S, T, T}));
    CHECK(max_coeff_diff(b.hbar_order(2), NcPoly(Word{T}, 2.0)) < 1e-15);
    CHECK(normal_order(NcPoly(Word{S, T})).specialize(0.7) == NcPoly(Word{S, T}));
  }

  TEST_CASE("normal ordering matches truncated matrices") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 20; ++i) {
      const NcPoly p = random_poly(rng, 4, i % 2 == 0);
      for (double hbar : {1.0, 0.3}) CHECK(normal_order_defect(p, hbar, 24) <= 1e-10);
    }
  }

  TEST_CASE("min degree") {
    bool constant = false;
    CHECK(NcPoly::parse("3 + a a* + a* a* a*").min_degree(&constant) == 2);
    CHECK(!constant);
    CHECK(NcPoly::theta().min_degree() == 1);
    CHECK(NcPoly(5.0).min_degree(&constant) == 0);
    CHECK(constant);
  }

  TEST_CASE("l1 norms") {
    NcPoly p;
    p.add_term({T}, 2.0);
    p.add_term({S, T}, cplx{0, -1});
    const auto n = p.l1_norms();
    REQUIRE(n.size() == 4);
    CHECK(n[1] == doctest::Approx(2));
    CHECK(n[2] == doctest::Approx(1));
    CHECK(n[3] == doctest::Approx(3));
    const auto z = NcPoly().l1_norms();
    for (double x : z) CHECK(x == 0);
    CHECK(NcPoly().degree() == 0);
  }

  TEST_CASE("random algebra properties") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 30; ++i) {
      const NcPoly p = random_poly(rng, 4, false), q = random_poly(rng, 4, false);
      const NcPoly pq = p * q;
      const NcPoly d = pq.involution() - q.involution() * p.involution();
      for (const auto& [w, c] : d.terms()) CHECK(std::abs(c) < 1e-12);
      CHECK(pq.l1_norm() <= p.l1_norm() * q.l1_norm() + 1e-12);
      const cplx z{0.3, 0.8};
      CHECK(close(pq.symbol().eval(z), p.symbol().eval(z) * q.symbol().eval(z), 1e-10));
      const NcPoly s = random_poly(rng, 4, true);
      CHECK(s.is_symmetric(1e-14));
      CHECK(s.symbol().is_real_valued(1e-12));
      for (const auto& part : s.shift_expand(z)) CHECK(part.is_symmetric(1e-12));
    }
  }
}
