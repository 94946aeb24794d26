// Links only the shared library and its public header.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hepp/hepp.h>

#include <string>
#include <vector>

namespace {

std::string poly_text(const hepp_poly* p) {
  size_t needed = 0;
  REQUIRE(hepp_poly_to_string(p, nullptr, 0, &needed) == HEPP_OK);
  std::string s(needed, '\0');
  REQUIRE(hepp_poly_to_string(p, s.data(), s.size(), &needed) == HEPP_OK);
  s.resize(needed - 1);
  return s;
}

std::string report_csv(const hepp_report* r) {
  size_t needed = 0;
  REQUIRE(hepp_report_csv(r, nullptr, 0, &needed) == HEPP_OK);
  std::string s(needed, '\0');
  REQUIRE(hepp_report_csv(r, s.data(), s.size(), nullptr) == HEPP_OK);
  s.resize(needed - 1);
  return s;
}

const char* kConfig =
    "[hamiltonian]\npoly = a* a\n[classical]\nalpha0 = 1\ntimes = 1\n"
    "[sweep]\nhbars = 0.2, 0.1, 0.05, 0.025\n";

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("polynomial round trip") {
    hepp_poly* p = nullptr;
    REQUIRE(hepp_poly_parse("a a* + a* a", &p) == HEPP_OK);
    hepp_poly* q = nullptr;
    REQUIRE(hepp_poly_parse(poly_text(p).c_str(), &q) == HEPP_OK);
    CHECK(poly_text(p) == poly_text(q));
    int deg = 0, sym = 0;
    CHECK(hepp_poly_degree(p, &deg) == HEPP_OK);
    CHECK(deg == 2);
    CHECK(hepp_poly_is_symmetric(p, 0.0, &sym) == HEPP_OK);
    CHECK(sym == 1);

    hepp_poly* n = nullptr;
    REQUIRE(hepp_poly_normal_order(p, 0.25, &n) == HEPP_OK);
    hepp_poly* expected = nullptr;
    REQUIRE(hepp_poly_parse("2 a* a + 0.25", &expected) == HEPP_OK);
    CHECK(poly_text(n) == poly_text(expected));

    // Truncated copy still terminates.
    char small[4];
    size_t needed = 0;
    CHECK(hepp_poly_to_string(p, small, sizeof small, &needed) == HEPP_OK);
    CHECK(std::string(small).size() == 3);
    CHECK(needed > sizeof small);

    hepp_poly_free(expected);
    hepp_poly_free(n);
    hepp_poly_free(q);
    hepp_poly_free(p);
  }

  TEST_CASE("errors carry status and message") {
    hepp_poly* p = nullptr;
    CHECK(hepp_poly_parse("a* + * a", &p) == HEPP_ERR_PARSE);
    CHECK(p == nullptr);
    CHECK(std::string(hepp_last_error()).size() > 0);
    CHECK(hepp_poly_parse(nullptr, &p) == HEPP_ERR_INVALID_ARGUMENT);
    CHECK(std::string(hepp_status_name(HEPP_ERR_CONFIG)) == "config error");

    hepp_config* c = nullptr;
    CHECK(hepp_config_parse("[sweep]\nhbars = 0.1\n", &c) == HEPP_ERR_CONFIG);
    CHECK(hepp_config_load("/nonexistent/x.ini", &c) == HEPP_ERR_CONFIG);
    CHECK(hepp_config_parse("[hamiltonian]\npoly = a a\n[sweep]\nhbars = 0.2, 0.1, 0.05, 0.025\n", &c) == HEPP_OK);
    hepp_report* r = nullptr;
    CHECK(hepp_simulate(c, &r) == HEPP_ERR_NOT_SYMMETRIC);
    CHECK(hepp_converge(c, "w_distance", nullptr) == HEPP_ERR_INVALID_ARGUMENT);
    hepp_config_free(c);

    REQUIRE(hepp_config_parse(kConfig, &c) == HEPP_OK);
    CHECK(hepp_converge(c, "bogus", &r) == HEPP_ERR_CONFIG);
    hepp_config_free(c);

    hepp_poly* ok = nullptr;
    REQUIRE(hepp_poly_parse("a", &ok) == HEPP_OK);
    CHECK(std::string(hepp_last_error()).empty());
    hepp_poly_free(ok);
  }

  TEST_CASE("reports") {
    hepp_config* c = nullptr;
    REQUIRE(hepp_config_parse(kConfig, &c) == HEPP_OK);

    hepp_report* sim = nullptr;
    REQUIRE(hepp_simulate(c, &sim) == HEPP_OK);
    CHECK(report_csv(sim).rfind("t,re_alpha", 0) == 0);
    CHECK(hepp_report_passed(sim) == 1);
    hepp_report_free(sim);

    hepp_report* conv = nullptr;
    REQUIRE(hepp_converge(c, "w_distance", &conv) == HEPP_OK);
    const std::string csv = report_csv(conv);
    CHECK(csv.rfind("hbar,t,metric,value,truncation_flag\n", 0) == 0);
    CHECK(std::string(hepp_report_summary(conv)).find("below noise floor") != std::string::npos);
    CHECK(hepp_report_write(conv, "/nonexistent/dir/out.csv") == HEPP_ERR_IO);
    hepp_report_free(conv);

    hepp_report* scr = nullptr;
    REQUIRE(hepp_assumptions(c, &scr) == HEPP_OK);
    CHECK(hepp_report_passed(scr) == 1);
    hepp_report_free(scr);
    hepp_config_free(c);

    REQUIRE(hepp_config_parse("[hamiltonian]\npoly = -a* a\n[sweep]\nhbars = 0.2, 0.1, 0.05, 0.025\n", &c) == HEPP_OK);
    REQUIRE(hepp_assumptions(c, &scr) == HEPP_OK);
    CHECK(hepp_report_passed(scr) == 0);
    hepp_report_free(scr);
    CHECK(hepp_converge(c, "w_distance", &conv) == HEPP_ERR_ASSUMPTION);
    hepp_config_free(c);
  }

  TEST_CASE("invariant suite through the api") {
    const int sizes[] = {3};
    hepp_report* r = nullptr;
    REQUIRE(hepp_check_invariants(1, sizes, 1, 0, &r) == HEPP_OK);
    CHECK(report_csv(r).find("SKIPPED") != std::string::npos);
    hepp_report_free(r);
    CHECK(hepp_check_invariants(1, nullptr, 2, 0, &r) == HEPP_ERR_INVALID_ARGUMENT);
  }
}
