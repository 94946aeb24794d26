#include "hepp/hepp.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "harness.hpp"

struct hepp_poly {
  hepp::NcPoly poly;
};

struct hepp_config {
  hepp::SimConfig cfg;
};

struct hepp_report {
  std::string csv;
  std::string summary;
  bool passed = true;
};

namespace {

thread_local std::string last_error;

hepp_status fail(hepp_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

template <class F>
hepp_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const hepp::ParseError& e) {
    return fail(HEPP_ERR_PARSE, e.what());
  } catch (const hepp::ConfigError& e) {
    return fail(HEPP_ERR_CONFIG, e.what());
  } catch (const hepp::AsymmetricHamiltonian& e) {
    return fail(HEPP_ERR_NOT_SYMMETRIC, e.what());
  } catch (const hepp::InfeasibleCutoff& e) {
    return fail(HEPP_ERR_INFEASIBLE,
                std::string(e.what()) + " (required cutoff " + std::to_string(e.required_cutoff()) + ")");
  } catch (const hepp::StepUnderflow& e) {
    return fail(HEPP_ERR_NUMERICAL, e.what());
  } catch (const hepp::NotHermitian& e) {
    return fail(HEPP_ERR_NUMERICAL, e.what());
  } catch (const hepp::AssumptionNotMet& e) {
    return fail(HEPP_ERR_ASSUMPTION, e.what());
  } catch (const hepp::IoError& e) {
    return fail(HEPP_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(HEPP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(HEPP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HEPP_ERR_INTERNAL, "unknown error");
  }
}

hepp_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap == 0) return HEPP_OK;
  const size_t n = std::min(cap - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
  return HEPP_OK;
}

#define REQUIRE(cond, msg) \
  if (!(cond)) return fail(HEPP_ERR_INVALID_ARGUMENT, msg)

}  // namespace

extern "C" {

const char* hepp_last_error(void) { return last_error.c_str(); }

const char* hepp_status_name(hepp_status s) {
  switch (s) {
    case HEPP_OK: return "ok";
    case HEPP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HEPP_ERR_PARSE: return "parse error";
    case HEPP_ERR_CONFIG: return "config error";
    case HEPP_ERR_NOT_SYMMETRIC: return "hamiltonian not symmetric";
    case HEPP_ERR_INFEASIBLE: return "infeasible cutoff";
    case HEPP_ERR_NUMERICAL: return "numerical failure";
    case HEPP_ERR_ASSUMPTION: return "assumption screen failed";
    case HEPP_ERR_IO: return "i/o error";
    case HEPP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

hepp_status hepp_poly_parse(const char* text, hepp_poly** out) {
  REQUIRE(text && out, "hepp_poly_parse: null argument");
  return guarded([&] {
    *out = new hepp_poly{hepp::NcPoly::parse(text)};
    return HEPP_OK;
  });
}

void hepp_poly_free(hepp_poly* p) { delete p; }

hepp_status hepp_poly_to_string(const hepp_poly* p, char* buf, size_t cap, size_t* needed) {
  REQUIRE(p, "hepp_poly_to_string: null polynomial");
  return guarded([&] { return copy_out(p->poly.to_string(), buf, cap, needed); });
}

hepp_status hepp_poly_degree(const hepp_poly* p, int* out) {
  REQUIRE(p && out, "hepp_poly_degree: null argument");
  *out = p->poly.degree();
  return HEPP_OK;
}

hepp_status hepp_poly_is_symmetric(const hepp_poly* p, double tol, int* out) {
  REQUIRE(p && out, "hepp_poly_is_symmetric: null argument");
  *out = p->poly.is_symmetric(tol) ? 1 : 0;
  return HEPP_OK;
}

hepp_status hepp_poly_normal_order(const hepp_poly* p, double hbar, hepp_poly** out) {
  REQUIRE(p && out, "hepp_poly_normal_order: null argument");
  return guarded([&] {
    *out = new hepp_poly{hepp::normal_order(p->poly).specialize(hbar)};
    return HEPP_OK;
  });
}

hepp_status hepp_config_load(const char* path, hepp_config** out) {
  REQUIRE(path && out, "hepp_config_load: null argument");
  return guarded([&] {
    *out = new hepp_config{hepp::load_config(path)};
    return HEPP_OK;
  });
}

hepp_status hepp_config_parse(const char* text, hepp_config** out) {
  REQUIRE(text && out, "hepp_config_parse: null argument");
  return guarded([&] {
    *out = new hepp_config{hepp::parse_config(text)};
    return HEPP_OK;
  });
}

void hepp_config_free(hepp_config* c) { delete c; }

hepp_status hepp_simulate(const hepp_config* c, hepp_report** out) {
  REQUIRE(c && out, "hepp_simulate: null argument");
  return guarded([&] {
    const auto sys = hepp::build_system(hepp::NcPoly::parse(c->cfg.hamiltonian));
    std::vector<double> grid = c->cfg.times;
    grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto traj = hepp::integrate(sys, c->cfg.alpha0, grid, c->cfg.ode_tol);
    auto r = std::make_unique<hepp_report>();
    std::ostringstream os;
    traj.write_csv(os);
    r->csv = os.str();
    std::ostringstream sum;
    sum << "trajectory: " << traj.samples().size() << " samples, " << traj.step_count()
        << " steps, sup|alpha| = " << hepp::format_double(traj.alpha_max());
    r->summary = sum.str();
    *out = r.release();
    return HEPP_OK;
  });
}

hepp_status hepp_converge(const hepp_config* c, const char* study, hepp_report** out) {
  REQUIRE(c && study && out, "hepp_converge: null argument");
  return guarded([&] {
    const auto report = hepp::run_convergence(c->cfg, hepp::Study::from_name(study, c->cfg));
    auto r = std::make_unique<hepp_report>();
    std::ostringstream os;
    hepp::emit_csv(report, os);
    r->csv = os.str();
    std::ostringstream sum;
    for (const auto& f : report.fits) {
      sum << f.metric << ": ";
      if (f.status == "ok")
        sum << "slope " << hepp::format_double(f.fit.slope) << ", sse " << hepp::format_double(f.fit.sse);
      else
        sum << f.status;
      sum << '\n';
    }
    r->summary = sum.str();
    *out = r.release();
    return HEPP_OK;
  });
}

hepp_status hepp_assumptions(const hepp_config* c, hepp_report** out) {
  REQUIRE(c && out, "hepp_assumptions: null argument");
  return guarded([&] {
    const auto report = hepp::check_assumption1(hepp::NcPoly::parse(c->cfg.hamiltonian), c->cfg.hbars,
                                                c->cfg.assumption_cutoffs);
    auto r = std::make_unique<hepp_report>();
    std::ostringstream os;
    hepp::emit_csv(report, os);
    r->csv = os.str();
    r->summary = "verdict " + report.verdict + " (" + report.caveat + ")";
    r->passed = report.verdict == "PASS";
    *out = r.release();
    return HEPP_OK;
  });
}

hepp_status hepp_check_invariants(uint64_t seed, const int* sizes, size_t n_sizes, int fault_injection,
                                  hepp_report** out) {
  REQUIRE(out && (sizes || n_sizes == 0), "hepp_check_invariants: null argument");
  return guarded([&] {
    hepp::SuiteOptions opts;
    opts.seed = seed;
    if (n_sizes) opts.sizes.assign(sizes, sizes + n_sizes);
    opts.fault_injection = fault_injection != 0;
    const auto ledger = hepp::run_invariant_suite(opts);
    auto r = std::make_unique<hepp_report>();
    std::ostringstream os;
    hepp::emit_csv(ledger, os);
    r->csv = os.str();
    int pass = 0, failed = 0, skipped = 0;
    for (const auto& row : ledger.rows) {
      if (row.verdict == "PASS") ++pass;
      else if (row.verdict == "FAIL") ++failed;
      else ++skipped;
    }
    r->summary = std::to_string(pass) + " passed, " + std::to_string(failed) + " failed, " +
                 std::to_string(skipped) + " skipped";
    r->passed = ledger.all_passed();
    *out = r.release();
    return HEPP_OK;
  });
}

int hepp_report_passed(const hepp_report* r) { return r && r->passed ? 1 : 0; }

const char* hepp_report_summary(const hepp_report* r) { return r ? r->summary.c_str() : ""; }

hepp_status hepp_report_csv(const hepp_report* r, char* buf, size_t cap, size_t* needed) {
  REQUIRE(r, "hepp_report_csv: null report");
  return copy_out(r->csv, buf, cap, needed);
}

hepp_status hepp_report_write(const hepp_report* r, const char* path) {
  REQUIRE(r && path, "hepp_report_write: null argument");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) return fail(HEPP_ERR_IO, std::string("cannot open '") + path + "' for writing");
  f << r->csv;
  f.flush();
  if (!f) return fail(HEPP_ERR_IO, std::string("write failed for '") + path + "'");
  return HEPP_OK;
}

void hepp_report_free(hepp_report* r) { delete r; }

}  // extern "C"
