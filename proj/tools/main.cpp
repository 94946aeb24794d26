#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "hepp/hepp.h"

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kInfeasible = 3 };

int exit_code(hepp_status s) {
  switch (s) {
    case HEPP_OK: return kOk;
    case HEPP_ERR_PARSE:
    case HEPP_ERR_CONFIG:
    case HEPP_ERR_NOT_SYMMETRIC:
    case HEPP_ERR_INVALID_ARGUMENT:
    case HEPP_ERR_IO: return kConfig;
    case HEPP_ERR_INFEASIBLE:
    case HEPP_ERR_NUMERICAL: return kInfeasible;
    case HEPP_ERR_ASSUMPTION:
    case HEPP_ERR_INTERNAL: return kFailed;
  }
  return kFailed;
}

int report_error(hepp_status s) {
  std::fprintf(stderr, "error: %s: %s\n", hepp_status_name(s), hepp_last_error());
  return exit_code(s);
}

// Writes the CSV to `out` or stdout, and the summary to stderr.
int finish(hepp_report* r, const std::string& out) {
  int code = kOk;
  if (out.empty()) {
    size_t n = 0;
    hepp_report_csv(r, nullptr, 0, &n);
    std::string buf(n, '\0');
    hepp_report_csv(r, buf.data(), n, nullptr);
    std::fputs(buf.c_str(), stdout);
  } else if (hepp_status s = hepp_report_write(r, out.c_str()); s != HEPP_OK) {
    code = report_error(s);
  }
  const char* summary = hepp_report_summary(r);
  if (*summary) std::fprintf(stderr, "%s\n", summary);
  if (code == kOk && !hepp_report_passed(r)) code = kFailed;
  hepp_report_free(r);
  return code;
}

int with_config(const std::string& path, const std::string& out,
                hepp_status (*run)(const hepp_config*, const void*, hepp_report**), const void* extra) {
  hepp_config* cfg = nullptr;
  if (hepp_status s = hepp_config_load(path.c_str(), &cfg); s != HEPP_OK) return report_error(s);
  hepp_report* r = nullptr;
  const hepp_status s = run(cfg, extra, &r);
  hepp_config_free(cfg);
  if (s != HEPP_OK) return report_error(s);
  return finish(r, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical convergence toolkit for polynomial bosonic Hamiltonians"};
  app.require_subcommand(1);

  auto* inv = app.add_subcommand("check-invariants", "Run the invariant suite");
  std::uint64_t seed = 20240917;
  std::vector<int> sizes;
  bool fault = false;
  std::string inv_out;
  inv->add_option("--seed", seed, "Random seed");
  inv->add_option("--sizes", sizes, "Fock cutoffs for the operator checks")->expected(1, -1);
  inv->add_flag("--fault-injection", fault, "Perturb the ladder matrices");
  inv->add_option("--out", inv_out, "CSV output path");

  auto* sim = app.add_subcommand("simulate", "Integrate the classical trajectory");
  std::string sim_cfg, sim_out;
  sim->add_option("config", sim_cfg)->required();
  sim->add_option("--out", sim_out, "CSV output path");

  auto* conv = app.add_subcommand("converge", "Run an hbar convergence study");
  std::string conv_cfg, study, conv_out;
  conv->add_option("config", conv_cfg)->required();
  conv->add_option("--study", study, "w_distance, correlator or static")->required();
  conv->add_option("--out", conv_out, "CSV output path");

  auto* ass = app.add_subcommand("assumptions", "Numeric screen of the coercivity hypothesis");
  std::string ass_cfg, ass_out;
  ass->add_option("config", ass_cfg)->required();
  ass->add_option("--out", ass_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (*inv) {
    hepp_report* r = nullptr;
    const hepp_status s = hepp_check_invariants(seed, sizes.data(), sizes.size(), fault ? 1 : 0, &r);
    if (s != HEPP_OK) return report_error(s);
    return finish(r, inv_out);
  }
  if (*sim)
    return with_config(
        sim_cfg, sim_out, [](const hepp_config* c, const void*, hepp_report** r) { return hepp_simulate(c, r); },
        nullptr);
  if (*conv)
    return with_config(
        conv_cfg, conv_out,
        [](const hepp_config* c, const void* x, hepp_report** r) {
          return hepp_converge(c, static_cast<const std::string*>(x)->c_str(), r);
        },
        &study);
  return with_config(
      ass_cfg, ass_out, [](const hepp_config* c, const void*, hepp_report** r) { return hepp_assumptions(c, r); },
      nullptr);
}
