#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "correlators.hpp"

namespace hepp {

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& msg, std::string path) : std::runtime_error(msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class AssumptionNotMet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitRefused : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class StudyKind { WDistance, Correlator, Static };

struct Study {
  StudyKind kind = StudyKind::WDistance;
  MultiPoly observable;
  bool center = false;
  bool rescale = false;

  // "w_distance", "correlator" or "static"; the observable and flags come from cfg.
  static Study from_name(const std::string& name, const SimConfig& cfg);
};

struct ConvergenceRow {
  double hbar = 0;
  double t = 0;
  std::string metric;
  double value = 0;
  bool truncation_flag = false;
};

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double sse = 0;
};

struct FitEntry {
  std::string metric;  // "metric@t=..." when the study has several times
  std::string status;  // "ok", "below noise floor", "insufficient clean rows"
  RateFit fit;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<FitEntry> fits;
  std::vector<int> cutoffs;  // one per hbar, in cfg order

  const FitEntry* find_fit(const std::string& metric) const;
  std::vector<double> values(const std::string& metric, double t) const;
};

// Least squares of log(value) against log(hbar).
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

// Working cutoff for one hbar under the configured policy.
int working_cutoff(const SimConfig& cfg, double alpha_max, double hbar, int degree);

ConvergenceReport run_convergence(const SimConfig& cfg, const Study& study);

struct AssumptionRecord {
  double hbar = 0;
  int M = 0;
  double min_eig = 0;
  double C = 0;
  int beta = 0;
  double c_beta = 0;
  std::string verdict;
};

struct AssumptionReport {
  std::vector<AssumptionRecord> records;
  std::string verdict;  // PASS, FAIL or UNSTABLE
  std::string caveat = "numeric screen on truncated interior, not a proof";
};

AssumptionReport check_assumption1(const NcPoly& h, const std::vector<double>& hbars, std::vector<int> cutoffs);

struct InvariantRow {
  std::string id;
  double residual = 0;
  double bound = 0;
  std::string verdict;  // PASS, FAIL or SKIPPED
};

struct InvariantLedger {
  std::vector<InvariantRow> rows;
  bool all_passed() const;
};

struct SuiteOptions {
  std::uint64_t seed = 20240917;
  std::vector<int> sizes{40, 60};
  bool fault_injection = false;
};

InvariantLedger run_invariant_suite(const SuiteOptions& opts = {});
// The Fock-space subset: CCR, diagonal structure and the operator inequalities.
InvariantLedger run_operator_inequalities(const SuiteOptions& opts = {});

// Individual measurements shared by the suite and the tests.
NcPoly random_poly(std::mt19937_64& rng, int max_degree, bool symmetric);
// Max entry gap between P(a_hbar, a_hbar^dag) and its normal-ordered form on rows/cols 0..M-deg.
double normal_order_defect(const NcPoly& p, double hbar, int M);
// k^{k/2} (k+1)^beta (M-k+2)^{beta+k/2-alpha}
double tail_bound(int k, double beta, double alpha_weight, int M);
// sup over interior block 0..block-1 of W0(t)^* a W0(t) - (gamma a + delta a^dag).
double bogoliubov_residual(const Trajectory& traj, const SteppedPropagator& w0, double t, int block,
                           bool creation = false);

void emit_csv(const ConvergenceReport& r, std::ostream& os);
void emit_csv(const AssumptionReport& r, std::ostream& os);
void emit_csv(const InvariantLedger& r, std::ostream& os);
void emit_csv(const ConvergenceReport& r, const std::string& path);
void emit_csv(const AssumptionReport& r, const std::string& path);
void emit_csv(const InvariantLedger& r, const std::string& path);

std::string format_double(double x);

}  // namespace hepp
