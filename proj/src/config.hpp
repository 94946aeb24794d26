#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncpoly.hpp"

namespace hepp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CutoffMode { Auto, Fixed };

struct SimConfig {
  // [hamiltonian]
  std::string hamiltonian;
  bool skip_assumption_check = false;
  // [classical]
  cplx alpha0{1.0};
  std::vector<double> times{1.0};
  // [quantum]
  std::vector<cplx> psi;  // empty: vacuum
  CutoffMode cutoff_mode = CutoffMode::Auto;
  double kappa = 4.0;
  int fixed_cutoff = 0;
  int w0_cutoff = 120;
  double max_step = 1e-2;
  std::string observable = "a1 a1*";
  bool center = false;
  bool rescale = false;
  // [sweep]
  std::vector<double> hbars;
  int concurrency = 1;
  std::uint64_t seed = 20240917;
  std::vector<int> assumption_cutoffs{200, 400};
  double noise_floor = 1e-6;
  // [tolerances]
  double ode_tol = 1e-10;
  double unitarity_tol = 1e-8;
  double tail_eps = 1e-8;

  void validate() const;
};

SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);

}  // namespace hepp
