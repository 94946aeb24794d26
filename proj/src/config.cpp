#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace hepp {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0;
  const std::string s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const std::string s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

// "re" or "re,im"
cplx to_complex(const std::string& key, const std::string& v) {
  const auto parts = split(v);
  if (parts.size() == 1) return {to_double(key, parts[0]), 0.0};
  if (parts.size() == 2) return {to_double(key, parts[0]), to_double(key, parts[1])};
  throw ConfigError(key + ": expected 're' or 're, im'");
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"hamiltonian", {"poly", "skip_assumption_check"}},
      {"classical", {"alpha0", "times"}},
      {"quantum",
       {"psi", "psi_im", "cutoff", "kappa", "w0_cutoff", "max_step", "observable", "center", "rescale"}},
      {"sweep", {"hbars", "concurrency", "seed", "assumption_cutoffs", "noise_floor"}},
      {"tolerances", {"ode", "unitarity", "tail"}},
  };
  return s;
}

}  // namespace

void SimConfig::validate() const {
  if (trim(hamiltonian).empty()) throw ConfigError("[hamiltonian] poly is required");
  if (hbars.empty()) throw ConfigError("[sweep] hbars must not be empty");
  for (std::size_t i = 0; i < hbars.size(); ++i) {
    if (!(hbars[i] > 0 && hbars[i] <= 1)) throw ConfigError("[sweep] hbars must lie in (0, 1]");
    if (i && !(hbars[i] < hbars[i - 1])) throw ConfigError("[sweep] hbars must be strictly decreasing");
  }
  if (hbars.size() < 4) throw ConfigError("[sweep] hbars needs at least 4 entries for rate fitting");
  if (times.empty()) throw ConfigError("[classical] times must not be empty");
  if (!(ode_tol > 0)) throw ConfigError("[tolerances] ode must be positive");
  if (!(tail_eps > 0)) throw ConfigError("[tolerances] tail must be positive");
  if (!(unitarity_tol > 0)) throw ConfigError("[tolerances] unitarity must be positive");
  if (!(kappa > 0)) throw ConfigError("[quantum] kappa must be positive");
  if (cutoff_mode == CutoffMode::Fixed && fixed_cutoff < 2) throw ConfigError("[quantum] cutoff must be >= 2");
  if (w0_cutoff < 2) throw ConfigError("[quantum] w0_cutoff must be >= 2");
  if (!(max_step > 0)) throw ConfigError("[quantum] max_step must be positive");
  if (concurrency < 1) throw ConfigError("[sweep] concurrency must be >= 1");
  if (assumption_cutoffs.size() < 2) throw ConfigError("[sweep] assumption_cutoffs needs at least two values");
  if (!psi.empty()) {
    double n = 0;
    for (auto c : psi) n += std::norm(c);
    if (n == 0) throw ConfigError("[quantum] psi must not be the zero vector");
  }
  if (rescale && !center) throw ConfigError("[quantum] rescale requires center = true");
}

SimConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  const auto& sch = schema();
  for (const auto& [section, body] : tree) {
    auto it = sch.find(section);
    if (it == sch.end()) throw ConfigError("unknown section [" + section + "]");
    if (!body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    for (const auto& [key, v] : body)
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '/'))) return *v;
    return std::nullopt;
  };

  SimConfig c;
  if (auto v = get("hamiltonian/poly")) c.hamiltonian = trim(*v);
  if (auto v = get("hamiltonian/skip_assumption_check")) c.skip_assumption_check = to_bool("skip_assumption_check", *v);
  if (auto v = get("classical/alpha0")) c.alpha0 = to_complex("alpha0", *v);
  if (auto v = get("classical/times")) {
    c.times.clear();
    for (const auto& s : split(*v)) c.times.push_back(to_double("times", s));
  }
  if (auto v = get("quantum/psi")) {
    const std::string s = trim(*v);
    if (s != "vacuum") {
      for (const auto& x : split(s)) c.psi.emplace_back(to_double("psi", x), 0.0);
      if (c.psi.empty()) throw ConfigError("psi: expected 'vacuum' or a coefficient list");
    }
  }
  if (auto v = get("quantum/psi_im")) {
    const auto parts = split(*v);
    if (parts.size() != c.psi.size()) throw ConfigError("psi_im: length must match psi");
    for (std::size_t i = 0; i < parts.size(); ++i) c.psi[i] += cplx(0.0, to_double("psi_im", parts[i]));
  }
  if (auto v = get("quantum/cutoff")) {
    const std::string s = trim(*v);
    if (s == "auto") {
      c.cutoff_mode = CutoffMode::Auto;
    } else {
      c.cutoff_mode = CutoffMode::Fixed;
      c.fixed_cutoff = static_cast<int>(to_int("cutoff", s));
    }
  }
  if (auto v = get("quantum/kappa")) c.kappa = to_double("kappa", *v);
  if (auto v = get("quantum/w0_cutoff")) c.w0_cutoff = static_cast<int>(to_int("w0_cutoff", *v));
  if (auto v = get("quantum/max_step")) c.max_step = to_double("max_step", *v);
  if (auto v = get("quantum/observable")) c.observable = trim(*v);
  if (auto v = get("quantum/center")) c.center = to_bool("center", *v);
  if (auto v = get("quantum/rescale")) c.rescale = to_bool("rescale", *v);
  if (auto v = get("sweep/hbars"))
    for (const auto& s : split(*v)) c.hbars.push_back(to_double("hbars", s));
  if (auto v = get("sweep/concurrency")) c.concurrency = static_cast<int>(to_int("concurrency", *v));
  if (auto v = get("sweep/seed")) c.seed = static_cast<std::uint64_t>(to_int("seed", *v));
  if (auto v = get("sweep/assumption_cutoffs")) {
    c.assumption_cutoffs.clear();
    for (const auto& s : split(*v)) c.assumption_cutoffs.push_back(static_cast<int>(to_int("assumption_cutoffs", s)));
  }
  if (auto v = get("sweep/noise_floor")) c.noise_floor = to_double("noise_floor", *v);
  if (auto v = get("tolerances/ode")) c.ode_tol = to_double("ode", *v);
  if (auto v = get("tolerances/unitarity")) c.unitarity_tol = to_double("unitarity", *v);
  if (auto v = get("tolerances/tail")) c.tail_eps = to_double("tail", *v);

  try {
    (void)NcPoly::parse(c.hamiltonian);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("[hamiltonian] poly: ") + e.what());
  }
  try {
    (void)parse_slot_terms(c.observable);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("[quantum] observable: ") + e.what());
  }
  c.validate();
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hepp
