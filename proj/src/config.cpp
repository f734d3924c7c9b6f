#include "npqn/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace npqn {

const char *to_string(Variant v) {
  switch (v) {
  case Variant::NPQNA: return "npqna";
  case Variant::PQNA: return "pqna";
  case Variant::NPGA: return "npga";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "npqna")
    return Variant::NPQNA;
  if (lower == "pqna")
    return Variant::PQNA;
  if (lower == "npga")
    return Variant::NPGA;
  return std::nullopt;
}

namespace {

void require(bool ok, const std::string &what) {
  if (!ok)
    throw Error(Errc::InvalidConfig, what);
}

double parse_double(std::string_view key, std::string_view text) {
  try {
    std::size_t used = 0;
    const std::string s(text);
    const double v = std::stod(s, &used);
    if (used != s.size())
      throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception &) {
    throw Error(Errc::InvalidConfig, "value '" + std::string(text) + "' for " + std::string(key) +
                                         " is not a number");
  }
}

long long parse_int(std::string_view key, std::string_view text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(Errc::InvalidConfig, "value '" + std::string(text) + "' for " + std::string(key) +
                                         " is not an integer");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "on" || text == "yes")
    return true;
  if (text == "0" || text == "false" || text == "off" || text == "no")
    return false;
  throw Error(Errc::InvalidConfig, "value '" + std::string(text) + "' for " + std::string(key) +
                                       " is not a boolean");
}

} // namespace

void SolverConfig::validate() const {
  require(rho > 0.0 && rho < 1.0, "rho must lie in (0,1)");
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0,1)");
  require(mu > 0.0, "mu must be positive");
  require(eta >= 0.0 && eta < 1.0, "eta must lie in [0,1)");
  require(epsilon_theta >= 0.0, "epsilon_theta must be nonnegative");
  require(d_tol >= 0.0, "d_tol must be nonnegative");
  require(max_iter >= 0, "max_iter must be nonnegative");
  require(max_backtracks >= 0, "max_backtracks must be nonnegative");
  require(spd_floor > 0.0, "spd_floor must be positive");
  require(pqna_reg >= 0.0, "pqna_reg must be nonnegative");
  require(subproblem_tol > 0.0, "subproblem_tol must be positive");
}

SolverConfig SolverConfig::benchmark_preset() {
  SolverConfig c;
  c.eta = 1e-4;
  return c;
}

const std::vector<std::string> &config_keys() {
  static const std::vector<std::string> keys = {
      "variant", "rho",      "tau",           "mu",          "eta",
      "epsilon_theta", "d_tol", "max_iter",   "max_backtracks", "spd_floor",
      "pqna_reg", "subproblem_tol", "enforce_box", "raw_curvature_rule", "seed"};
  return keys;
}

void set_config_value(SolverConfig &c, std::string_view key, std::string_view value) {
  if (key == "variant") {
    auto v = parse_variant(value);
    if (!v)
      throw Error(Errc::InvalidConfig, "unknown variant '" + std::string(value) + "'");
    c.variant = *v;
  } else if (key == "rho") {
    c.rho = parse_double(key, value);
  } else if (key == "tau") {
    c.tau = parse_double(key, value);
  } else if (key == "mu") {
    c.mu = parse_double(key, value);
  } else if (key == "eta") {
    c.eta = parse_double(key, value);
  } else if (key == "epsilon_theta") {
    c.epsilon_theta = parse_double(key, value);
  } else if (key == "d_tol") {
    c.d_tol = parse_double(key, value);
  } else if (key == "max_iter") {
    c.max_iter = static_cast<int>(parse_int(key, value));
  } else if (key == "max_backtracks") {
    c.max_backtracks = static_cast<int>(parse_int(key, value));
  } else if (key == "spd_floor") {
    c.spd_floor = parse_double(key, value);
  } else if (key == "pqna_reg") {
    c.pqna_reg = parse_double(key, value);
  } else if (key == "subproblem_tol") {
    c.subproblem_tol = parse_double(key, value);
  } else if (key == "enforce_box") {
    c.enforce_box = parse_bool(key, value);
  } else if (key == "raw_curvature_rule") {
    c.raw_curvature_rule = parse_bool(key, value);
  } else if (key == "seed") {
    c.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else {
    throw Error(Errc::InvalidConfig, "unknown key '" + std::string(key) + "' (did you mean '" +
                                         nearest(key, config_keys()) + "'?)");
  }
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j)
    prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string nearest(std::string_view word, const std::vector<std::string> &candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto &c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

} // namespace npqn
