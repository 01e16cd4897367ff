#include "dms_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include <fmt/format.h>

namespace dms::cli {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}: {}", source, line, message)
                                  : fmt::format("{}: {}", source, message)),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view s) {
  s = trim(s);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument(fmt::format("'{}' is not a number", s));
  }
  if (!std::isfinite(v)) throw std::invalid_argument(fmt::format("'{}' is not finite", s));
  return v;
}

long to_integer(std::string_view s) {
  s = trim(s);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument(fmt::format("'{}' is not an integer", s));
  }
  return v;
}

int to_int(std::string_view s) {
  const long v = to_integer(s);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::invalid_argument(fmt::format("'{}' is out of range", trim(s)));
  }
  return static_cast<int>(v);
}

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument(fmt::format("'{}' is not a boolean", s));
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t j = s.find_first_of(" \t", i);
    if (i < s.size()) out.push_back(s.substr(i, j == std::string_view::npos ? j : j - i));
    i = j == std::string_view::npos ? s.size() : j;
  }
  return out;
}

std::vector<double> number_list(std::string_view s) {
  std::vector<double> out;
  for (auto item : split(s, ',')) out.push_back(to_double(item));
  return out;
}

std::vector<std::pair<double, double>> pair_list(std::string_view s) {
  std::vector<std::pair<double, double>> out;
  for (auto item : split(s, ',')) {
    const auto w = words(item);
    if (w.size() != 2) {
      throw std::invalid_argument(fmt::format("expected two numbers in '{}'", item));
    }
    out.emplace_back(to_double(w[0]), to_double(w[1]));
  }
  return out;
}

double positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(fmt::format("{} must be > 0", what));
  return v;
}

// Values that need the whole file before they can be turned into a Problem.
struct Pending {
  std::optional<double> period;
  std::vector<Segment> segments;
  int quadrature = 32;
  std::vector<Atom> atoms;
  std::vector<PowerTerm> terms;
  std::optional<double> gamma0, gamma1, gamma2, kappa;
};

using Setter = std::function<void(RunConfig&, Pending&, std::string_view)>;

struct KeyInfo {
  const char* name;
  const char* help;
  Setter set;
};

const std::vector<KeyInfo>& key_table() {
  static const std::vector<KeyInfo> table = {
      // problem
      {"d_av", "averaged diffraction d_av >= 0",
       [](RunConfig& c, Pending&, std::string_view v) { c.problem.d_av = to_double(v); }},
      {"lambda", "power constraint λ > 0",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.problem.lambda = positive(to_double(v), "lambda");
       }},
      {"period", "period L of d₀",
       [](RunConfig&, Pending& p, std::string_view v) {
         p.period = positive(to_double(v), "period");
       }},
      {"segments", "d₀ as 'length value' pairs",
       [](RunConfig&, Pending& p, std::string_view v) {
         for (auto [len, val] : pair_list(v)) p.segments.push_back({len, val});
       }},
      {"quadrature", "Gauss-Legendre nodes per segment",
       [](RunConfig&, Pending& p, std::string_view v) { p.quadrature = to_int(v); }},
      {"atoms", "μ as 'node weight' pairs (overrides segments for μ)",
       [](RunConfig&, Pending& p, std::string_view v) {
         for (auto [node, w] : pair_list(v)) p.atoms.push_back({node, w});
       }},
      {"terms", "V as 'coefficient exponent' pairs, default Kerr a⁴/4",
       [](RunConfig&, Pending& p, std::string_view v) {
         for (auto [coef, e] : pair_list(v)) p.terms.push_back({coef, e});
       }},
      {"gamma0", "homogeneity exponent γ₀",
       [](RunConfig&, Pending& p, std::string_view v) { p.gamma0 = to_double(v); }},
      {"gamma1", "lower growth exponent γ₁",
       [](RunConfig&, Pending& p, std::string_view v) { p.gamma1 = to_double(v); }},
      {"gamma2", "upper growth exponent γ₂",
       [](RunConfig&, Pending& p, std::string_view v) { p.gamma2 = to_double(v); }},
      {"kappa", "small-amplitude exponent κ",
       [](RunConfig&, Pending& p, std::string_view v) { p.kappa = to_double(v); }},
      {"method", "taylor_scaled | closed_kernel | spectral_ring",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.problem.method.variant = parse_evolution_variant(trim(v));
       }},
      {"leak_tolerance", "kernel leakage allowed past the box",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.problem.method.leak_tolerance = positive(to_double(v), "leak_tolerance");
       }},
      // solver
      {"max_iters", "descent iterations per start",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.max_iters = to_int(v); }},
      {"grad_tol", "stop at ‖g − ωf‖/‖f‖ below this",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.grad_tol = to_double(v); }},
      {"step_init", "initial step",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.step_init = to_double(v); }},
      {"backtrack", "Armijo backtracking factor",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.backtrack = to_double(v); }},
      {"sufficient_decrease", "Armijo constant",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.solve.sufficient_decrease = to_double(v);
       }},
      {"recenter_every", "iterations between recentering",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.recenter_every = to_int(v); }},
      {"restarts", "random starts besides the structured ones",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.restarts = to_int(v); }},
      {"seed", "master seed",
       [](RunConfig& c, Pending&, std::string_view v) {
         const long s = to_integer(v);
         if (s < 0) throw std::invalid_argument("seed must be >= 0");
         c.solve.seed = static_cast<std::uint64_t>(s);
       }},
      {"box_radius", "initial box radius M",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.box.box_radius = to_int(v); }},
      {"tail_floor", "edge amplitude that triggers box growth",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.box.tail_floor = to_double(v); }},
      {"auto_grow", "grow the box when the tail reaches the edge",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.auto_grow = to_bool(v); }},
      {"max_box_radius", "largest box radius",
       [](RunConfig& c, Pending&, std::string_view v) { c.solve.max_box_radius = to_int(v); }},
      // sweep and threshold
      {"lambdas", "λ grid for sweep and threshold",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.lambdas = number_list(v);
         for (double l : c.lambdas) positive(l, "lambdas");
       }},
      {"bracket", "'lo hi' bracket for the λ_cr bisection",
       [](RunConfig& c, Pending&, std::string_view v) {
         const auto w = pair_list(v);
         if (w.size() != 1 || !(0.0 < w[0].first && w[0].first < w[0].second)) {
           throw std::invalid_argument("bracket needs 0 < lo < hi");
         }
         c.bracket = w[0];
       }},
      {"rel_width", "relative bracket width where bisection stops",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.rel_width = positive(to_double(v), "rel_width");
       }},
      // propagation
      {"dt", "time step",
       [](RunConfig& c, Pending&, std::string_view v) { c.propagation.dt = to_double(v); }},
      {"t_end", "final time",
       [](RunConfig& c, Pending&, std::string_view v) { c.propagation.t_end = to_double(v); }},
      {"epsilon", "fast scale ε of the full flow",
       [](RunConfig& c, Pending&, std::string_view v) { c.propagation.epsilon = to_double(v); }},
      {"scheme", "strang | rk4 (averaged flow)",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.propagation.scheme = parse_propagation_scheme(trim(v));
       }},
      {"record_every", "steps between trajectory rows",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.propagation.record_every = to_int(v);
       }},
      {"snapshot_every", "steps between field snapshots, 0 for none",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.propagation.snapshot_every = to_int(v);
       }},
      {"fast_steps", "full-flow steps per fast period at least",
       [](RunConfig& c, Pending&, std::string_view v) { c.propagation.fast_steps = to_int(v); }},
      {"epsilons", "ε list for the breather experiment",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.epsilons = number_list(v);
         for (double e : c.epsilons) positive(e, "epsilons");
       }},
      // verify
      {"trials", "random trials per estimate",
       [](RunConfig& c, Pending&, std::string_view v) {
         c.trials = to_int(v);
         if (c.trials < 1) throw std::invalid_argument("trials must be >= 1");
       }},
  };
  return table;
}

void finish(RunConfig& c, Pending& p) {
  const auto fail = [&](const std::string& m) { throw ConfigError(c.source, 0, m); };
  if (!p.segments.empty()) {
    PiecewiseProfile prof;
    double len = 0.0;
    for (const auto& s : p.segments) len += s.length;
    prof.period = p.period.value_or(len);
    prof.segments = p.segments;
    try {
      prof.validate();
      prof.mean_zero = std::abs(prof.mean_integral()) <= 1e-12;
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    c.profile = prof;
  } else if (p.period) {
    fail("period given without segments");
  }
  try {
    if (!p.atoms.empty()) {
      c.problem.measure = DiffractionMeasure(p.atoms);
    } else if (c.profile) {
      if (p.quadrature < 1) fail("quadrature must be >= 1");
      c.problem.measure = measure_from_profile(*c.profile, p.quadrature);
    }
    if (!p.terms.empty()) {
      double lowest = p.terms.front().exponent;
      for (const auto& t : p.terms) lowest = std::min(lowest, t.exponent);
      c.problem.nonlinearity = NonlinearitySpec::from_terms(p.terms, p.gamma0.value_or(lowest));
    } else if (p.gamma0) {
      c.problem.nonlinearity.gamma0 = *p.gamma0;
    }
    auto& nl = c.problem.nonlinearity;
    if (p.gamma1) nl.gamma1 = *p.gamma1;
    if (p.gamma2) nl.gamma2 = *p.gamma2;
    if (p.kappa) nl.kappa = *p.kappa;
    c.problem.validate();
    c.solve.validate();
    if (c.profile) c.propagation.profile = *c.profile;
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& known_keys() {
  static const auto keys = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : key_table()) out.emplace_back(k.name, k.help);
    return out;
  }();
  return keys;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig c;
  c.source = source;
  Pending pending;
  std::map<std::string, int> seen;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source, number, fmt::format("expected 'key = value', got '{}'", body));
    }
    const std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));
    const auto& table = key_table();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const KeyInfo& k) { return key == k.name; });
    if (it == table.end()) throw ConfigError(source, number, fmt::format("unknown key '{}'", key));
    if (auto [pos, fresh] = seen.emplace(key, number); !fresh) {
      throw ConfigError(source, number,
                        fmt::format("'{}' already set on line {}", key, pos->second));
    }
    if (value.empty()) throw ConfigError(source, number, fmt::format("'{}' has no value", key));
    try {
      it->set(c, pending, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(source, number, fmt::format("{}: {}", key, e.what()));
    }
    c.values[key] = std::string(value);
  }
  finish(c, pending);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  return parse_config(in, path);
}

}  // namespace dms::cli
