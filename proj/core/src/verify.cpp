#include "dms/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "dms/diagnostics.hpp"
#include "dms/evolution.hpp"
#include "dms/parallel.hpp"
#include "dms/random_field.hpp"
#include "dms/summation.hpp"

namespace dms {

const char* to_string(CheckKind k) {
  switch (k) {
    case CheckKind::identity: return "identity";
    case CheckKind::inequality: return "inequality";
    case CheckKind::fitted: return "fitted";
    case CheckKind::strict: return "strict";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Keeps the largest value offered and the witness that produced it. NaN is
// sticky, it always counts as the worst case.
struct Tracker {
  double worst = 0.0;
  long samples = 0;
  bool seen = false;
  Witness witness;

  template <class MakeWitness>
  void offer(double v, MakeWitness&& make) {
    ++samples;
    if (seen && std::isnan(worst)) return;
    if (!seen || !(v <= worst)) {
      worst = v;
      witness = make();
      seen = true;
    }
  }

  void merge(const Tracker& other) {
    const long n = samples + other.samples;
    if (other.seen) offer(other.worst, [&] { return other.witness; });
    samples = n;
  }
};

double threshold_for(CheckKind kind, double stability_tolerance) {
  switch (kind) {
    case CheckKind::identity: return kIdentityTolerance;
    case CheckKind::inequality: return 1.0 + kInequalitySlack;
    case CheckKind::fitted: return 1.0 + stability_tolerance;
    case CheckKind::strict: return 1.0;
  }
  return 0.0;
}

SubCheck make_part(std::string name, CheckKind kind, const Tracker& t,
                   double stability_tolerance = 0.0) {
  SubCheck p;
  p.name = std::move(name);
  p.kind = kind;
  p.worst = t.worst;
  p.samples = t.samples;
  p.tolerance = threshold_for(kind, stability_tolerance);
  p.pass = kind == CheckKind::strict ? t.worst < p.tolerance : t.worst <= p.tolerance;
  p.witness = t.witness;
  return p;
}

EstimateReport finish(std::string id, int trials, std::uint64_t seed,
                      std::vector<SubCheck> parts) {
  EstimateReport r;
  r.id = std::move(id);
  r.trials = trials;
  r.seed = seed;
  const SubCheck* failing = nullptr;
  const SubCheck* worst_ratio_part = nullptr;
  const SubCheck* worst_identity_part = nullptr;
  for (const auto& p : parts) {
    if (!p.pass) {
      r.pass = false;
      if (!failing) failing = &p;
    }
    if (p.kind == CheckKind::identity) {
      if (!worst_identity_part || !(p.worst <= r.identity_error)) {
        r.identity_error = p.worst;
        worst_identity_part = &p;
      }
    } else if (!worst_ratio_part || !(p.worst <= r.worst_ratio)) {
      r.worst_ratio = p.worst;
      worst_ratio_part = &p;
    }
  }
  const SubCheck* w = failing ? failing
                              : (worst_ratio_part ? worst_ratio_part : worst_identity_part);
  if (w) r.witness = w->witness;
  r.parts = std::move(parts);
  return r;
}

// observed / bound with 0/0 = 0.
double ratio(double observed, double bound) {
  if (observed <= 0.0) return 0.0;
  if (bound <= 0.0) return kInf;
  return observed / bound;
}

double uniform(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

Complex complex_normal(Rng& rng) {
  std::normal_distribution<double> n;
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

EvolutionMethod precise_method(EvolutionVariant v = EvolutionVariant::taylor_scaled) {
  EvolutionMethod m;
  m.variant = v;
  m.leak_tolerance = 1e-17;
  return m;
}

std::string p_label(double p) { return std::isinf(p) ? "inf" : fmt::format("{}", p); }

// ---------------------------------------------------------------------------
// IMS localization

// Real function on the sites [-R, R], zero outside.
struct RealSeq {
  int radius = 0;
  std::vector<double> v;
  double operator()(long x) const {
    return (x < -radius || x > radius) ? 0.0 : v[static_cast<std::size_t>(x + radius)];
  }
};

LatticeField multiply(const RealSeq& xi, const LatticeField& f) {
  LatticeField out(f.radius());
  for (long x = -f.radius(); x <= f.radius(); ++x) out.at(x) = xi(x) * f[x];
  return out;
}

double quadratic_form(const LatticeField& g) {
  return -inner(g, laplacian(g)).real();
}

// ½⟨f, (|D₊ξ|² + |D₋ξ|²) f⟩
double cutoff_error(const RealSeq& xi, const LatticeField& f) {
  CompensatedSum s;
  for (long x = -f.radius(); x <= f.radius(); ++x) {
    const double dp = xi(x + 1) - xi(x);
    const double dm = xi(x) - xi(x - 1);
    s += 0.5 * (dp * dp + dm * dm) * std::norm(f[x]);
  }
  return s.value();
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Three cutoffs with ξ₋₁² + ξ₀² + ξ₁² = 1, either smooth bumps from two
// angle ramps or normalized random positive values.
std::vector<RealSeq> random_partition(Rng& rng, int radius, bool smooth) {
  const int R = radius + 1;
  std::vector<RealSeq> xi(3, RealSeq{R, std::vector<double>(2 * R + 1)});
  if (smooth) {
    const double a = uniform(rng, -0.6 * radius, 0.0);
    const double b = uniform(rng, 0.0, 0.6 * radius);
    const double wa = uniform(rng, 1.0, 8.0);
    const double wb = uniform(rng, 1.0, 8.0);
    for (int x = -R; x <= R; ++x) {
      const double t1 = 0.5 * std::numbers::pi * smoothstep((x - a) / wa + 0.5);
      const double t2 = 0.5 * std::numbers::pi * smoothstep((x - b) / wb + 0.5);
      const auto i = static_cast<std::size_t>(x + R);
      xi[0].v[i] = std::cos(t1);
      xi[1].v[i] = std::sin(t1) * std::cos(t2);
      xi[2].v[i] = std::sin(t1) * std::sin(t2);
    }
  } else {
    for (int x = -R; x <= R; ++x) {
      const auto i = static_cast<std::size_t>(x + R);
      double s = 0.0;
      for (auto& q : xi) {
        q.v[i] = uniform(rng, 0.05, 1.0);
        s += q.v[i] * q.v[i];
      }
      for (auto& q : xi) q.v[i] /= std::sqrt(s);
    }
  }
  return xi;
}

struct ImsTrial {
  Tracker identity, lower, partition_random, partition_smooth;
};

ImsTrial ims_trial(long trial, std::uint64_t trial_seed, int radius) {
  Rng rng(trial_seed);
  ImsTrial out;
  RandomFieldOptions fo;
  fo.envelope_rate = uniform(rng, 0.0, 0.3);
  fo.dropout = uniform(rng, 0.0, 0.5);
  const LatticeField f = random_field(rng, radius, fo);

  // bounded real ξ on [-M-1, M+1]: iid values or a few smooth modes
  RealSeq xi{radius + 1, std::vector<double>(2 * radius + 3)};
  const bool smooth_xi = trial % 2 == 1;
  const double amp = uniform(rng, 0.1, 3.0);
  if (smooth_xi) {
    double k[3], ph[3], c[3];
    for (int j = 0; j < 3; ++j) {
      k[j] = uniform(rng, 0.0, 1.0);
      ph[j] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      c[j] = uniform(rng, -1.0, 1.0);
    }
    for (int x = -xi.radius; x <= xi.radius; ++x) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += c[j] * std::cos(k[j] * x + ph[j]);
      xi.v[static_cast<std::size_t>(x + xi.radius)] = amp * s / 3.0;
    }
  } else {
    for (auto& v : xi.v) v = amp * uniform(rng, -1.0, 1.0);
  }
  auto witness = [&](std::string detail) {
    LatticeField xf(xi.radius);
    for (int x = -xi.radius; x <= xi.radius; ++x) xf.at(x) = xi(x);
    return Witness{trial, trial_seed, std::move(detail), {f, xf}};
  };

  const LatticeField g = multiply(xi, f);
  const LatticeField h = multiply(xi, g);
  const double lhs = -inner(h, laplacian(f)).real();
  const double q = quadratic_form(g);
  CompensatedSum corr, corr_abs;
  for (long x = -f.radius() - 1; x <= f.radius(); ++x) {
    const double d = xi(x + 1) - xi(x);
    const Complex pair = std::conj(f[x]) * f[x + 1];
    corr += d * d * pair.real();
    corr_abs += d * d * std::abs(pair);
  }
  const double scale = std::max({std::abs(lhs), std::abs(q), corr_abs.value()});
  const double err = scale > 0.0 ? std::abs(lhs - (q - corr.value())) / scale : 0.0;
  out.identity.offer(err, [&] { return witness(smooth_xi ? "smooth xi" : "iid xi"); });

  // Re⟨ξ²f,−Δf⟩ ≥ ⟨ξf,−Δ(ξf)⟩ − ½⟨f,(|D₊ξ|²+|D₋ξ|²)f⟩, as (q − lhs)/error term.
  // The allowance 1e-13·(|q| + |lhs|) covers rounding in the difference.
  const double round = 1e-13 * (std::abs(q) + std::abs(lhs));
  out.lower.offer(ratio(q - lhs, cutoff_error(xi, f) + round),
                  [&] { return witness(smooth_xi ? "smooth xi" : "iid xi"); });

  for (bool smooth : {false, true}) {
    const auto parts = random_partition(rng, radius, smooth);
    const double whole = quadratic_form(f);
    CompensatedSum pieces, err_term;
    double abs_scale = std::abs(whole);
    for (const auto& p : parts) {
      const double qj = quadratic_form(multiply(p, f));
      pieces += qj;
      abs_scale += std::abs(qj);
      err_term += cutoff_error(p, f);
    }
    const double r = ratio(pieces.value() - whole, err_term.value() + 1e-13 * abs_scale);
    auto& t = smooth ? out.partition_smooth : out.partition_random;
    t.offer(r, [&] {
      Witness w{trial, trial_seed, smooth ? "smooth partition" : "random partition", {f}};
      for (const auto& p : parts) {
        LatticeField pf(p.radius);
        for (int x = -p.radius; x <= p.radius; ++x) pf.at(x) = p(x);
        w.fields.push_back(std::move(pf));
      }
      return w;
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Separated pairs

// f₁ on [a−w+1, a], f₂ on [a+s, a+s+w−1] with both inner endpoints nonzero,
// so dist(supp f₁, supp f₂) = s exactly.
std::pair<LatticeField, LatticeField> separated_pair(Rng& rng, long s, int width) {
  const long a = -s / 2;
  const long lo1 = a - width + 1;
  const long hi2 = a + s + width - 1;
  const int radius = static_cast<int>(std::max(-lo1, hi2)) + 1;
  RandomFieldOptions o;
  o.restrict_support = true;
  o.envelope_rate = uniform(rng, 0.0, 0.4);
  o.dropout = uniform(rng, 0.0, 0.4);
  o.lo = lo1;
  o.hi = a;
  o.center = a;
  LatticeField f1 = random_field(rng, radius, o);
  o.lo = a + s;
  o.hi = hi2;
  o.center = a + s;
  LatticeField f2 = random_field(rng, radius, o);
  if (f1[a] == Complex{}) f1.at(a) = complex_normal(rng);
  if (f2[a + s] == Complex{}) f2.at(a + s) = complex_normal(rng);
  return {std::move(f1), std::move(f2)};
}

// max over the first half of the entries (the base range) against the max over
// all of them (the doubled range); 1 when the constant does not grow.
double range_growth(const std::vector<double>& constants) {
  if (constants.size() < 2) return 0.0;
  const std::size_t half = (constants.size() + 1) / 2;
  const double base = *std::max_element(constants.begin(), constants.begin() + half);
  const double full = *std::max_element(constants.begin(), constants.end());
  if (full == 0.0) return 1.0;
  if (base == 0.0) return kInf;
  return full / base;
}

double envelope(long s, double alpha) {
  if (s <= 0) return 1.0;
  return std::min(1.0, std::pow(static_cast<double>(s), -alpha * static_cast<double>(s)));
}

LatticeField common_box(const LatticeField& f, int radius) {
  return f.radius() == radius ? f : f.resized(radius);
}

}  // namespace

// ---------------------------------------------------------------------------

nlohmann::json to_json(const EstimateReport& r) {
  auto witness_json = [](const Witness& w) {
    return nlohmann::json{{"trial", w.trial}, {"seed", w.seed}, {"detail", w.detail}};
  };
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : r.parts) {
    parts.push_back({{"name", p.name},
                     {"kind", to_string(p.kind)},
                     {"worst", std::isfinite(p.worst) ? nlohmann::json(p.worst)
                                                      : nlohmann::json(nullptr)},
                     {"tolerance", p.tolerance},
                     {"samples", p.samples},
                     {"pass", p.pass},
                     {"witness", witness_json(p.witness)}});
  }
  auto finite_or_null = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  return {{"id", r.id},
          {"trials", r.trials},
          {"seed", r.seed},
          {"worst_ratio", finite_or_null(r.worst_ratio)},
          {"identity_error", finite_or_null(r.identity_error)},
          {"pass", r.pass},
          {"witness", witness_json(r.witness)},
          {"parts", parts}};
}

EstimateReport ims_check(int trials, std::uint64_t seed, int radius) {
  if (trials < 1) throw std::invalid_argument("ims_check needs trials >= 1");
  if (radius < 2) throw std::invalid_argument("ims_check needs radius >= 2");
  std::vector<ImsTrial> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), [&](std::size_t i) {
    results[i] = ims_trial(static_cast<long>(i), derive_seed(seed, i), radius);
  });
  ImsTrial all;
  for (const auto& t : results) {
    all.identity.merge(t.identity);
    all.lower.merge(t.lower);
    all.partition_random.merge(t.partition_random);
    all.partition_smooth.merge(t.partition_smooth);
  }
  return finish("ims", trials, seed,
                {make_part("ims_identity", CheckKind::identity, all.identity),
                 make_part("ims_lower_single", CheckKind::inequality, all.lower),
                 make_part("ims_lower_partition_random", CheckKind::inequality,
                           all.partition_random),
                 make_part("ims_lower_partition_smooth", CheckKind::inequality,
                           all.partition_smooth)});
}

// ---------------------------------------------------------------------------

double bilinear_bound(double B, long s) {
  if (!(B > 0.0) || s < 0) throw std::invalid_argument("bilinear_bound needs B > 0, s >= 0");
  const long k = (s + 1) / 2;
  const double log_b = std::log(8.0) + 16.0 * B + static_cast<double>(k) * std::log(4.0 * B) -
                       std::lgamma(static_cast<double>(k) + 1.0);
  return log_b >= 0.0 ? 1.0 : std::exp(log_b);
}

EstimateReport bilinear_check(int trials, std::uint64_t seed, const BilinearOptions& opt) {
  if (trials < 1) throw std::invalid_argument("bilinear_check needs trials >= 1");
  if (opt.r_samples < 2 || opt.width < 1 || opt.bounds.empty() || opt.separations.empty() ||
      opt.exponents.empty()) {
    throw std::invalid_argument("bilinear_check: empty grid");
  }
  for (double b : opt.bounds) {
    if (!(b > 0.0) || b > 16.0) throw std::invalid_argument("bilinear_check needs 0 < B <= 16");
  }
  const std::size_t nb = opt.bounds.size();
  const std::size_t ns = opt.separations.size();
  struct Trial {
    Tracker bound;
    std::vector<double> decay;  // sup_r ‖T_rf₁T_rf₂‖₁/(‖f₁‖‖f₂‖) / ((4B)^k/k!), per (B, s)
  };
  std::vector<Trial> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), [&](std::size_t i) {
    const std::uint64_t ts = derive_seed(seed, i);
    Rng rng(ts);
    Trial& out = results[i];
    out.decay.assign(nb * ns, 0.0);
    for (std::size_t ib = 0; ib < nb; ++ib) {
      const double B = opt.bounds[ib];
      const EvolutionMethod method = precise_method();
      for (std::size_t is = 0; is < ns; ++is) {
        const long s = opt.separations[is];
        auto [f1, f2] = separated_pair(rng, s, opt.width);
        const long actual = support_distance(f1, f2);
        const double n12 = l2_norm(f1) * l2_norm(f2);
        const double bound = bilinear_bound(B, actual);
        std::vector<double> sup(opt.exponents.size(), 0.0);
        std::vector<double> arg(opt.exponents.size(), 0.0);
        double sup1 = 0.0;
        for (int k = 0; k < opt.r_samples; ++k) {
          const double r = -B + 2.0 * B * k / (opt.r_samples - 1);
          const LatticeField prod =
              pointwise_product(apply_evolution(r, f1, method), apply_evolution(r, f2, method));
          sup1 = std::max(sup1, lp_norm(prod, 1.0));
          for (std::size_t ip = 0; ip < opt.exponents.size(); ++ip) {
            const double v = lp_norm(prod, opt.exponents[ip]);
            if (v > sup[ip]) {
              sup[ip] = v;
              arg[ip] = r;
            }
          }
        }
        for (std::size_t ip = 0; ip < opt.exponents.size(); ++ip) {
          out.bound.offer(ratio(sup[ip], bound * n12), [&] {
            return Witness{static_cast<long>(i), ts,
                           fmt::format("B={} s={} p={} r={}", B, actual,
                                       p_label(opt.exponents[ip]), arg[ip]),
                           {f1, f2}};
          });
        }
        const long k = (actual + 1) / 2;
        const double log_scale = static_cast<double>(k) * std::log(4.0 * B) -
                                 std::lgamma(static_cast<double>(k) + 1.0);
        out.decay[ib * ns + is] = sup1 / n12 / std::exp(log_scale);
      }
    }
  });
  Tracker bound;
  for (const auto& t : results) bound.merge(t.bound);
  std::vector<SubCheck> parts{make_part("bilinear_bound", CheckKind::inequality, bound)};

  // factorial decay beyond s = 8B: the constant in front of (4B)^k/k! must not
  // grow when the separation range is doubled
  Tracker decay;
  for (std::size_t ib = 0; ib < nb; ++ib) {
    const double B = opt.bounds[ib];
    std::vector<std::pair<long, double>> cs;
    for (std::size_t is = 0; is < ns; ++is) {
      if (static_cast<double>(opt.separations[is]) <= 8.0 * B) continue;
      double c = 0.0;
      for (const auto& t : results) c = std::max(c, t.decay[ib * ns + is]);
      cs.emplace_back(opt.separations[is], c);
    }
    if (cs.size() < 2) continue;
    std::sort(cs.begin(), cs.end());
    std::vector<double> constants;
    for (const auto& [s, c] : cs) constants.push_back(c);
    decay.offer(range_growth(constants), [&] {
      return Witness{-1, seed, fmt::format("B={} s={}..{}", B, cs.front().first, cs.back().first),
                     {}};
    });
  }
  if (decay.seen) parts.push_back(make_part("bilinear_factorial_decay", CheckKind::fitted, decay, 0.0));
  return finish("bilinear", trials, seed, std::move(parts));
}

// ---------------------------------------------------------------------------

long support_distance(const LatticeField& f1, const LatticeField& f2) {
  std::vector<long> s1, s2;
  for (long x = -f1.radius(); x <= f1.radius(); ++x) {
    if (f1[x] != Complex{}) s1.push_back(x);
  }
  for (long x = -f2.radius(); x <= f2.radius(); ++x) {
    if (f2[x] != Complex{}) s2.push_back(x);
  }
  if (s1.empty() || s2.empty()) return -1;
  // both lists are sorted, walk them together
  long best = std::numeric_limits<long>::max();
  std::size_t i = 0, j = 0;
  while (i < s1.size() && j < s2.size()) {
    best = std::min(best, std::abs(s1[i] - s2[j]));
    if (s1[i] < s2[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return best;
}

namespace {

// Σ_j w_j Σ_x term(T_{r_j}f₁(x), T_{r_j}f₂(x))
template <class Term>
double pair_integral(const DiffractionMeasure& mu, const EvolutionMethod& method,
                     const LatticeField& f1, const LatticeField& f2, Term&& term) {
  const int radius = std::max(f1.radius(), f2.radius());
  const LatticeField a = common_box(f1, radius);
  const LatticeField b = common_box(f2, radius);
  CompensatedSum total;
  for (const Atom& atom : mu.atoms()) {
    const LatticeField ta = apply_evolution(atom.node, a, method);
    const LatticeField tb = apply_evolution(atom.node, b, method);
    CompensatedSum s;
    for (long x = -ta.radius(); x <= ta.radius(); ++x) s += term(ta[x], tb[x]);
    total += atom.weight * s.value();
  }
  return total.value();
}

}  // namespace

double m_functional(const DiffractionMeasure& mu, double gamma, const LatticeField& f1,
                    const LatticeField& f2) {
  if (!(gamma >= 2.0)) throw std::invalid_argument("m_functional needs gamma >= 2");
  return pair_integral(mu, precise_method(), f1, f2, [gamma](Complex a, Complex b) {
    const double x = std::abs(a);
    const double y = std::abs(b);
    if (x == 0.0 || y == 0.0) return 0.0;
    return x * y * std::pow(x + y, gamma - 2.0);
  });
}

double l_functional(const DiffractionMeasure& mu, double gamma, const LatticeField& f1,
                    const LatticeField& f2) {
  if (!(gamma >= 1.0)) throw std::invalid_argument("l_functional needs gamma >= 1");
  return pair_integral(mu, precise_method(), f1, f2, [gamma](Complex a, Complex b) {
    const double y = std::abs(b);
    if (y == 0.0) return 0.0;
    return std::abs(a) * std::pow(y, gamma - 1.0);
  });
}

double splitting_defect(const Problem& problem, const LatticeField& f1, const LatticeField& f2) {
  const NonlinearitySpec& v = problem.nonlinearity;
  return pair_integral(problem.measure, problem.method, f1, f2,
                       [&v](Complex a, Complex b) { return v.split_defect(a, b); });
}

EstimateReport splitting_check(int trials, std::uint64_t seed, const Problem& problem,
                               const SplittingOptions& opt) {
  if (trials < 1) throw std::invalid_argument("splitting_check needs trials >= 1");
  if (!(opt.alpha > 0.0 && opt.alpha < 0.5)) {
    throw std::invalid_argument("splitting_check needs 0 < alpha < 1/2");
  }
  if (opt.separations.empty() || opt.width < 1 || opt.pointwise_samples < 2) {
    throw std::invalid_argument("splitting_check: empty grid");
  }
  problem.nonlinearity.validate();
  const NonlinearitySpec& V = problem.nonlinearity;
  const double g1 = V.gamma1;
  const double g2 = V.gamma2;
  std::vector<long> seps = opt.separations;
  std::sort(seps.begin(), seps.end());
  const std::size_t ns = seps.size();

  struct Trial {
    Tracker zero;  // exact zero when z or w vanishes
    Tracker identity;
    double pointwise_base = 0.0;
    double pointwise_full = 0.0;
    std::vector<double> n_env, m1_env, m2_env;  // per separation
  };
  std::vector<Trial> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), [&](std::size_t i) {
    const std::uint64_t ts = derive_seed(seed, i);
    Rng rng(ts);
    Trial& out = results[i];

    // pointwise defect over amplitudes in [1e-3, R] and then [1e-3, 2R]; the
    // second half of the samples extends the range
    const double R = 4.0;
    const int half = opt.pointwise_samples / 2;
    for (int k = 0; k < opt.pointwise_samples; ++k) {
      const double top = k < half ? R : 2.0 * R;
      const double a = std::exp(uniform(rng, std::log(1e-3), std::log(top)));
      const double b = std::exp(uniform(rng, std::log(1e-3), std::log(top)));
      const Complex z = std::polar(a, uniform(rng, 0.0, 2.0 * std::numbers::pi));
      // half of the w are aligned with z, where the defect is largest
      const double phase = k % 2 == 0 ? std::arg(z) : uniform(rng, 0.0, 2.0 * std::numbers::pi);
      const Complex w = std::polar(b, phase);
      const double sum = a + b;
      const double denom = (std::pow(sum, g1 - 2.0) + std::pow(sum, g2 - 2.0)) * a * b;
      const double c = std::abs(V.split_defect(z, w)) / denom;
      if (k < half) out.pointwise_base = std::max(out.pointwise_base, c);
      out.pointwise_full = std::max(out.pointwise_full, c);
      const double zero = std::abs(V.split_defect(z, 0.0)) + std::abs(V.split_defect(0.0, w));
      out.zero.offer(zero, [&] {
        return Witness{static_cast<long>(i), ts, fmt::format("z={} w=0", a), {}};
      });
    }

    out.n_env.assign(ns, 0.0);
    out.m1_env.assign(ns, 0.0);
    out.m2_env.assign(ns, 0.0);
    for (std::size_t is = 0; is < ns; ++is) {
      auto [f1, f2] = separated_pair(rng, seps[is], opt.width);
      const long s = support_distance(f1, f2);
      const double n1 = l2_norm(f1);
      const double n2 = l2_norm(f2);
      const double env = envelope(s, opt.alpha);

      const double defect = splitting_defect(problem, f1, f2);
      const double whole = nonlocal_potential(problem, f1 + f2);
      const double p1 = nonlocal_potential(problem, f1);
      const double p2 = nonlocal_potential(problem, f2);
      const double scale = std::abs(whole) + std::abs(p1) + std::abs(p2);
      const double err = scale > 0.0 ? std::abs((whole - p1 - p2) - defect) / scale : 0.0;
      out.identity.offer(err, [&] {
        return Witness{static_cast<long>(i), ts, fmt::format("s={}", s), {f1, f2}};
      });

      const double n_norm = n1 * n2 * (1.0 + std::pow(n1, g2 - 2.0) + std::pow(n2, g2 - 2.0));
      out.n_env[is] = std::abs(defect) / (n_norm * env);
      out.m1_env[is] = m_functional(problem.measure, g1, f1, f2) /
                       (env * n1 * n2 * std::pow(n1 + n2, g1 - 2.0));
      out.m2_env[is] = m_functional(problem.measure, g2, f1, f2) /
                       (env * n1 * n2 * std::pow(n1 + n2, g2 - 2.0));
    }
  });

  Tracker zero, identity;
  double pw_base = 0.0, pw_full = 0.0;
  std::vector<double> n_c(ns, 0.0), m1_c(ns, 0.0), m2_c(ns, 0.0);
  for (const auto& t : results) {
    zero.merge(t.zero);
    identity.merge(t.identity);
    pw_base = std::max(pw_base, t.pointwise_base);
    pw_full = std::max(pw_full, t.pointwise_full);
    for (std::size_t is = 0; is < ns; ++is) {
      n_c[is] = std::max(n_c[is], t.n_env[is]);
      m1_c[is] = std::max(m1_c[is], t.m1_env[is]);
      m2_c[is] = std::max(m2_c[is], t.m2_env[is]);
    }
  }
  auto fitted = [&](const char* what, double growth, double constant) {
    Tracker t;
    t.offer(growth, [&] {
      return Witness{-1, seed, fmt::format("{} constant {:.6g}", what, constant), {}};
    });
    t.samples = trials;
    return t;
  };
  std::vector<SubCheck> parts;
  {
    Tracker t = fitted("pointwise", pw_base > 0.0 ? pw_full / pw_base : 1.0, pw_full);
    parts.push_back(make_part("pointwise_splitting", CheckKind::fitted, t,
                              opt.stability_tolerance));
  }
  // an exact zero is the contract, so any nonzero value fails
  parts.push_back(make_part("pointwise_zero", CheckKind::identity, zero));
  parts.back().pass = zero.worst == 0.0;
  parts.push_back(make_part("splitting_identity", CheckKind::identity, identity));
  const double sep_range = static_cast<double>(seps.back());
  for (auto [name, cs] : {std::pair{"n_splitting_envelope", &n_c},
                          std::pair{"m_gamma1_envelope", &m1_c},
                          std::pair{"m_gamma2_envelope", &m2_c}}) {
    Tracker t = fitted(name, range_growth(*cs), *std::max_element(cs->begin(), cs->end()));
    t.witness.detail += fmt::format(" s<={}", sep_range);
    parts.push_back(make_part(name, CheckKind::fitted, t, opt.stability_tolerance));
  }
  return finish("splitting", trials, seed, std::move(parts));
}

// ---------------------------------------------------------------------------

namespace {

// Random test field of one of several shapes: smooth, spiky, constant block,
// single site.
LatticeField shaped_field(Rng& rng, int radius, int shape) {
  switch (shape % 4) {
    case 0: {
      RandomFieldOptions o;
      o.envelope_rate = uniform(rng, 0.02, 0.3);
      o.dropout = 0.0;
      return random_field(rng, radius, o);
    }
    case 1: {
      RandomFieldOptions o;
      o.envelope_rate = 0.0;
      o.dropout = uniform(rng, 0.5, 0.9);
      return random_field(rng, radius, o);
    }
    case 2: {
      const int k = std::uniform_int_distribution<int>(1, radius)(rng);
      const Complex c = complex_normal(rng);
      LatticeField f(radius);
      for (int x = -k / 2; x < -k / 2 + k; ++x) f.at(x) = c;
      return f;
    }
    default:
      return delta(radius, 0, complex_normal(rng));
  }
}

}  // namespace

EstimateReport functional_inequalities_check(int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("functional_inequalities_check needs trials >= 1");
  constexpr int kRadius = 20;
  const double gammas[] = {6.0, 7.5, 10.0};
  const double ps[] = {1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  const double etas[] = {1e-3, 1.0, 10.0};
  struct Trial {
    Tracker weinstein, linf, lp_diff;
  };
  std::vector<Trial> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), [&](std::size_t i) {
    const std::uint64_t ts = derive_seed(seed, i);
    Rng rng(ts);
    Trial& out = results[i];
    const int shape = static_cast<int>(i % 4);
    const LatticeField f = shaped_field(rng, kRadius, shape);
    const double n2 = l2_norm(f);
    const double d2 = dirichlet_energy(f);
    for (double g : gammas) {
      out.weinstein.offer(ratio(power_sum(f, g), std::pow(n2, g - 2.0) * d2), [&] {
        return Witness{static_cast<long>(i), ts, fmt::format("shape={} gamma={}", shape, g), {f}};
      });
    }
    const double sup = sup_norm(f);
    out.linf.offer(ratio(sup * sup, n2 * std::sqrt(d2)), [&] {
      return Witness{static_cast<long>(i), ts, fmt::format("shape={}", shape), {f}};
    });

    const double eta = etas[i % 3];
    LatticeField g = shaped_field(rng, kRadius, static_cast<int>((i / 4) % 4));
    g *= eta / l2_norm(g) * n2;
    const LatticeField f2 = f + g;
    for (double p : ps) {
      const double a = lp_norm(f, p);
      const double b = lp_norm(f2, p);
      const double lhs = std::abs(power_sum(f, p) - power_sum(f2, p));
      const double rhs = p * std::max(std::pow(a, p - 1.0), std::pow(b, p - 1.0)) * lp_norm(g, p);
      out.lp_diff.offer(ratio(lhs, rhs), [&] {
        return Witness{static_cast<long>(i), ts, fmt::format("shape={} p={} eta={}", shape, p, eta),
                       {f, f2}};
      });
    }
  });
  Trial all;
  for (const auto& t : results) {
    all.weinstein.merge(t.weinstein);
    all.linf.merge(t.linf);
    all.lp_diff.merge(t.lp_diff);
  }
  return finish("functional_inequalities", trials, seed,
                {make_part("weinstein", CheckKind::inequality, all.weinstein),
                 make_part("linf_bound", CheckKind::inequality, all.linf),
                 make_part("lp_difference", CheckKind::inequality, all.lp_diff)});
}

// ---------------------------------------------------------------------------

EstimateReport subadditivity_check(const EnergyCurve& curve, double gamma0,
                                   const SubadditivityOptions& opt) {
  if (!(gamma0 > 2.0)) throw std::invalid_argument("subadditivity_check needs gamma0 > 2");
  struct Point {
    double lambda, energy;
  };
  std::vector<Point> pts;
  for (const auto& p : curve.points) {
    if (!p.error.empty() || !std::isfinite(p.energy)) continue;
    pts.push_back({p.lambda, p.energy});
  }
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.lambda < b.lambda; });
  const double h = 0.5 * gamma0;
  const double c2 = std::pow(2.0, h) - 2.0;

  Tracker bound, strict;
  long triples = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double lam = pts[k].lambda;
    const double tol = opt.abs_tol + opt.rel_tol * std::abs(pts[k].energy);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i; j < pts.size(); ++j) {
        const double l1 = pts[i].lambda;
        const double l2 = pts[j].lambda;
        if (l1 + l2 > lam * (1.0 + 1e-12)) continue;
        const double dmax = std::min({l1, l2, std::nextafter(0.5 * lam, 0.0)});
        const double lhs = pts[i].energy + pts[j].energy;
        for (double delta : {dmax, 0.5 * dmax, 1e-6 * dmax}) {
          ++triples;
          const double factor = 1.0 - c2 * std::pow(delta / lam, h);
          // E₁ + E₂ ≥ factor·E_λ with both sides ≤ 0: −(E₁+E₂) ≤ −factor·E_λ + tol
          const double observed = std::max(0.0, -lhs);
          const double allowed = std::max(0.0, -factor * pts[k].energy) + tol;
          bound.offer(ratio(observed, allowed), [&] {
            return Witness{-1, 0,
                           fmt::format("lambda1={} lambda2={} lambda={} delta={}", l1, l2, lam,
                                       delta),
                           {}};
          });
        }
      }
    }
    // 2E_λ > E_{2λ} where E_{2λ} < threshold
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::abs(2.0 * pts[i].lambda - lam) > 1e-12 * lam) continue;
      if (!(pts[k].energy < opt.strict_threshold)) continue;
      strict.offer(std::abs(2.0 * pts[i].energy) / std::abs(pts[k].energy), [&] {
        return Witness{-1, 0, fmt::format("lambda={} 2lambda={}", pts[i].lambda, lam), {}};
      });
    }
  }
  std::vector<SubCheck> parts;
  if (bound.seen) parts.push_back(make_part("quantitative_subadditivity", CheckKind::inequality, bound));
  if (strict.seen) parts.push_back(make_part("strict_subadditivity", CheckKind::strict, strict));
  if (parts.empty()) {
    warn("subadditivity_check: no admissible lambda triples on the curve");
  }
  (void)triples;
  return finish("subadditivity", static_cast<int>(std::max<std::size_t>(1, pts.size())), 0,
                std::move(parts));
}

// ---------------------------------------------------------------------------

EstimateReport evolution_bounds_check(int trials, std::uint64_t seed, double r_max,
                                      EvolutionVariant variant) {
  if (trials < 1) throw std::invalid_argument("evolution_bounds_check needs trials >= 1");
  if (!(r_max > 0.0) || r_max > 8.0) {
    throw std::invalid_argument("evolution_bounds_check needs 0 < r_max <= 8");
  }
  constexpr int kRadius = 16;
  const double ps[] = {1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0, kInf};
  const EvolutionMethod method = precise_method(variant);
  struct Trial {
    Tracker growth, continuity, unitarity, group, commute;
  };
  std::vector<Trial> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), [&](std::size_t i) {
    const std::uint64_t ts = derive_seed(seed, i);
    Rng rng(ts);
    Trial& out = results[i];
    const LatticeField f = shaped_field(rng, kRadius, static_cast<int>(i % 4));
    const double r = uniform(rng, -r_max, r_max);
    const double p = ps[std::uniform_int_distribution<std::size_t>(0, std::size(ps) - 1)(rng)];
    auto witness = [&](std::string detail) {
      return Witness{static_cast<long>(i), ts, std::move(detail), {f}};
    };

    const LatticeField tf = apply_evolution(r, f, method);
    const double fp = lp_norm(f, p);
    const double growth = std::isinf(p) ? 4.0 * std::abs(r) : 4.0 * std::abs(r) * std::abs(1.0 - 2.0 / p);
    out.growth.offer(ratio(lp_norm(tf, p), std::exp(growth) * fp),
                     [&] { return witness(fmt::format("r={} p={}", r, p_label(p))); });
    out.continuity.offer(ratio(lp_norm(common_box(f, tf.radius()) - tf, p),
                               std::expm1(4.0 * std::abs(r)) * fp),
                         [&] { return witness(fmt::format("r={} p={}", r, p_label(p))); });

    const double n2 = power_sum(f, 2.0);
    out.unitarity.offer(std::abs(power_sum(tf, 2.0) - n2) / n2,
                        [&] { return witness(fmt::format("r={}", r)); });

    // T_a T_b f = T_{a+b} f with |a|, |b|, |a+b| ≤ r_max
    const double a = uniform(rng, -0.5 * r_max, 0.5 * r_max);
    const double b = uniform(rng, -0.5 * r_max, 0.5 * r_max);
    const LatticeField two = apply_evolution(a, apply_evolution(b, f, method), method);
    const LatticeField one = apply_evolution(a + b, f, method);
    const int rg = std::max(two.radius(), one.radius());
    out.group.offer(l2_norm(common_box(two, rg) - common_box(one, rg)) / std::sqrt(n2),
                    [&] { return witness(fmt::format("a={} b={}", a, b)); });

    // T_r Δ f = Δ T_r f
    const LatticeField lhs = apply_evolution(r, laplacian(f), method);
    const LatticeField rhs = laplacian(tf);
    const int rc = std::max(lhs.radius(), rhs.radius());
    const double lap_norm = l2_norm(laplacian(f));
    out.commute.offer(lap_norm > 0.0 ? l2_norm(common_box(lhs, rc) - common_box(rhs, rc)) / lap_norm
                                     : 0.0,
                      [&] { return witness(fmt::format("r={}", r)); });
  });

  Trial all;
  for (const auto& t : results) {
    all.growth.merge(t.growth);
    all.continuity.merge(t.continuity);
    all.unitarity.merge(t.unitarity);
    all.group.merge(t.group);
    all.commute.merge(t.commute);
  }
  // kernel bound on a fixed grid r ∈ [−r_max, r_max], |n| ≤ 25
  Tracker kernel;
  for (int k = 0; k <= 80; ++k) {
    const double r = -r_max + 2.0 * r_max * k / 80.0;
    for (long n = -25; n <= 25; ++n) {
      kernel.offer(ratio(std::abs(kernel_entry(r, n)), kernel_bound(r, n)),
                   [&] { return Witness{-1, 0, fmt::format("r={} n={}", r, n), {}}; });
    }
  }
  return finish("evolution_bounds", trials, seed,
                {make_part("lp_growth", CheckKind::inequality, all.growth),
                 make_part("continuity", CheckKind::inequality, all.continuity),
                 make_part("kernel_bound", CheckKind::inequality, kernel),
                 make_part("unitarity", CheckKind::identity, all.unitarity),
                 make_part("group_law", CheckKind::identity, all.group),
                 make_part("laplacian_commutation", CheckKind::identity, all.commute)});
}

}  // namespace dms
