#include "dms_cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dms/decay.hpp"
#include "dms/diagnostics.hpp"
#include "dms/field_io.hpp"
#include "dms/minimizer.hpp"
#include "dms/propagate.hpp"
#include "dms/threshold.hpp"
#include "dms/verify.hpp"
#include "dms_cli/config.hpp"
#include "dms_cli/schema.hpp"

#ifndef DMS_VERSION
#define DMS_VERSION "unknown"
#endif

namespace dms::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const char* tool_version() { return DMS_VERSION; }

namespace {

struct Options {
  std::string command;
  std::string config;
  std::uint64_t seed = 1;
  bool seed_given = false;
  unsigned threads = 1;
  std::string out;
  // verify
  std::string suite = "identities";
  int trials = 20;
  bool trials_given = false;
  // decay
  std::vector<std::string> inputs;
  double omega = 0.0;
  bool omega_given = false;
  double d_av = 0.0;
  bool d_av_given = false;
  double floor = 1e-13;
  // propagate
  std::string mode = "breather";
  std::string field;
  // replay
  std::string manifest;
};

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

// Collects the files of one run and checks each against its schema once all
// are on disk.
class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

  void json_file(const std::string& rel, const json& doc, const std::string& schema) {
    write(rel, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
    checks_.push_back({rel, [schema](const fs::path& p) {
                         std::ifstream in(p);
                         json doc;
                         try {
                           doc = json::parse(in);
                         } catch (const json::parse_error& e) {
                           return std::vector<std::string>{e.what()};
                         }
                         return validate_json(doc, json_schema(schema));
                       }});
  }

  void csv_file(const std::string& rel, const std::function<void(std::ostream&)>& body,
                std::vector<CsvColumn> columns) {
    write(rel, body);
    checks_.push_back({rel, [columns = std::move(columns)](const fs::path& p) {
                         std::ifstream in(p);
                         return validate_csv(in, columns);
                       }});
  }

  void field_file(const std::string& rel, const LatticeField& f) {
    fs::create_directories((dir_ / rel).parent_path());
    save_field(dir_ / rel, f);
    files_.push_back(rel);
    checks_.push_back({rel, validate_field_file});
  }

  /// "file: problem" lines, empty when every file conforms.
  std::vector<std::string> validate() const {
    std::vector<std::string> problems;
    for (const auto& [rel, check] : checks_) {
      for (const auto& e : check(dir_ / rel)) problems.push_back(rel + ": " + e);
    }
    return problems;
  }

 private:
  void write(const std::string& rel, const std::function<void(std::ostream&)>& body) {
    const fs::path p = dir_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    body(os);
    if (!os) throw std::runtime_error("write failed for " + p.string());
    files_.push_back(rel);
  }

  fs::path dir_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, std::function<std::vector<std::string>(const fs::path&)>>>
      checks_;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

RunConfig load(const Options& o) {
  RunConfig c = load_config(o.config);
  return c;
}

std::uint64_t effective_seed(const Options& o, const RunConfig* c) {
  if (o.seed_given) return o.seed;
  if (c && c->values.count("seed")) return c->solve.seed;
  return 1;
}

// Arguments that rerun this exact command, with absolute paths and the
// effective seed, but without the output directory.
std::vector<std::string> canonical_args(const Options& o, std::uint64_t seed) {
  std::vector<std::string> a{o.command};
  if (o.command == "verify") {
    a.insert(a.end(), {"--suite", o.suite, "--trials", std::to_string(o.trials)});
    if (!o.config.empty()) a.insert(a.end(), {"--config", absolute(o.config)});
  } else if (o.command == "decay") {
    for (const auto& in : o.inputs) a.push_back(absolute(in));
    a.insert(a.end(), {"--floor", fmt::format("{}", o.floor)});
    if (o.omega_given) a.insert(a.end(), {"--omega", fmt::format("{}", o.omega)});
    if (o.d_av_given) a.insert(a.end(), {"--d-av", fmt::format("{}", o.d_av)});
  } else {
    a.push_back(absolute(o.config));
    if (o.command == "propagate") {
      a.insert(a.end(), {"--mode", o.mode});
      if (!o.field.empty()) a.insert(a.end(), {"--field", absolute(o.field)});
    }
  }
  a.insert(a.end(), {"--seed", std::to_string(seed), "--threads", std::to_string(o.threads)});
  return a;
}

void write_history(std::ostream& os, const SolveResult& r) {
  os << "iteration,energy,grad_norm\n";
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    os << i << ',' << num(r.history[i].energy) << ',' << num(r.history[i].grad_norm) << '\n';
  }
}

int cmd_solve(const RunConfig& c, Output& out, std::ostream& log) {
  const SolveResult r = minimize(c.problem, c.solve);
  out.field_file("field.txt", r.field);
  out.csv_file("history.csv", [&](std::ostream& os) { write_history(os, r); },
               csv_schema("history"));
  out.json_file("result.json", to_json(r, c.problem, "field.txt"), "solve");
  log << fmt::format("E = {:.12g}  omega = {:.12g}  residual = {:.3g}  status = {}  start = {}\n",
                     r.energy, r.omega, r.residual, to_string(r.status), r.start);
  return r.status == SolveStatus::not_converged ? kNumericFailure : kSuccess;
}

int cmd_sweep(const RunConfig& c, Output& out, std::ostream& log) {
  if (c.lambdas.empty()) throw ConfigError(c.source, 0, "sweep needs 'lambdas'");
  const EnergyCurve curve = energy_curve(c.problem, c.lambdas, c.solve);
  out.csv_file("energy_curve.csv",
               [&](std::ostream& os) {
                 os << "lambda,E,omega,residual,status\n";
                 for (const auto& p : curve.points) {
                   os << num(p.lambda) << ',' << num(p.energy) << ',' << num(p.omega) << ','
                      << num(p.residual) << ',' << to_string(p.status) << '\n';
                 }
               },
               csv_schema("energy_curve"));
  out.json_file("energy_curve.json", to_json(curve), "energy_curve");
  for (std::size_t i = 0; i < curve.results.size(); ++i) {
    out.field_file(fmt::format("fields/lambda_{:03}.txt", i), curve.results[i].field);
  }
  const EstimateReport rep = subadditivity_check(curve, c.problem.nonlinearity.gamma0);
  out.json_file("subadditivity.json", to_json(rep), "estimate");
  for (const auto& p : curve.points) {
    log << fmt::format("lambda = {:<10g} E = {:<22.15g} status = {}\n", p.lambda, p.energy,
                       to_string(p.status));
  }
  log << fmt::format("subadditivity: {}  worst ratio {:.6g}\n", rep.pass ? "pass" : "FAIL",
                     rep.worst_ratio);
  const bool shape_ok = curve.positive_energy.empty() && curve.monotone_breaks.empty();
  if (!shape_ok) log << "energy curve: positive energy or monotonicity break\n";
  return rep.pass && shape_ok ? kSuccess : kNumericFailure;
}

int cmd_threshold(const RunConfig& c, Output& out, std::ostream& log) {
  if (c.lambdas.empty()) throw ConfigError(c.source, 0, "threshold needs 'lambdas'");
  const ThresholdReport r = threshold_report(c.problem, c.lambdas, c.solve, c.bracket);
  out.csv_file("threshold.csv", [&](std::ostream& os) { write_threshold_csv(os, r); },
               csv_schema("threshold"));
  out.json_file("threshold.json", to_json(r), "threshold");
  for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
    log << fmt::format("lambda = {:<10g} R_hat = {:<22.15g} E = {:.15g}\n", r.lambdas[i],
                       r.r_hat[i], r.energies[i]);
  }
  if (r.estimate) log << fmt::format("lambda_cr = {:.10g}\n", r.estimate->lambda_cr);
  log << fmt::format("scaling checks: {}\n", r.scaling.all_pass ? "pass" : "FAIL");
  return r.scaling.all_pass ? kSuccess : kNumericFailure;
}

struct DecayInput {
  std::string name;
  LatticeField field;
  std::optional<double> omega, d_av;
};

DecayInput read_decay_input(const std::string& path) {
  DecayInput in;
  in.name = path;
  if (fs::path(path).extension() == ".json") {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open " + path);
    const json j = json::parse(is);
    in.field = load_field(fs::path(path).parent_path() / j.at("field").get<std::string>());
    in.omega = j.at("omega").get<double>();
    in.d_av = j.at("d_av").get<double>();
  } else {
    in.field = load_field(path);
  }
  return in;
}

int cmd_decay(const Options& o, Output& out, std::ostream& log) {
  json fields = json::array();
  for (std::size_t i = 0; i < o.inputs.size(); ++i) {
    DecayInput in = read_decay_input(o.inputs[i]);
    if (o.omega_given) in.omega = o.omega;
    if (o.d_av_given) in.d_av = o.d_av;
    const TailStats st = analyze_tail(in.field, o.floor);
    const std::string csv = fmt::format("tail_{:03}_{}.csv", i, fs::path(in.name).stem().string());
    std::vector<CsvColumn> cols{{"n"}, {"beta"}};
    if (st.exp_fit) cols.push_back({"exp_model"});
    if (st.superexp_fit) cols.push_back({"superexp_model"});
    out.csv_file(csv,
                 [&](std::ostream& os) {
                   write_tail_csv(os, st.beta, st.exp_fit ? &*st.exp_fit : nullptr,
                                  st.superexp_fit ? &*st.superexp_fit : nullptr);
                 },
                 cols);
    const auto fit_json = [](const std::optional<RateFit>& f) {
      if (!f) return json(nullptr);
      return json{{"rate", f->rate},         {"intercept", f->intercept},
                  {"residual", f->residual}, {"window", {f->window.lo, f->window.hi}},
                  {"floor", f->floor}};
    };
    json entry = {{"input", absolute(in.name)},
                  {"csv", csv},
                  {"box_radius", in.field.radius()},
                  {"floor", st.floor},
                  {"exp_rate", st.exp_fit ? json(st.exp_fit->rate) : json(nullptr)},
                  {"superexp_rate", st.superexp_fit ? json(st.superexp_fit->rate) : json(nullptr)},
                  {"exp_fit", fit_json(st.exp_fit)},
                  {"superexp_fit", fit_json(st.superexp_fit)},
                  {"heuristic_rate", nullptr}};
    std::string heuristic;
    if (in.omega && in.d_av && *in.d_av > 0.0 && *in.omega < 0.0) {
      const double h = heuristic_rate(*in.omega, *in.d_av);
      entry["heuristic_rate"] = h;
      entry["omega"] = *in.omega;
      entry["d_av"] = *in.d_av;
      heuristic = fmt::format("  heuristic {:.6g}", h);
    }
    fields.push_back(entry);
    log << fmt::format("{}: exp rate {}  superexp rate {}{}\n", in.name,
                       st.exp_fit ? fmt::format("{:.6g}", st.exp_fit->rate) : "-",
                       st.superexp_fit ? fmt::format("{:.6g}", st.superexp_fit->rate) : "-",
                       heuristic);
  }
  out.json_file("decay.json", json{{"fields", fields}}, "decay");
  return kSuccess;
}

// Default problem of the estimates that need one: uniform μ on [0, 1], Kerr,
// d_av = 1.
Problem model_problem() {
  Problem p;
  PiecewiseProfile prof;
  prof.period = 1.0;
  prof.segments = {{1.0, 1.0}};
  p.measure = measure_from_profile(prof, 32);
  p.d_av = 1.0;
  p.lambda = 4.0;
  return p;
}

int cmd_verify(const Options& o, const RunConfig* c, std::uint64_t seed, Output& out,
               std::ostream& log) {
  const Problem problem = c ? c->problem : model_problem();
  std::vector<std::function<EstimateReport()>> jobs;
  const bool identities = o.suite == "identities" || o.suite == "all";
  const bool estimates = o.suite == "estimates" || o.suite == "all";
  const int n = o.trials;
  if (identities) {
    jobs.emplace_back([&] { return ims_check(n, seed); });
    jobs.emplace_back([&] { return evolution_bounds_check(n, seed); });
  }
  if (estimates) {
    jobs.emplace_back([&] { return bilinear_check(n, seed); });
    jobs.emplace_back([&] { return functional_inequalities_check(n, seed); });
    jobs.emplace_back([&] { return splitting_check(n, seed, problem); });
  }
  bool all_pass = true;
  json reports = json::array();
  for (const auto& job : jobs) {
    const EstimateReport r = job();
    const std::string file = r.id + ".json";
    out.json_file(file, to_json(r), "estimate");
    json entry = {{"id", r.id}, {"pass", r.pass}, {"file", file}};
    if (!r.pass) {
      // witnesses of the report and of every failing part
      json witness_files = json::array();
      auto persist = [&](const Witness& w, const std::string& tag) {
        for (std::size_t k = 0; k < w.fields.size(); ++k) {
          const std::string rel = fmt::format("witnesses/{}_{}_{}.txt", r.id, tag, k);
          out.field_file(rel, w.fields[k]);
          witness_files.push_back(rel);
        }
      };
      persist(r.witness, "worst");
      for (const auto& p : r.parts) {
        if (!p.pass) persist(p.witness, p.name);
      }
      entry["witness_files"] = witness_files;
    }
    reports.push_back(entry);
    all_pass = all_pass && r.pass;
    log << fmt::format("{:<24} {}  worst ratio {:<12.6g} identity error {:.3g}\n", r.id,
                       r.pass ? "PASS" : "FAIL", r.worst_ratio, r.identity_error);
    for (const auto& p : r.parts) {
      if (!p.pass) {
        log << fmt::format("  {} failed: worst {:.6g} tolerance {:.3g} ({})\n", p.name, p.worst,
                           p.tolerance, p.witness.detail);
      }
    }
  }
  out.json_file("verify_summary.json",
                json{{"suite", o.suite},
                     {"seed", seed},
                     {"trials", n},
                     {"pass", all_pass},
                     {"reports", reports}},
                "verify_summary");
  return all_pass ? kSuccess : kNumericFailure;
}

json snapshots_json(const Trajectory& tr, Output& out) {
  json snaps = json::array();
  for (const auto& s : tr.snapshots) {
    const std::string rel = fmt::format("snapshots/step_{:08}.txt", s.step);
    out.field_file(rel, s.field);
    snaps.push_back({{"step", s.step}, {"t", s.t}, {"file", rel}});
  }
  return snaps;
}

int cmd_propagate(const Options& o, const RunConfig& c, Output& out, std::ostream& log) {
  LatticeField phi;
  double omega = 0.0;
  if (o.field.empty()) {
    const SolveResult r = minimize(c.problem, c.solve);
    out.json_file("soliton.json", to_json(r, c.problem, "soliton.txt"), "solve");
    out.field_file("soliton.txt", r.field);
    if (r.status != SolveStatus::converged) {
      log << fmt::format("soliton solve ended with status {}\n", to_string(r.status));
      return kNumericFailure;
    }
    phi = r.field;
    omega = r.omega;
  } else {
    phi = load_field(o.field);
    omega = lagrange_multiplier(c.problem, phi);
  }
  const bool needs_profile = o.mode != "averaged";
  if (needs_profile && !c.profile) {
    throw ConfigError(c.source, 0, fmt::format("mode '{}' needs 'segments'", o.mode));
  }
  if (o.mode == "breather") {
    const BreatherReport rep = breather_experiment(c.problem, phi, omega, c.propagation, c.epsilons);
    out.json_file("breather.json", to_json(rep), "breather");
    bool failed = !rep.strictly_decreasing;
    for (const auto& run : rep.runs) {
      log << fmt::format("epsilon = {:<8g} dev = {:.6g}{}\n", run.epsilon, run.deviation,
                         run.error.empty() ? "" : "  error: " + run.error);
      failed = failed || !run.error.empty();
    }
    log << fmt::format("averaged deviation {:.3g}  strictly decreasing: {}\n",
                       rep.averaged_deviation, rep.strictly_decreasing ? "yes" : "no");
    return failed ? kNumericFailure : kSuccess;
  }
  const Trajectory tr = o.mode == "averaged" ? propagate_averaged(c.problem, phi, c.propagation)
                                             : propagate_full(c.problem, phi, c.propagation);
  out.csv_file("trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, tr); },
               csv_schema("trajectory"));
  const json snaps = snapshots_json(tr, out);
  out.json_file("propagate.json",
                json{{"mode", o.mode},
                     {"omega", omega},
                     {"scheme", to_string(c.propagation.scheme)},
                     {"dt", c.propagation.dt},
                     {"t_end", c.propagation.t_end},
                     {"epsilon", o.mode == "full" ? json(c.propagation.epsilon) : json(nullptr)},
                     {"steps", tr.steps},
                     {"max_deviation", tr.max_deviation},
                     {"max_norm_drift", tr.max_norm_drift},
                     {"max_energy_drift", tr.max_energy_drift},
                     {"trajectory", "trajectory.csv"},
                     {"snapshots", snaps}},
                "propagate");
  log << fmt::format("{} flow: {} steps  max deviation {:.3g}  norm drift {:.3g}\n", o.mode,
                     tr.steps, tr.max_deviation, tr.max_norm_drift);
  return kSuccess;
}

fs::path output_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return fs::path("dms_out") / o.command;
}

int execute(const Options& o, std::ostream& log, std::ostream& err) {
  std::optional<RunConfig> cfg;
  if (!o.config.empty()) cfg = load(o);
  const std::uint64_t seed = effective_seed(o, cfg ? &*cfg : nullptr);
  if (cfg) cfg->solve.seed = seed;
  Options opt = o;
  if (o.command == "verify" && !o.trials_given && cfg && cfg->values.count("trials")) {
    opt.trials = cfg->trials;
  }
  set_max_threads(o.threads);

  Output out(output_dir(o));
  int code = kSuccess;
  std::string failure;
  try {
    if (o.command == "solve") code = cmd_solve(*cfg, out, log);
    else if (o.command == "sweep") code = cmd_sweep(*cfg, out, log);
    else if (o.command == "threshold") code = cmd_threshold(*cfg, out, log);
    else if (o.command == "decay") code = cmd_decay(opt, out, log);
    else if (o.command == "verify") code = cmd_verify(opt, cfg ? &*cfg : nullptr, seed, out, log);
    else if (o.command == "propagate") code = cmd_propagate(opt, *cfg, out, log);
  } catch (const NumericError& e) {
    failure = e.what();
    code = kNumericFailure;
  }

  std::vector<std::string> files = out.files();
  files.push_back("manifest.json");
  const json manifest = {{"command", o.command},
                         {"args", canonical_args(opt, seed)},
                         {"config", o.config.empty() ? json(nullptr) : json(absolute(o.config))},
                         {"output_dir", absolute(out.dir().string())},
                         {"seed", seed},
                         {"timestamp", timestamp()},
                         {"version", tool_version()},
                         {"threads", o.threads},
                         {"exit_code", code},
                         {"error", failure},
                         {"files", files}};
  out.json_file("manifest.json", manifest, "manifest");

  if (!failure.empty()) err << "numeric failure: " << failure << '\n';
  const auto problems = out.validate();
  for (const auto& p : problems) err << "schema: " << p << '\n';
  if (!problems.empty()) return kNumericFailure;
  log << fmt::format("wrote {} files to {}\n", files.size(), out.dir().string());
  return code;
}

std::vector<std::string> replay_args(const Options& o) {
  std::ifstream in(o.manifest);
  if (!in) throw std::invalid_argument("cannot open manifest " + o.manifest);
  const json m = json::parse(in);
  const auto problems = validate_json(m, json_schema("manifest"));
  if (!problems.empty()) throw std::invalid_argument("bad manifest: " + problems.front());
  std::vector<std::string> args = m.at("args").get<std::vector<std::string>>();
  if (!o.out.empty()) args.insert(args.end(), {"--out", o.out});
  return args;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Energy-minimizing solitons of diffraction-managed lattice equations", "dms"};
  app.set_version_flag("--version", std::string("dms ") + tool_version());
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "master seed (default: config 'seed', else 1)");
  app.add_option("--threads", o.threads, "worker thread cap")
      ->check(CLI::Range(1u, 1024u))
      ->default_val(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--out", o.out,
                 fmt::format("output directory (default: ${}, else dms_out/<command>)",
                             kOutputDirEnv));

  auto config_positional = [&](CLI::App* sub) {
    sub->add_option("config", o.config, "run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto* solve = app.add_subcommand("solve", "minimize the energy at the configured power");
  config_positional(solve);
  auto* sweep = app.add_subcommand("sweep", "energy curve over 'lambdas' and subadditivity");
  config_positional(sweep);
  auto* threshold = app.add_subcommand("threshold", "R quotient, scaling laws and lambda_cr");
  config_positional(threshold);

  auto* decay = app.add_subcommand("decay", "tail distribution and decay-rate fits");
  decay->add_option("inputs", o.inputs, "field files, or result.json of a solve run")
      ->required()
      ->check(CLI::ExistingFile);
  decay->add_option("--omega", o.omega, "multiplier for the heuristic rate");
  decay->add_option("--d-av", o.d_av, "averaged diffraction for the heuristic rate");
  decay->add_option("--floor", o.floor, "smallest tail floor")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "randomized identity and estimate checks");
  verify->add_option("--suite", o.suite, "identities, estimates or all")
      ->check(CLI::IsMember({"identities", "estimates", "all"}));
  verify->add_option("--trials", o.trials, "trials per estimate")->check(CLI::Range(1, 1000000));
  verify->add_option("--config", o.config, "problem for the splitting check")
      ->check(CLI::ExistingFile);

  auto* propagate = app.add_subcommand("propagate", "averaged or full flow from a soliton");
  config_positional(propagate);
  propagate->add_option("--mode", o.mode, "averaged, full or breather")
      ->check(CLI::IsMember({"averaged", "full", "breather"}));
  propagate->add_option("--field", o.field, "initial field instead of solving first")
      ->check(CLI::ExistingFile);

  auto* replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  replay->add_option("manifest", o.manifest, "manifest.json of an earlier run")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << "dms " << tool_version() << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  o.command = app.get_subcommands().front()->get_name();
  o.seed_given = app.get_option("--seed")->count() > 0;
  o.trials_given = verify->get_option("--trials")->count() > 0;
  o.omega_given = decay->get_option("--omega")->count() > 0;
  o.d_av_given = decay->get_option("--d-av")->count() > 0;

  try {
    if (o.command == "replay") return run_command(replay_args(o), out, err);
    return execute(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kUsageError;
  } catch (const json::exception& e) {
    err << "invalid input: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace dms::cli
