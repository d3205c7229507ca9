#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "agimstl/agim.hpp"
#include "agimstl/dynamics.hpp"
#include "agimstl/errors.hpp"
#include "agimstl/formula.hpp"
#include "agimstl/optimize.hpp"
#include "agimstl/traditional.hpp"
#include "agimstl/trace.hpp"
#include "agimstl/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitError = 3;

std::map<std::string, agim::Bounds> parse_bounds_flags(const std::vector<std::string>& specs) {
  std::map<std::string, agim::Bounds> out;
  for (const std::string& s : specs) {
    auto eq = s.find('=');
    auto colon = s.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos || colon < eq)
      throw agim::Error("bad --bounds entry '" + s + "', expected name=lo:hi");
    std::string name = s.substr(0, eq);
    double lo = std::stod(s.substr(eq + 1, colon - eq - 1));
    double hi = std::stod(s.substr(colon + 1));
    out[name] = agim::Bounds{lo, hi};
  }
  return out;
}

json score_to_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

int verdict_exit_code(agim::Verdict v) {
  switch (v) {
    case agim::Verdict::Satisfied: return 0;
    case agim::Verdict::Violated: return 1;
    case agim::Verdict::Inconclusive: return 2;
  }
  return kExitError;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

struct CommonEvalFlags {
  std::string semantics = "agim";
  std::vector<std::string> bounds;
  double grid_step = 0.0;
  double refine_factor = 4.0;

  void attach(CLI::App* cmd, bool with_bounds = true) {
    cmd->add_option("--semantics", semantics, "Robustness semantics")
        ->check(CLI::IsMember({"agim", "traditional"}));
    if (with_bounds)
      cmd->add_option("--bounds", bounds,
                      "Normalization bounds per component, name=lo:hi (repeatable)");
    cmd->add_option("--grid-step", grid_step, "Evaluation grid refinement step (0 = automatic)");
    cmd->add_option("--refine-factor", refine_factor,
                    "Automatic step = median trace spacing / this factor");
  }

  agim::QuadratureConfig quad() const {
    agim::QuadratureConfig q;
    q.grid_step = grid_step;
    q.refine_factor = refine_factor;
    return q;
  }
};

int run_monitor(const std::string& formula_path, const std::string& trace_path,
                const CommonEvalFlags& flags, double time, bool time_set,
                const std::string& out_path) {
  auto t0 = std::chrono::steady_clock::now();
  agim::FormulaPtr f = agim::parse_file(formula_path);
  agim::Trace raw = agim::Trace::read_csv(trace_path);

  std::map<std::string, agim::Bounds> bounds = parse_bounds_flags(flags.bounds);
  bool use_agim = flags.semantics == "agim";
  agim::Trace tr = !bounds.empty() ? raw.normalize(bounds)
                  : use_agim       ? raw.assume_normalized()
                                   : raw;
  double t = time_set ? time : tr.start_time();
  agim::QuadratureConfig q = flags.quad();

  auto score_of = [&](const agim::Formula& g) {
    return use_agim ? agim::eta(g, tr, t, q).value : agim::rho(g, tr, t, q);
  };

  double score = score_of(*f);
  agim::Verdict verdict = agim::verdict_of(score);

  json subs = json::array();
  for (const agim::FormulaPtr& sf : agim::subformulae(f)) {
    double s = score_of(*sf);
    subs.push_back({{"formula", agim::to_string(sf)},
                    {"score", score_to_json(s)},
                    {"verdict", agim::to_string(agim::verdict_of(s))}});
  }

  json report = {
      {"semantics", flags.semantics},
      {"time", t},
      {"score", score_to_json(score)},
      {"verdict", agim::to_string(verdict)},
      {"subformulae", subs},
      {"timing_ms",
       std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()},
  };
  if (out_path.empty()) {
    std::cout << report.dump(2) << std::endl;
  } else {
    std::ofstream out(out_path);
    if (!out) throw agim::Error("cannot write report: " + out_path);
    out << report.dump(2) << '\n';
  }
  return verdict_exit_code(verdict);
}

struct OptFlags {
  std::string formula_path;
  std::string config_path;
  std::string out_dir = ".";
  CommonEvalFlags eval;
  int budget = 200;
  int restarts = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string stop = "exhaust-budget";

  void attach(CLI::App* cmd) {
    cmd->add_option("--formula", formula_path, "STL formula file")->required();
    cmd->add_option("--model-config", config_path, "Model configuration JSON")->required();
    cmd->add_option("--out-dir", out_dir, "Directory for result artifacts");
    eval.attach(cmd, /*with_bounds=*/false);
    cmd->add_option("--budget", budget, "Total objective evaluations");
    cmd->add_option("--restarts", restarts, "Independent optimizer restarts");
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--jobs", jobs, "Concurrent restarts");
    cmd->add_option("--stop", stop, "Stop mode")
        ->check(CLI::IsMember({"first-sign", "exhaust-budget"}));
  }
};

int run_optimize(agim::Goal goal, const OptFlags& flags) {
  agim::FormulaPtr f = agim::parse_file(flags.formula_path);
  agim::ModelSetup setup = agim::load_model_config(flags.config_path);

  agim::OptConfig cfg;
  cfg.semantics = flags.eval.semantics == "agim" ? agim::Semantics::Agim
                                                 : agim::Semantics::Traditional;
  cfg.budget = flags.budget;
  cfg.restarts = flags.restarts;
  cfg.seed = flags.seed;
  cfg.stop = flags.stop == "first-sign" ? agim::StopMode::FirstSign
                                        : agim::StopMode::ExhaustBudget;
  cfg.quad = flags.eval.quad();
  cfg.normalization = setup.normalization;
  cfg.jobs = flags.jobs;
  cfg.horizon = setup.T;
  cfg.control_period = setup.Ts;
  cfg.sim_step = setup.h;

  agim::OptResult res = goal == agim::Goal::Falsify ? agim::falsify(setup.model, *f, cfg)
                                                    : agim::synthesize(setup.model, *f, cfg);

  fs::create_directories(flags.out_dir);
  fs::path dir(flags.out_dir);
  agim::Trace best_trace = agim::simulate(setup.model, res.best, setup.T, setup.h);
  best_trace.write_csv(dir / "best_trace.csv");
  res.best.write_csv(dir / "best_control.csv");
  agim::write_eval_log_csv(res.log, dir / "eval_log.csv");

  json summary = {
      {"model", setup.model.name},
      {"formula", agim::to_string(f)},
      {"goal", agim::to_string(goal)},
      {"semantics", flags.eval.semantics},
      {"verdict", agim::to_string(res.verdict)},
      {"best_score", score_to_json(res.best_score)},
      {"cross_check_rho", score_to_json(res.cross_check_rho)},
      {"evaluations", res.evaluations},
      {"iterations", res.iterations},
      {"first_sign_eval", res.first_sign_eval},
      {"stop_reason", agim::to_string(res.stop_reason)},
      {"seed", res.seed},
      {"budget", flags.budget},
      {"restarts", flags.restarts},
      {"T", setup.T},
      {"Ts", setup.Ts},
      {"h", setup.h},
      {"wall_ms", res.wall_ms},
  };
  std::ofstream out(dir / "summary.json");
  if (!out) throw agim::Error("cannot write summary.json in " + flags.out_dir);
  out << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << std::endl;

  bool achieved = goal == agim::Goal::Falsify ? res.verdict == agim::Verdict::Violated
                                              : res.verdict == agim::Verdict::Satisfied;
  return achieved ? 0 : 1;
}

int run_export(const std::string& formula_path, const std::string& trace_path,
               const CommonEvalFlags& flags, const std::string& window_spec, double step,
               const std::string& subformulae_spec, const std::string& out_path) {
  agim::FormulaPtr f = agim::parse_file(formula_path);
  agim::Trace raw = agim::Trace::read_csv(trace_path);
  std::map<std::string, agim::Bounds> bounds = parse_bounds_flags(flags.bounds);
  agim::Trace tr = !bounds.empty() ? raw.normalize(bounds) : raw.assume_normalized();
  agim::QuadratureConfig q = flags.quad();

  std::vector<agim::FormulaPtr> all = agim::subformulae(f);
  std::vector<std::size_t> wanted;
  if (subformulae_spec.empty()) {
    for (std::size_t i = 0; i < all.size(); ++i) wanted.push_back(i);
  } else {
    std::stringstream ss(subformulae_spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t idx = std::stoul(tok);
      if (idx >= all.size())
        throw agim::Error("subformula index " + tok + " out of range (have " +
                          std::to_string(all.size()) + ")");
      wanted.push_back(idx);
    }
  }

  double w1 = tr.start_time();
  double w2 = tr.end_time() - agim::horizon(*f);
  if (!window_spec.empty()) {
    auto colon = window_spec.find(':');
    if (colon == std::string::npos)
      throw agim::Error("bad --window, expected t1:t2");
    w1 = std::stod(window_spec.substr(0, colon));
    w2 = std::stod(window_spec.substr(colon + 1));
  }
  if (!(w2 > w1))
    throw agim::Error("export window is empty; trace too short for the formula horizon");
  if (step <= 0.0) step = (w2 - w1) / 200.0;

  std::vector<agim::ScoreSignal> curves;
  curves.reserve(wanted.size());
  for (std::size_t idx : wanted) curves.push_back(agim::eta_signal(*all[idx], tr, w1, w2, q));

  std::ofstream out(out_path);
  if (!out) throw agim::Error("cannot write curves: " + out_path);
  out << "time";
  for (std::size_t idx : wanted) out << ',' << csv_quote(agim::to_string(all[idx]));
  out << '\n';
  long n = std::lround((w2 - w1) / step);
  for (long j = 0; j <= n; ++j) {
    double t = j == n ? w2 : w1 + static_cast<double>(j) * step;
    out << agim::detail::format_double(t);
    for (const auto& c : curves) out << ',' << agim::detail::format_double(c.value_at(t));
    out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time STL robustness monitoring, falsification and synthesis"};
  app.require_subcommand(1);

  // monitor
  auto* monitor = app.add_subcommand("monitor", "Score a formula against a recorded trace");
  std::string mon_formula, mon_trace, mon_out;
  double mon_time = 0.0;
  CommonEvalFlags mon_flags;
  monitor->add_option("--formula", mon_formula, "STL formula file")->required();
  monitor->add_option("--trace", mon_trace, "Trace CSV file")->required();
  mon_flags.attach(monitor);
  auto* time_opt = monitor->add_option("--time", mon_time, "Evaluation instant (default: trace start)");
  monitor->add_option("--out", mon_out, "Write the JSON report here instead of stdout");

  // falsify / synth
  auto* fals = app.add_subcommand("falsify", "Search for a control input violating the formula");
  OptFlags fals_flags;
  fals_flags.attach(fals);
  auto* synth = app.add_subcommand("synth", "Search for a control input satisfying the formula");
  OptFlags synth_flags;
  synth_flags.attach(synth);

  // export
  auto* exp = app.add_subcommand("export", "Export per-subformula score curves as CSV");
  std::string exp_formula, exp_trace, exp_window, exp_subs, exp_out;
  double exp_step = 0.0;
  CommonEvalFlags exp_flags;
  exp->add_option("--formula", exp_formula, "STL formula file")->required();
  exp->add_option("--trace", exp_trace, "Trace CSV file")->required();
  exp_flags.attach(exp);
  exp->add_option("--window", exp_window, "Evaluation window t1:t2");
  exp->add_option("--step", exp_step, "Output sampling step");
  exp->add_option("--subformulae", exp_subs, "Comma-separated pre-order subformula indices");
  exp->add_option("--out", exp_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (monitor->parsed())
      return run_monitor(mon_formula, mon_trace, mon_flags, mon_time, time_opt->count() > 0,
                         mon_out);
    if (fals->parsed()) return run_optimize(agim::Goal::Falsify, fals_flags);
    if (synth->parsed()) return run_optimize(agim::Goal::Synthesize, synth_flags);
    if (exp->parsed())
      return run_export(exp_formula, exp_trace, exp_flags, exp_window, exp_step, exp_subs, exp_out);
  } catch (const agim::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitError;
  }
  return kExitError;
}
