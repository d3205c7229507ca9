#include "agimstl/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <random>

#include "agimstl/errors.hpp"
#include "agimstl/traditional.hpp"
#include "agimstl/util.hpp"

namespace agim {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Thrown inside a restart to unwind the simplex loop when that restart is done.
struct StopSearch {};

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  // 53-bit mantissa draw; avoids distribution-implementation differences.
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

struct RestartOutcome {
  std::vector<EvalRecord> log;
  std::vector<double> best_x;
  double best_raw = 0.0;  // raw score of best_x (extremal for the goal)
  bool has_best = false;
  int iterations = 0;
  bool hit_first_sign = false;
};

struct SearchContext {
  const Model& model;
  const Formula& formula;
  const OptConfig& cfg;
  Goal goal;
  std::vector<double> lo, hi;  // per decision variable
  std::size_t holds = 0;
};

ControlSequence decode(const SearchContext& ctx, const std::vector<double>& x) {
  std::vector<std::vector<double>> values(ctx.holds);
  for (std::size_t k = 0; k < ctx.holds; ++k) {
    values[k].resize(ctx.model.input_dim);
    for (std::size_t d = 0; d < ctx.model.input_dim; ++d)
      values[k][d] = x[k * ctx.model.input_dim + d];
  }
  return ControlSequence::make(ctx.cfg.control_period, std::move(values),
                               ctx.model.input_bounds);
}

double worst_score(Goal goal) { return goal == Goal::Falsify ? 1.0 : -1.0; }

// Evaluates one candidate, records it, and signals restart termination via
// StopSearch once the budget is consumed or the goal sign is reached in
// first-sign mode. Returns the value the simplex minimizes.
struct RestartEvaluator {
  const SearchContext& ctx;
  RestartOutcome& out;
  int restart_index;
  int budget;
  int count = 0;

  double operator()(const std::vector<double>& x) {
    if (count >= budget) throw StopSearch{};
    auto t0 = Clock::now();
    double raw = 0.0;
    bool failed = false;
    try {
      raw = objective(ctx.model, ctx.formula, decode(ctx, x), ctx.cfg);
    } catch (const NonFinite&) {
      raw = worst_score(ctx.goal);
      failed = true;
    } catch (const OutOfBounds&) {
      // Candidate left the modeled envelope; score it worst rather than abort.
      raw = worst_score(ctx.goal);
      failed = true;
    }
    ++count;
    out.log.push_back(EvalRecord{restart_index, count, raw, ms_since(t0), failed});

    bool better = !out.has_best || (ctx.goal == Goal::Falsify ? raw < out.best_raw
                                                              : raw > out.best_raw);
    if (better) {
      out.best_raw = raw;
      out.best_x = x;
      out.has_best = true;
    }
    bool goal_sign = ctx.goal == Goal::Falsify ? raw < 0.0 : raw > 0.0;
    if (goal_sign && ctx.cfg.stop == StopMode::FirstSign) {
      out.hit_first_sign = true;
      throw StopSearch{};
    }
    return ctx.goal == Goal::Falsify ? raw : -raw;
  }
};

void clamp_to_box(const SearchContext& ctx, std::vector<double>& x) {
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = std::clamp(x[d], ctx.lo[d], ctx.hi[d]);
}

// Classic Nelder-Mead with box constraints handled by clamping each proposed
// vertex. Runs until the evaluator throws StopSearch; there is no convergence
// exit, small budgets bound the work instead.
void nelder_mead(const SearchContext& ctx, RestartEvaluator& eval, RestartOutcome& out,
                 std::vector<double> x0, std::mt19937_64& rng) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> xs;
  std::vector<double> fs;

  auto push_vertex = [&](std::vector<double> x) {
    clamp_to_box(ctx, x);
    double f = eval(x);
    xs.push_back(std::move(x));
    fs.push_back(f);
  };

  push_vertex(x0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> xi = x0;
    double delta = 0.1 * (ctx.hi[i] - ctx.lo[i]);
    if (delta == 0.0) delta = 0.5;
    xi[i] = x0[i] + delta <= ctx.hi[i] ? x0[i] + delta : x0[i] - delta;
    push_vertex(std::move(xi));
  }

  std::vector<std::size_t> order(n + 1);
  while (true) {
    ++out.iterations;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::size_t best = order[0];
    std::size_t worst = order[n];
    std::size_t second_worst = order[n - 1];

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t d = 0; d < n; ++d) centroid[d] += xs[order[k]][d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d)
        x[d] = centroid[d] + coef * (centroid[d] - xs[worst][d]);
      clamp_to_box(ctx, x);
      return x;
    };

    std::vector<double> xr = blend(1.0);
    double fr = eval(xr);
    if (fr < fs[best]) {
      std::vector<double> xe = blend(2.0);
      double fe = eval(xe);
      if (fe < fr) {
        xs[worst] = std::move(xe);
        fs[worst] = fe;
      } else {
        xs[worst] = std::move(xr);
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second_worst]) {
      xs[worst] = std::move(xr);
      fs[worst] = fr;
      continue;
    }
    // Contraction, outside or inside of the reflected point.
    std::vector<double> xc;
    if (fr < fs[worst]) {
      xc.resize(n);
      for (std::size_t d = 0; d < n; ++d) xc[d] = centroid[d] + 0.5 * (xr[d] - centroid[d]);
    } else {
      xc.resize(n);
      for (std::size_t d = 0; d < n; ++d) xc[d] = centroid[d] + 0.5 * (xs[worst][d] - centroid[d]);
    }
    clamp_to_box(ctx, xc);
    double fc = eval(xc);
    if (fc < std::min(fr, fs[worst])) {
      xs[worst] = std::move(xc);
      fs[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex. If the simplex has degenerated onto one
    // point (clamping can do that), rebuild it with a random jitter instead.
    bool degenerate = true;
    for (std::size_t k = 0; k <= n && degenerate; ++k) {
      for (std::size_t d = 0; d < n; ++d) {
        if (xs[k][d] != xs[best][d]) {
          degenerate = false;
          break;
        }
      }
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t d = 0; d < n; ++d) {
        if (degenerate) {
          double span = 0.25 * (ctx.hi[d] - ctx.lo[d]);
          xs[k][d] = xs[best][d] + uniform_in(rng, -span, span);
        } else {
          xs[k][d] = xs[best][d] + 0.5 * (xs[k][d] - xs[best][d]);
        }
      }
      clamp_to_box(ctx, xs[k]);
      fs[k] = eval(xs[k]);
    }
  }
}

RestartOutcome run_restart(const SearchContext& ctx, int restart_index, int budget) {
  RestartOutcome out;
  if (budget <= 0) return out;
  std::mt19937_64 rng(ctx.cfg.seed * 0x9E3779B97F4A7C15ULL + 0x51ED27F0ULL +
                      static_cast<std::uint64_t>(restart_index));
  std::size_t n = ctx.lo.size();
  std::vector<double> x0(n);
  if (restart_index == 0) {
    for (std::size_t d = 0; d < n; ++d) x0[d] = 0.5 * (ctx.lo[d] + ctx.hi[d]);
  } else {
    for (std::size_t d = 0; d < n; ++d) x0[d] = uniform_in(rng, ctx.lo[d], ctx.hi[d]);
  }
  RestartEvaluator eval{ctx, out, restart_index, budget};
  try {
    nelder_mead(ctx, eval, out, std::move(x0), rng);
  } catch (const StopSearch&) {
    // budget consumed or first sign reached
  }
  return out;
}

OptResult run_search(Goal goal, const Model& m, const Formula& f, const OptConfig& cfg) {
  if (cfg.budget < 1) throw Error("optimizer budget must be at least 1");
  if (cfg.restarts < 1) throw Error("optimizer needs at least one restart");
  if (!(cfg.control_period > 0.0)) throw Error("control period must be positive");
  if (!(cfg.horizon > 0.0)) throw Error("optimization horizon must be positive");
  long holds = std::lround(cfg.horizon / cfg.control_period);
  if (holds < 1 || std::fabs(static_cast<double>(holds) * cfg.control_period - cfg.horizon) >
                       1e-9 * std::max(1.0, cfg.horizon))
    throw Misaligned("control period does not divide the horizon");

  auto t0 = Clock::now();
  SearchContext ctx{m, f, cfg, goal, {}, {}, static_cast<std::size_t>(holds)};
  ctx.lo.resize(static_cast<std::size_t>(holds) * m.input_dim);
  ctx.hi.resize(ctx.lo.size());
  for (std::size_t k = 0; k < ctx.holds; ++k) {
    for (std::size_t d = 0; d < m.input_dim; ++d) {
      ctx.lo[k * m.input_dim + d] = m.input_bounds[d].lo;
      ctx.hi[k * m.input_dim + d] = m.input_bounds[d].hi;
    }
  }

  int base = cfg.budget / cfg.restarts;
  int extra = cfg.budget % cfg.restarts;
  std::vector<int> budgets(static_cast<std::size_t>(cfg.restarts));
  for (int r = 0; r < cfg.restarts; ++r) budgets[static_cast<std::size_t>(r)] = base + (r < extra ? 1 : 0);

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(cfg.restarts));
  if (cfg.jobs <= 1) {
    for (int r = 0; r < cfg.restarts; ++r)
      outcomes[static_cast<std::size_t>(r)] = run_restart(ctx, r, budgets[static_cast<std::size_t>(r)]);
  } else {
    for (int start = 0; start < cfg.restarts; start += cfg.jobs) {
      int stop = std::min(start + cfg.jobs, cfg.restarts);
      std::vector<std::future<RestartOutcome>> futs;
      for (int r = start; r < stop; ++r) {
        futs.push_back(std::async(std::launch::async, [&ctx, r, &budgets] {
          return run_restart(ctx, r, budgets[static_cast<std::size_t>(r)]);
        }));
      }
      for (int r = start; r < stop; ++r)
        outcomes[static_cast<std::size_t>(r)] = futs[static_cast<std::size_t>(r - start)].get();
    }
  }

  OptResult res;
  res.seed = cfg.seed;
  int best_restart = -1;
  for (int r = 0; r < cfg.restarts; ++r) {
    const RestartOutcome& o = outcomes[static_cast<std::size_t>(r)];
    res.iterations += o.iterations;
    for (const EvalRecord& rec : o.log) res.log.push_back(rec);
    if (!o.has_best) continue;
    bool better = best_restart < 0 ||
                  (goal == Goal::Falsify ? o.best_raw < res.best_score
                                         : o.best_raw > res.best_score);
    if (better) {
      res.best_score = o.best_raw;
      best_restart = r;
    }
    if (o.hit_first_sign) res.stop_reason = StopReason::FirstSign;
  }
  if (best_restart < 0) throw Error("optimizer performed no evaluations");
  res.best = decode(ctx, outcomes[static_cast<std::size_t>(best_restart)].best_x);
  res.evaluations = static_cast<int>(res.log.size());
  res.verdict = verdict_of(res.best_score);
  if (!(cfg.stop == StopMode::FirstSign && res.stop_reason == StopReason::FirstSign))
    res.stop_reason = StopReason::BudgetExhausted;

  for (std::size_t i = 0; i < res.log.size(); ++i) {
    double s = res.log[i].score;
    bool goal_sign = goal == Goal::Falsify ? s < 0.0 : s > 0.0;
    if (goal_sign) {
      res.first_sign_eval = static_cast<long>(i) + 1;
      break;
    }
  }

  // Independent re-check of the winner under the traditional semantics.
  try {
    Trace tr = simulate(m, res.best, cfg.horizon, cfg.sim_step);
    res.cross_check_rho = rho(f, tr.normalize(cfg.normalization), 0.0, cfg.quad);
  } catch (const Error&) {
    res.cross_check_rho = std::numeric_limits<double>::quiet_NaN();
  }

  res.wall_ms = ms_since(t0);
  return res;
}

}  // namespace

const char* to_string(Semantics s) { return s == Semantics::Agim ? "agim" : "traditional"; }
const char* to_string(Goal g) { return g == Goal::Falsify ? "falsify" : "synthesize"; }
const char* to_string(StopReason r) {
  return r == StopReason::FirstSign ? "first-sign" : "budget-exhausted";
}

double objective(const Model& m, const Formula& f, const ControlSequence& cs,
                 const OptConfig& cfg) {
  Trace raw = simulate(m, cs, cs.horizon(), cfg.sim_step);
  Trace norm = raw.normalize(cfg.normalization);
  if (cfg.semantics == Semantics::Agim) return eta(f, norm, 0.0, cfg.quad).value;
  return rho(f, norm, 0.0, cfg.quad);
}

OptResult falsify(const Model& m, const Formula& f, const OptConfig& cfg) {
  return run_search(Goal::Falsify, m, f, cfg);
}

OptResult synthesize(const Model& m, const Formula& f, const OptConfig& cfg) {
  return run_search(Goal::Synthesize, m, f, cfg);
}

void write_eval_log_csv(const std::vector<EvalRecord>& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write eval log: " + path.string());
  out << "eval_index,restart,score,wall_ms\n";
  for (std::size_t i = 0; i < log.size(); ++i) {
    out << (i + 1) << ',' << log[i].restart << ',' << detail::format_double(log[i].score) << ','
        << detail::format_double(log[i].wall_ms) << '\n';
  }
}

}  // namespace agim
