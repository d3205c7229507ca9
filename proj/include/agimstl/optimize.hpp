#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "agimstl/agim.hpp"
#include "agimstl/dynamics.hpp"
#include "agimstl/formula.hpp"

namespace agim {

enum class Semantics { Agim, Traditional };
enum class StopMode { FirstSign, ExhaustBudget };
enum class Goal { Falsify, Synthesize };
enum class StopReason { FirstSign, BudgetExhausted };

const char* to_string(Semantics s);
const char* to_string(Goal g);
const char* to_string(StopReason r);

struct OptConfig {
  Semantics semantics = Semantics::Agim;
  int budget = 200;   ///< total objective evaluations, split across restarts
  int restarts = 1;
  std::uint64_t seed = 0;
  StopMode stop = StopMode::ExhaustBudget;
  QuadratureConfig quad;
  std::map<std::string, Bounds> normalization;
  int jobs = 1;       ///< concurrent restarts
  double horizon = 0.0;        ///< simulation horizon T
  double control_period = 0.0; ///< hold period Ts
  double sim_step = 0.01;      ///< integration step h
};

/// One objective evaluation in the merged log.
struct EvalRecord {
  int restart = 0;
  int index_in_restart = 0;  // 1-based within the restart
  double score = 0.0;
  double wall_ms = 0.0;
  bool failed = false;  // simulation failed; scored worst-possible
};

struct OptResult {
  ControlSequence best;
  double best_score = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  int evaluations = 0;
  int iterations = 0;
  /// 1-based position in the merged log of the first score with the goal's
  /// sign (falsify: < 0, synthesize: > 0); -1 if never reached.
  long first_sign_eval = -1;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  StopReason stop_reason = StopReason::BudgetExhausted;
  /// Traditional robustness of the formula on the best trajectory.
  double cross_check_rho = 0.0;
  std::vector<EvalRecord> log;  // merged by (restart, index)
};

/// Simulate cs, normalize per cfg bounds, and score the formula at t = 0
/// under the configured semantics.
double objective(const Model& m, const Formula& f, const ControlSequence& cs,
                 const OptConfig& cfg);

/// Minimizes the robustness over piecewise-constant inputs via multi-start
/// Nelder-Mead with box clamping. Restart r starts from the box midpoint when
/// r == 0 and from a seeded uniform draw otherwise; restarts are independent
/// and may run concurrently, and the log is merged by (restart, index) so the
/// result does not depend on scheduling. A failed simulation scores
/// worst-possible for the goal and is marked in the log.
OptResult falsify(const Model& m, const Formula& f, const OptConfig& cfg);

/// Mirror of falsify that maximizes the robustness.
OptResult synthesize(const Model& m, const Formula& f, const OptConfig& cfg);

void write_eval_log_csv(const std::vector<EvalRecord>& log, const std::filesystem::path& path);

}  // namespace agim
