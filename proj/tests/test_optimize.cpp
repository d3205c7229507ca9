#include <doctest.h>

#include <cmath>
#include <random>

#include "agimstl/errors.hpp"
#include "agimstl/optimize.hpp"
#include "agimstl/traditional.hpp"
#include "helpers.hpp"

using namespace agim;

namespace {

const std::map<std::string, Bounds> kTransmissionBounds = {{"speed", {0.0, 160.0}},
                                                           {"rpm", {0.0, 6000.0}}};

FormulaPtr transmission_spec() {
  double rpm_pi = detail::normalize_value(4000.0, {0.0, 6000.0});
  double speed_pi = detail::normalize_value(100.0, {0.0, 160.0});
  return Formula::conj({
      Formula::globally(0.0, 30.0, Formula::pred("rpm", Cmp::Le, rpm_pi)),
      Formula::globally(0.0, 30.0, Formula::pred("speed", Cmp::Le, speed_pi)),
  });
}

OptConfig transmission_cfg() {
  OptConfig cfg;
  cfg.semantics = Semantics::Agim;
  cfg.normalization = kTransmissionBounds;
  cfg.horizon = 30.0;
  cfg.control_period = 5.0;
  cfg.sim_step = 0.01;
  return cfg;
}

ControlSequence throttle(double value) {
  std::vector<std::vector<double>> us(6, {value});
  return ControlSequence::make(5.0, us, {Bounds{0.0, 80.0}});
}

}  // namespace

TEST_CASE("objective scores idle positive and full throttle negative") {
  Model m = transmission_surrogate();
  FormulaPtr spec = transmission_spec();
  OptConfig cfg = transmission_cfg();
  CHECK(objective(m, *spec, throttle(0.0), cfg) > 0.0);
  CHECK(objective(m, *spec, throttle(80.0), cfg) < 0.0);
}

TEST_CASE("agim objective always lies in [-1, 1]") {
  Model m = transmission_surrogate();
  FormulaPtr spec = transmission_spec();
  OptConfig cfg = transmission_cfg();
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<std::vector<double>> us;
    for (int k = 0; k < 6; ++k) us.push_back({testgen::uniform(rng, 0.0, 80.0)});
    double s = objective(m, *spec, ControlSequence::make(5.0, us, m.input_bounds), cfg);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("falsification finds a violating throttle schedule") {
  Model m = transmission_surrogate();
  FormulaPtr spec = transmission_spec();
  OptConfig cfg = transmission_cfg();
  cfg.budget = 60;
  cfg.restarts = 2;
  cfg.seed = 3;
  OptResult res = falsify(m, *spec, cfg);
  CHECK(res.verdict == Verdict::Violated);
  CHECK(res.best_score < 0.0);
  CHECK(res.evaluations == 60);
  CHECK(res.first_sign_eval > 0);
  // Soundness hand-off: traditional robustness agrees on the winner.
  CHECK(res.cross_check_rho < 0.0);
}

TEST_CASE("results are reproducible from the seed") {
  Model m = transmission_surrogate();
  FormulaPtr spec = transmission_spec();
  OptConfig cfg = transmission_cfg();
  cfg.budget = 40;
  cfg.restarts = 2;
  cfg.seed = 11;
  OptResult a = falsify(m, *spec, cfg);
  OptResult b = falsify(m, *spec, cfg);
  CHECK(a.best_score == b.best_score);
  CHECK(a.evaluations == b.evaluations);
  CHECK(a.iterations == b.iterations);
  CHECK(a.first_sign_eval == b.first_sign_eval);
  CHECK(a.best.values == b.best.values);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].score == b.log[i].score);
    CHECK(a.log[i].restart == b.log[i].restart);
  }
}

TEST_CASE("parallel restarts merge to the sequential result") {
  Model m = transmission_surrogate();
  FormulaPtr spec = transmission_spec();
  OptConfig cfg = transmission_cfg();
  cfg.budget = 40;
  cfg.restarts = 4;
  cfg.seed = 5;
  OptResult seq = falsify(m, *spec, cfg);
  cfg.jobs = 4;
  OptResult par = falsify(m, *spec, cfg);
  CHECK(seq.best_score == par.best_score);
  REQUIRE(seq.log.size() == par.log.size());
  for (std::size_t i = 0; i < seq.log.size(); ++i) {
    CHECK(seq.log[i].score == par.log[i].score);
    CHECK(seq.log[i].restart == par.log[i].restart);
    CHECK(seq.log[i].index_in_restart == par.log[i].index_in_restart);
  }
}

TEST_CASE("an unfalsifiable formula exhausts the budget at score one") {
  Model m = transmission_surrogate();
  OptConfig cfg = transmission_cfg();
  cfg.budget = 15;
  cfg.seed = 1;
  OptResult res = falsify(m, *Formula::truth(), cfg);
  CHECK(res.stop_reason == StopReason::BudgetExhausted);
  CHECK(res.best_score == 1.0);
  CHECK(res.verdict == Verdict::Satisfied);
  CHECK(res.first_sign_eval == -1);
}

TEST_CASE("a predicate satisfied at rest stops first-sign synthesis immediately") {
  // Restart 0 starts from the box midpoint, which is the zero input.
  ConsensusParams params;
  params.adjacency = {{0, 1}, {1, 0}};
  Model m = consensus_model(params, 2, {0.0, 4.0, 0.0, 0.0, 5.0, 2.0, 0.0, 0.0},
                            std::vector<Bounds>(4, Bounds{-2.0, 2.0}));
  OptConfig cfg;
  cfg.semantics = Semantics::Agim;
  cfg.horizon = 4.0;
  cfg.control_period = 1.0;
  cfg.sim_step = 0.02;
  cfg.budget = 50;
  cfg.stop = StopMode::FirstSign;
  for (const char* name : {"x1", "y1", "x2", "y2", "vx1", "vy1", "vx2", "vy2"})
    cfg.normalization[name] = Bounds{-40.0, 40.0};
  FormulaPtr f = Formula::pred("y1", Cmp::Ge, -0.5);  // y1 = 4 -> 0.1 normalized, score > 0
  OptResult res = synthesize(m, *f, cfg);
  CHECK(res.stop_reason == StopReason::FirstSign);
  CHECK(res.evaluations == 1);
  CHECK(res.first_sign_eval == 1);
  CHECK(res.verdict == Verdict::Satisfied);
}

TEST_CASE("an infeasible conjunction stays violated") {
  Model m = transmission_surrogate();
  OptConfig cfg = transmission_cfg();
  cfg.budget = 30;
  cfg.seed = 2;
  FormulaPtr contradiction = Formula::conj({
      Formula::pred("speed", Cmp::Ge, 0.5),
      Formula::pred("speed", Cmp::Le, -0.5),
  });
  OptResult res = synthesize(m, *contradiction, cfg);
  CHECK(res.stop_reason == StopReason::BudgetExhausted);
  CHECK(res.verdict == Verdict::Violated);
  CHECK(res.best_score < 0.0);
}

TEST_CASE("the best score is the running extremum of the log") {
  Model m = transmission_surrogate();
  FormulaPtr spec = transmission_spec();
  OptConfig cfg = transmission_cfg();
  cfg.budget = 50;
  cfg.restarts = 2;
  cfg.seed = 9;
  OptResult res = falsify(m, *spec, cfg);
  double running = std::numeric_limits<double>::infinity();
  for (const EvalRecord& r : res.log) running = std::min(running, r.score);
  CHECK(res.best_score == running);
}
