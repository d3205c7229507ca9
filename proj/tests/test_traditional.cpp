#include <doctest.h>

#include <cmath>
#include <random>

#include "agimstl/errors.hpp"
#include "agimstl/traditional.hpp"
#include "helpers.hpp"

using namespace agim;

namespace {

// x(tau) = tau - 0.5 on [0,1]; predicate x >= 0 then scores tau - 0.5.
Trace ramp_trace() { return testgen::line_trace("x", 0.0, 1.0, -0.5, 0.5); }

}  // namespace

TEST_CASE("truth scores plus infinity") {
  Trace tr = ramp_trace();
  CHECK(rho(*Formula::truth(), tr, 0.3) == rho_top);
  CHECK(rho(*Formula::negation(Formula::truth()), tr, 0.3) == -rho_top);
}

TEST_CASE("G and F of a linear ramp have closed-form extrema") {
  Trace tr = ramp_trace();
  FormulaPtr p = Formula::pred("x", Cmp::Ge, 0.0);
  CHECK(rho(*Formula::globally(0.0, 1.0, p), tr, 0.0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(rho(*Formula::eventually(0.0, 1.0, p), tr, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("step-response peak sets the score in raw units") {
  // Peak of 1.5 against the 1.2 threshold scores 0.3 regardless of shape.
  Trace tr({"s"}, {0.0, 0.25, 0.3, 0.35, 1.0}, {{0.0}, {1.2}, {1.5}, {1.1}, {1.0}});
  FormulaPtr f = Formula::eventually(0.0, 1.0, Formula::pred("s", Cmp::Ge, 1.2));
  CHECK(rho(*f, tr, 0.0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("degenerate interval is a point evaluation") {
  Trace tr = ramp_trace();
  FormulaPtr p = Formula::pred("x", Cmp::Ge, 0.0);
  CHECK(rho(*Formula::globally(0.75, 0.75, p), tr, 0.0) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(rho(*Formula::eventually(0.75, 0.75, p), tr, 0.0) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("until and short traces are rejected") {
  Trace tr = ramp_trace();
  FormulaPtr u = parse("(x >= 0) U[0,0.5] (x <= 0)");
  CHECK_THROWS_AS(rho(*u, tr, 0.0), UnsupportedOperator);
  FormulaPtr g = parse("G[0,5] x >= 0");
  CHECK_THROWS_AS(rho(*g, tr, 0.0), OutOfDomain);
  CHECK_THROWS_AS(rho(*parse("x >= 0"), tr, 2.0), OutOfDomain);
}

TEST_CASE("De Morgan duality is exact") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    Trace tr = testgen::random_trace(rng, 2, 12.0, 14);
    FormulaPtr child = testgen::random_formula(rng, 2, 2);
    double a = testgen::uniform(rng, 0.0, 1.0);
    double b = a + testgen::uniform(rng, 0.5, 1.5);
    FormulaPtr g = Formula::globally(a, b, child);
    FormulaPtr dual =
        Formula::negation(Formula::eventually(a, b, Formula::negation(child)));
    double t = testgen::uniform(rng, 0.0, 1.0);
    double lhs = rho(*g, tr, t);
    double rhs = rho(*dual, tr, t);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("soundness on constructed traces") {
  // Positive trace satisfies G(x >= 0); dipping trace violates it.
  Trace good({"x"}, {0.0, 1.0, 2.0}, {{0.5}, {0.25}, {0.75}});
  Trace bad({"x"}, {0.0, 1.0, 2.0}, {{0.5}, {-0.25}, {0.75}});
  FormulaPtr g = parse("G[0,2] x >= 0");
  CHECK(rho(*g, good, 0.0) > 0.0);
  CHECK(rho(*g, bad, 0.0) < 0.0);

  // Eventually: satisfied iff the threshold is reached inside the window.
  FormulaPtr f = parse("F[0,1] x >= 0.7");
  CHECK(rho(*f, good, 0.0) < 0.0);
  CHECK(rho(*f, good, 1.0) > 0.0);
}

TEST_CASE("window extrema follow the interpolated signal, not just samples") {
  // The interior maximum of the tent sits between samples of the child score.
  Trace tr({"x"}, {0.0, 1.0, 2.0}, {{-1.0}, {1.0}, {-1.0}});
  FormulaPtr f = parse("F[0.25,0.75] x >= 0");
  // max over [0.25, 0.75] of the tent x(t) = 2t-1 is at 0.75: 0.5.
  CHECK(rho(*f, tr, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("rho_signal agrees with rho pointwise") {
  std::mt19937_64 rng(23);
  Trace tr = testgen::random_trace(rng, 2, 12.0, 14);
  FormulaPtr f = parse("G[0,1] (x0 >= 0.1 | x1 <= 0.2)");
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(i * 0.25);
  ScoreSignal s = rho_signal(*f, tr, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(s.values[i] == rho(*f, tr, grid[i]));
  }
}

TEST_CASE("nested window extrema match a dense-sampling oracle") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    Trace tr = testgen::random_trace(rng, 1, 12.0, 16);
    FormulaPtr p = Formula::pred("x0", Cmp::Ge, testgen::uniform(rng, -0.5, 0.5));
    double a = testgen::uniform(rng, 0.0, 1.0);
    double b = a + testgen::uniform(rng, 1.0, 3.0);
    FormulaPtr g = Formula::globally(a, b, p);
    double t = 0.5;
    double exact = rho(*g, tr, t);
    // The predicate score is piecewise-linear with breakpoints at the trace
    // timestamps; a brute-force minimum must probe those too.
    double dense = rho_top;
    for (int k = 0; k <= 10000; ++k) {
      double tau = t + a + (b - a) * k / 10000.0;
      dense = std::min(dense, rho(*p, tr, tau));
    }
    for (double ts : tr.times()) {
      if (ts > t + a && ts < t + b) dense = std::min(dense, rho(*p, tr, ts));
    }
    CHECK(std::fabs(exact - dense) < 1e-9);
  }
}
