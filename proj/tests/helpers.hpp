#pragma once

#include <random>
#include <string>
#include <vector>

#include "agimstl/formula.hpp"
#include "agimstl/trace.hpp"

// Deterministic generators shared by the fuzz-style tests.
namespace testgen {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int pick(std::mt19937_64& rng, int n) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

/// Normalized trace with jittered near-regular timestamps on [0, span].
/// Jitter keeps gaps at >= 0.4 of the nominal step so slopes stay bounded.
inline agim::Trace random_trace(std::mt19937_64& rng, int comps, double span, int n_samples) {
  std::vector<std::string> names;
  for (int c = 0; c < comps; ++c) names.push_back("x" + std::to_string(c));
  double step = span / (n_samples - 1);
  std::vector<double> times;
  for (int i = 0; i < n_samples; ++i) {
    double t = i * step;
    if (i > 0 && i + 1 < n_samples) t += uniform(rng, -0.3, 0.3) * step;
    times.push_back(t);
  }
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n_samples; ++i) {
    std::vector<double> row;
    for (int c = 0; c < comps; ++c) row.push_back(uniform(rng, -1.0, 1.0));
    rows.push_back(std::move(row));
  }
  return agim::Trace(std::move(names), std::move(times), std::move(rows), true);
}

/// Random formula over x0..x{comps-1} with operators {!, &, |, F, G}.
/// Interval sizes keep horizon(f) <= 3.1 * depth.
inline agim::FormulaPtr random_formula(std::mt19937_64& rng, int comps, int depth) {
  using agim::Cmp;
  using agim::Formula;
  using agim::FormulaPtr;
  if (depth == 0 || pick(rng, 4) == 0) {
    std::string var = "x" + std::to_string(pick(rng, comps));
    Cmp cmp = pick(rng, 2) ? Cmp::Ge : Cmp::Le;
    return Formula::pred(var, cmp, uniform(rng, -0.9, 0.9));
  }
  switch (pick(rng, 5)) {
    case 0:
      return Formula::negation(random_formula(rng, comps, depth - 1));
    case 1:
    case 2: {
      int m = 2 + pick(rng, 2);
      std::vector<FormulaPtr> kids;
      for (int i = 0; i < m; ++i) kids.push_back(random_formula(rng, comps, depth - 1));
      return pick(rng, 2) ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    default: {
      double a = uniform(rng, 0.0, 1.5);
      double b = a + uniform(rng, 0.4, 1.6);
      FormulaPtr c = random_formula(rng, comps, depth - 1);
      return pick(rng, 2) ? Formula::globally(a, b, std::move(c))
                          : Formula::eventually(a, b, std::move(c));
    }
  }
}

/// Two-sample trace of one component following value(t) = slope * t + offset.
inline agim::Trace line_trace(const std::string& name, double t0, double t1, double v0, double v1,
                              bool normalized = false) {
  return agim::Trace({name}, {t0, t1}, {{v0}, {v1}}, normalized);
}

}  // namespace testgen
