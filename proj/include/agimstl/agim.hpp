#pragma once

#include "agimstl/formula.hpp"
#include "agimstl/trace.hpp"

namespace agim {

enum class Verdict { Satisfied, Violated, Inconclusive };

const char* to_string(Verdict v);
inline Verdict verdict_of(double score) {
  if (score > 0.0) return Verdict::Satisfied;
  if (score < 0.0) return Verdict::Violated;
  return Verdict::Inconclusive;
}

/// Normalized arithmetic-geometric integral mean robustness. The value lies
/// in [-1, 1]; its sign carries the verdict, zero is inconclusive.
struct Eta {
  double value = 0.0;
  Verdict verdict = Verdict::Inconclusive;
};

/// AGIM robustness of f at time t.
///
/// Recursion: True -> 1; predicate s >= pi -> (s(t) - pi)/2 (mirrored for <=);
/// negation flips the sign. Conjunction, disjunction and the temporal
/// operators branch on whether any child score is non-positive (G, And) or
/// positive (F, Or), then combine with the m-th-root product of shifted
/// scores on the satisfied side and the mean of clipped scores on the
/// violated side; temporal operators integrate over [t+a, t+b] normalized by
/// 1/(b-a).
///
/// Requires a normalized trace covering [t, t + horizon(f)], no Until, and
/// a < b on every temporal node.
Eta eta(const Formula& f, const Trace& tr, double t, const QuadratureConfig& q = {});

/// The function tau -> eta(f, tr, tau) on the refined grid over [t1, t2],
/// interpreted piecewise-linearly. Grid values agree exactly with eta() at
/// the same instants.
ScoreSignal eta_signal(const Formula& f, const Trace& tr, double t1, double t2,
                       const QuadratureConfig& q = {});

enum class MeanTransform { OnePlus, OneMinus };

/// Geometric integral mean exp((1/(t2-t1)) * int ln(transform(s(tau))) dtau),
/// computed by the composite trapezoid rule in the log domain over the
/// signal's grid. The transformed signal must stay above 1 + floor; a value
/// at or below that raises BranchViolation (never a silent clamp), since the
/// caller's branch selection is supposed to rule it out.
double geometric_integral_mean(const ScoreSignal& s, double t1, double t2,
                               MeanTransform transform, double floor = 1e-12);

enum class ClipSign { Positive, Negative };

/// (1/(t2-t1)) * integral of the positive or negative part of s, exact for
/// the piecewise-linear signal (segments split at their zero crossings).
double clipped_mean_integral(const ScoreSignal& s, double t1, double t2, ClipSign sign);

enum class AnyTest { NonPositive, Positive };

/// Whether the piecewise-linear signal attains value <= 0 (respectively > 0)
/// anywhere on [t1, t2], decided exactly from segment endpoints.
bool any(const ScoreSignal& s, double t1, double t2, AnyTest test);

}  // namespace agim
