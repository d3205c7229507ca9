#pragma once

#include <limits>
#include <span>

#include "agimstl/formula.hpp"
#include "agimstl/trace.hpp"

namespace agim {

/// Maximum robustness assigned to the logical True.
inline constexpr double rho_top = std::numeric_limits<double>::infinity();

/// Traditional min/max robustness at time t. Works in whatever units the
/// trace carries (pass a normalized trace to compare against AGIM scores).
/// Window extrema of temporal operators are exact for the piecewise-linear
/// score signals built on the refined grid; a degenerate interval [a,a] is a
/// point evaluation. +/-inf appear only through the logical True.
///
/// Throws UnsupportedOperator for Until and OutOfDomain when the trace does
/// not cover [t, t + horizon(f)].
double rho(const Formula& f, const Trace& tr, double t, const QuadratureConfig& q = {});

/// rho evaluated at each point of an explicit grid.
ScoreSignal rho_signal(const Formula& f, const Trace& tr, std::span<const double> grid,
                       const QuadratureConfig& q = {});

}  // namespace agim
