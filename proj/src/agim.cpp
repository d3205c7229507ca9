#include "agimstl/agim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "agimstl/errors.hpp"
#include "agimstl/util.hpp"

namespace agim {

namespace {

// m-th root, with the exact forms for the common small arities.
double mth_root(double x, std::size_t m) {
  if (m == 2) return std::sqrt(x);
  if (m == 3) return std::cbrt(x);
  return std::pow(x, 1.0 / static_cast<double>(m));
}

// Child scores are sorted before reduction so conjunction and disjunction are
// invariant under child permutation down to the last bit. Disjunction reduces
// in descending order, which makes it the exact mirror of conjunction on
// negated scores (De Morgan holds bitwise).
double combine_and(std::vector<double> e) {
  std::sort(e.begin(), e.end());
  if (e.front() == e.back()) return e.front();  // both branches fix equal scores
  if (e.front() <= 0.0) {
    double sum = 0.0;
    for (double v : e) sum += std::min(v, 0.0);
    return sum / static_cast<double>(e.size());
  }
  double prod = 1.0;
  for (double v : e) prod *= 1.0 + v;
  return mth_root(prod, e.size()) - 1.0;
}

double combine_or(std::vector<double> e) {
  std::sort(e.begin(), e.end());
  if (e.front() == e.back()) return e.front();
  if (e.back() > 0.0) {
    double sum = 0.0;
    for (auto it = e.rbegin(); it != e.rend(); ++it) sum += std::max(*it, 0.0);
    return sum / static_cast<double>(e.size());
  }
  double prod = 1.0;
  for (auto it = e.rbegin(); it != e.rend(); ++it) prod *= 1.0 - *it;
  return 1.0 - mth_root(prod, e.size());
}

double clip_pos_segment(double ta, double va, double tb, double vb) {
  if (va >= 0.0 && vb >= 0.0) return 0.5 * (va + vb) * (tb - ta);
  if (va <= 0.0 && vb <= 0.0) return 0.0;
  double root = ta + va / (va - vb) * (tb - ta);
  if (va > 0.0) return 0.5 * va * (root - ta);
  return 0.5 * vb * (tb - root);
}

bool constant_on_window(const ScoreSignal& s, double t1, double t2, double& c) {
  bool all_equal = true;
  bool first = true;
  double value = 0.0;
  s.for_each_segment(t1, t2, [&](double, double va, double, double vb) {
    if (first) {
      value = va;
      first = false;
    }
    if (va != value || vb != value) all_equal = false;
  });
  c = value;
  return all_equal;
}

void check_eta_formula(const Formula& f) {
  switch (f.op()) {
    case Op::Until:
      throw UnsupportedOperator("Until has no quantitative semantics");
    case Op::Pred:
      if (f.threshold() < -1.0 || f.threshold() > 1.0)
        throw NotNormalized("predicate threshold " + detail::format_double(f.threshold()) +
                            " outside [-1,1]; AGIM predicates are over normalized traces");
      return;
    case Op::Eventually:
    case Op::Globally:
      if (f.lo() == f.hi())
        throw IntervalError("AGIM temporal operators need a < b, got [" +
                            detail::format_double(f.lo()) + "," + detail::format_double(f.hi()) +
                            "]");
      break;
    default:
      break;
  }
  for (const auto& c : f.children()) check_eta_formula(*c);
}

void check_domain(const Formula& f, const Trace& tr, double t1, double t2) {
  double need = t2 + horizon(f);
  double slack = 16.0 * std::numeric_limits<double>::epsilon() *
                 std::max({std::fabs(need), std::fabs(t1), 1.0});
  if (t1 < tr.start_time() - slack || need > tr.end_time() + slack)
    throw OutOfDomain("evaluation needs trace on [" + detail::format_double(t1) + ", " +
                      detail::format_double(need) + "] but trace spans [" +
                      detail::format_double(tr.start_time()) + ", " +
                      detail::format_double(tr.end_time()) + "]");
}

struct EtaEval {
  const Trace& tr;
  double step;
  double floor;

  double point(const Formula& f, double t) const {
    switch (f.op()) {
      case Op::True:
        return 1.0;
      case Op::Pred: {
        double s = tr.sample_component(tr.index_of(f.var()), t);
        return f.cmp() == Cmp::Ge ? 0.5 * (s - f.threshold()) : 0.5 * (f.threshold() - s);
      }
      case Op::Not:
        return -point(*f.child(), t);
      case Op::And:
      case Op::Or: {
        std::vector<double> e;
        e.reserve(f.arity());
        for (const auto& c : f.children()) e.push_back(point(*c, t));
        return f.op() == Op::And ? combine_and(std::move(e)) : combine_or(std::move(e));
      }
      case Op::Globally:
      case Op::Eventually: {
        double w1 = t + f.lo();
        double w2 = t + f.hi();
        ScoreSignal s = signal(*f.child(), w1, w2);
        if (f.op() == Op::Globally) {
          return any(s, w1, w2, AnyTest::NonPositive)
                     ? clipped_mean_integral(s, w1, w2, ClipSign::Negative)
                     : geometric_integral_mean(s, w1, w2, MeanTransform::OnePlus, floor) - 1.0;
        }
        return any(s, w1, w2, AnyTest::Positive)
                   ? clipped_mean_integral(s, w1, w2, ClipSign::Positive)
                   : 1.0 - geometric_integral_mean(s, w1, w2, MeanTransform::OneMinus, floor);
      }
      case Op::Until:
        throw UnsupportedOperator("Until has no quantitative semantics");
    }
    throw Error("unreachable operator");
  }

  ScoreSignal signal(const Formula& f, double t1, double t2) const {
    switch (f.op()) {
      case Op::True:
        return ScoreSignal({t1, t2}, {1.0, 1.0});
      case Op::Pred:
        return detail::predicate_signal(tr, tr.index_of(f.var()), f.cmp() == Cmp::Ge,
                                        f.threshold(), 0.5, t1, t2, step);
      case Op::Not: {
        ScoreSignal s = signal(*f.child(), t1, t2);
        for (double& v : s.values) v = -v;
        return s;
      }
      case Op::And:
      case Op::Or: {
        // Children signals contribute their grids (with exact predicate
        // crossings); values are re-evaluated through point() so that signal
        // grid values agree with eta() at the same instants bit for bit.
        std::vector<ScoreSignal> kids;
        kids.reserve(f.arity());
        for (const auto& c : f.children()) kids.push_back(signal(*c, t1, t2));
        std::vector<const ScoreSignal*> ptrs;
        for (const auto& k : kids) ptrs.push_back(&k);
        std::vector<double> grid = detail::union_grids(ptrs);
        std::vector<double> vals(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = point(f, grid[i]);
        return ScoreSignal(std::move(grid), std::move(vals));
      }
      case Op::Globally:
      case Op::Eventually: {
        std::vector<double> grid = detail::refined_grid(tr, t1, t2, step);
        std::vector<double> vals(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = point(f, grid[i]);
        return ScoreSignal(std::move(grid), std::move(vals));
      }
      case Op::Until:
        throw UnsupportedOperator("Until has no quantitative semantics");
    }
    throw Error("unreachable operator");
  }
};

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "Satisfied";
    case Verdict::Violated: return "Violated";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

Eta eta(const Formula& f, const Trace& tr, double t, const QuadratureConfig& q) {
  if (!tr.normalized())
    throw NotNormalized("AGIM robustness needs a normalized trace; call normalize() first");
  check_eta_formula(f);
  check_domain(f, tr, t, t);
  double v = EtaEval{tr, q.resolve_step(tr), q.floor}.point(f, t);
  return Eta{v, verdict_of(v)};
}

ScoreSignal eta_signal(const Formula& f, const Trace& tr, double t1, double t2,
                       const QuadratureConfig& q) {
  if (!tr.normalized())
    throw NotNormalized("AGIM robustness needs a normalized trace; call normalize() first");
  if (!(t2 > t1)) throw Error("eta_signal needs t1 < t2");
  check_eta_formula(f);
  check_domain(f, tr, t1, t2);
  return EtaEval{tr, q.resolve_step(tr), q.floor}.signal(f, t1, t2);
}

double geometric_integral_mean(const ScoreSignal& s, double t1, double t2,
                               MeanTransform transform, double floor) {
  if (!(t2 > t1)) throw Error("geometric integral mean needs t1 < t2");
  auto tf = [transform](double v) {
    return transform == MeanTransform::OnePlus ? 1.0 + v : 1.0 - v;
  };
  auto guard = [&](double tv, double at) {
    if (!(tv > 1.0 + floor))
      throw BranchViolation("geometric-mean integrand " + detail::format_double(tv) + " at t=" +
                            detail::format_double(at) +
                            " is not above 1; branch selection is inconsistent");
  };

  double c = 0.0;
  if (constant_on_window(s, t1, t2, c)) {
    double tv = tf(c);
    guard(tv, t1);
    return tv;
  }

  double sum = 0.0;
  s.for_each_segment(t1, t2, [&](double ta, double va, double tb, double vb) {
    double fa = tf(va);
    double fb = tf(vb);
    guard(fa, ta);
    guard(fb, tb);
    sum += 0.5 * (std::log(fa) + std::log(fb)) * (tb - ta);
  });
  return std::exp(sum / (t2 - t1));
}

double clipped_mean_integral(const ScoreSignal& s, double t1, double t2, ClipSign sign) {
  if (!(t2 > t1)) throw Error("clipped mean needs t1 < t2");
  bool negative = sign == ClipSign::Negative;

  double c = 0.0;
  if (constant_on_window(s, t1, t2, c)) {
    if (negative) return c < 0.0 ? c : 0.0;
    return c > 0.0 ? c : 0.0;
  }

  double sum = 0.0;
  s.for_each_segment(t1, t2, [&](double ta, double va, double tb, double vb) {
    if (negative) {
      va = -va;
      vb = -vb;
    }
    sum += clip_pos_segment(ta, va, tb, vb);
  });
  double mean = sum / (t2 - t1);
  return negative ? -mean : mean;
}

bool any(const ScoreSignal& s, double t1, double t2, AnyTest test) {
  if (test == AnyTest::NonPositive) return s.min_on(t1, t2) <= 0.0;
  return s.max_on(t1, t2) > 0.0;
}

}  // namespace agim
