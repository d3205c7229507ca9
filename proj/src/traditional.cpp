#include "agimstl/traditional.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "agimstl/errors.hpp"
#include "agimstl/util.hpp"

namespace agim {

namespace {

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

struct RhoEval {
  const Trace& tr;
  double step;

  double point(const Formula& f, double t) const {
    switch (f.op()) {
      case Op::True:
        return rho_top;
      case Op::Pred: {
        double s = tr.sample_component(tr.index_of(f.var()), t);
        return f.cmp() == Cmp::Ge ? s - f.threshold() : f.threshold() - s;
      }
      case Op::Not:
        return -point(*f.child(), t);
      case Op::And: {
        double m = rho_top;
        for (const auto& c : f.children()) m = std::min(m, point(*c, t));
        return m;
      }
      case Op::Or: {
        double m = -rho_top;
        for (const auto& c : f.children()) m = std::max(m, point(*c, t));
        return m;
      }
      case Op::Globally:
      case Op::Until:
      case Op::Eventually: {
        if (f.op() == Op::Until) throw UnsupportedOperator("Until has no quantitative semantics");
        double w1 = t + f.lo();
        double w2 = t + f.hi();
        if (w1 == w2) return point(*f.child(), w1);  // degenerate window: point evaluation
        ScoreSignal s = signal(*f.child(), w1, w2);
        return f.op() == Op::Globally ? s.min_on(w1, w2) : s.max_on(w1, w2);
      }
    }
    throw Error("unreachable operator");
  }

  ScoreSignal signal(const Formula& f, double t1, double t2) const {
    switch (f.op()) {
      case Op::True:
        return ScoreSignal({t1, t2}, {rho_top, rho_top});
      case Op::Pred:
        return detail::predicate_signal(tr, tr.index_of(f.var()), f.cmp() == Cmp::Ge,
                                        f.threshold(), 1.0, t1, t2, step);
      case Op::Not: {
        ScoreSignal s = signal(*f.child(), t1, t2);
        for (double& v : s.values) v = -v;
        return s;
      }
      case Op::And:
      case Op::Or: {
        // Children signals contribute their grids (with exact predicate
        // crossings); values go through point() so grid values match rho().
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

double rho(const Formula& f, const Trace& tr, double t, const QuadratureConfig& q) {
  if (contains_until(f)) throw UnsupportedOperator("Until has no quantitative semantics");
  check_domain(f, tr, t, t);
  return RhoEval{tr, q.resolve_step(tr)}.point(f, t);
}

ScoreSignal rho_signal(const Formula& f, const Trace& tr, std::span<const double> grid,
                       const QuadratureConfig& q) {
  if (contains_until(f)) throw UnsupportedOperator("Until has no quantitative semantics");
  if (grid.size() < 2) throw Error("rho_signal needs at least two grid points");
  check_domain(f, tr, grid.front(), grid.back());
  RhoEval eval{tr, q.resolve_step(tr)};
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = eval.point(f, grid[i]);
  return ScoreSignal(std::vector<double>(grid.begin(), grid.end()), std::move(vals));
}

}  // namespace agim
