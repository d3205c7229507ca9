#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace agim {

/// Closed interval of raw signal values.
struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Grid-refinement knobs shared by both evaluators.
///
/// The evaluation grid for a window is the union of the trace timestamps in
/// that window, a uniform refinement at the resolved step, and (for
/// predicates) the exact zero-crossing times of the predicate score.
struct QuadratureConfig {
  double grid_step = 0.0;      ///< explicit refinement step; 0 means automatic
  double refine_factor = 4.0;  ///< automatic step = median trace spacing / refine_factor
  double floor = 1e-12;        ///< geometric-mean branch guard (see BranchViolation)

  double resolve_step(const class Trace& tr) const;
};

/// Continuous-time vector signal: strictly increasing timestamps with one
/// sample vector per timestamp, reconstructed by linear interpolation.
/// Immutable after construction.
class Trace {
 public:
  Trace(std::vector<std::string> names, std::vector<double> times,
        std::vector<std::vector<double>> samples, bool normalized = false);

  std::size_t size() const { return times_.size(); }
  std::size_t dims() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::vector<double>>& samples() const { return samples_; }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  bool normalized() const { return normalized_; }

  std::size_t index_of(std::string_view name) const;

  /// Linear interpolation of all components; exact at grid points.
  std::vector<double> sample(double t) const;
  double sample_component(std::size_t comp, double t) const;

  double median_spacing() const;

  /// Affine map x -> 2(x - lo)/(hi - lo) - 1 per component. Bounds must cover
  /// every component by name; values outside their bounds raise OutOfBounds.
  Trace normalize(const std::map<std::string, Bounds>& bounds) const;

  /// Marks an already [-1,1]-valued trace as normalized; NotNormalized otherwise.
  Trace assume_normalized() const;

  /// CSV with header `time,name1,...,nameN`, one row per timestamp. Strict.
  static Trace read_csv(const std::filesystem::path& path);
  static Trace read_csv(std::istream& in, const std::string& origin = "<stream>");
  void write_csv(const std::filesystem::path& path) const;
  void write_csv(std::ostream& out) const;

 private:
  std::size_t segment_of(double t) const;

  std::vector<std::string> names_;
  std::vector<double> times_;
  std::vector<std::vector<double>> samples_;
  bool normalized_ = false;
};

/// Scalar robustness-over-time on an explicit grid, interpreted as
/// piecewise-linear between grid points. The intermediate of recursive
/// evaluation; immutable once built.
struct ScoreSignal {
  std::vector<double> grid;
  std::vector<double> values;

  ScoreSignal() = default;
  ScoreSignal(std::vector<double> g, std::vector<double> v);

  double start() const { return grid.front(); }
  double end() const { return grid.back(); }

  /// Piecewise-linear value; exact at grid points. Queries a few ulps past the
  /// ends clamp to the boundary (window arithmetic round-off), farther ones
  /// raise OutOfDomain.
  double value_at(double t) const;

  /// Exact extrema over [t1,t2]: piecewise-linear extremes sit at grid points
  /// or window endpoints.
  double min_on(double t1, double t2) const;
  double max_on(double t1, double t2) const;

  /// All times where the piecewise-linear signal crosses zero in [t1,t2],
  /// each solved exactly on its segment; grid points that are exactly zero are
  /// reported once. Sorted ascending.
  std::vector<double> zero_crossings(double t1, double t2) const;

  /// Calls fn(ta, va, tb, vb) for consecutive sub-segments covering [t1,t2],
  /// with endpoint values interpolated at the window boundary.
  template <typename F>
  void for_each_segment(double t1, double t2, F&& fn) const {
    double ta = t1;
    double va = value_at(t1);
    for (std::size_t i = upper_index(t1); i < grid.size() && grid[i] < t2; ++i) {
      fn(ta, va, grid[i], values[i]);
      ta = grid[i];
      va = values[i];
    }
    fn(ta, va, t2, value_at(t2));
  }

 private:
  std::size_t upper_index(double t) const;  // first grid index with grid[i] > t
};

namespace detail {

/// Union of {t1, t2}, trace timestamps in (t1,t2), and a uniform refinement at
/// `step`. Sorted, deduplicated; near-coincident refinement points are merged
/// into their neighbors.
std::vector<double> refined_grid(const Trace& tr, double t1, double t2, double step);

/// Score signal of a predicate over [t1,t2]: scale * (s - threshold) for >=,
/// scale * (threshold - s) for <=. The grid additionally carries the exact
/// crossing times of s with the threshold, pinned to value 0.
ScoreSignal predicate_signal(const Trace& tr, std::size_t comp, bool greater_equal,
                             double threshold, double scale, double t1, double t2, double step);

/// Merged grid of several signals spanning the same window.
std::vector<double> union_grids(const std::vector<const ScoreSignal*>& signals);

double normalize_value(double x, const Bounds& b);

}  // namespace detail

}  // namespace agim
