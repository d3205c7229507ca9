#include "agimstl/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "agimstl/errors.hpp"
#include "agimstl/util.hpp"

namespace agim {

namespace {

// Linear interpolation that is exact for constant segments (handles the
// +/-inf constants produced by the truth signal).
double lerp(double t0, double v0, double t1, double v1, double t) {
  if (v0 == v1) return v0;
  double theta = (t - t0) / (t1 - t0);
  return v0 + (v1 - v0) * theta;
}

double domain_slack(double a, double b) {
  double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
  return 16.0 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace

double QuadratureConfig::resolve_step(const Trace& tr) const {
  if (grid_step > 0.0) return grid_step;
  if (!(refine_factor > 0.0)) throw Error("refine_factor must be positive");
  return tr.median_spacing() / refine_factor;
}

Trace::Trace(std::vector<std::string> names, std::vector<double> times,
             std::vector<std::vector<double>> samples, bool normalized)
    : names_(std::move(names)), times_(std::move(times)), samples_(std::move(samples)),
      normalized_(normalized) {
  if (names_.empty()) throw Error("trace needs at least one component");
  if (times_.size() < 2) throw Error("trace needs at least two timestamps");
  if (samples_.size() != times_.size()) throw Error("trace sample count does not match timestamps");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw Error("trace component names must be non-empty");
    for (std::size_t j = i + 1; j < names_.size(); ++j) {
      if (names_[i] == names_[j]) throw Error("duplicate trace component name: " + names_[i]);
    }
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw Error("trace timestamps must be finite");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw Error("trace timestamps must be strictly increasing (row " + std::to_string(i) + ")");
    if (samples_[i].size() != names_.size())
      throw Error("trace row " + std::to_string(i) + " has wrong sample width");
    for (double v : samples_[i]) {
      if (!std::isfinite(v)) throw Error("trace samples must be finite");
    }
    if (normalized_) {
      for (double v : samples_[i]) {
        if (v < -1.0 || v > 1.0)
          throw NotNormalized("trace flagged normalized but has value " +
                              detail::format_double(v));
      }
    }
  }
}

std::size_t Trace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw Error("trace has no component named '" + std::string(name) + "'");
}

std::size_t Trace::segment_of(double t) const {
  // Index i such that times_[i] <= t <= times_[i+1].
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times_.begin());
  if (i == 0) return 0;
  if (i >= times_.size()) return times_.size() - 2;
  return i - 1;
}

std::vector<double> Trace::sample(double t) const {
  std::vector<double> out(dims());
  for (std::size_t c = 0; c < dims(); ++c) out[c] = sample_component(c, t);
  return out;
}

double Trace::sample_component(std::size_t comp, double t) const {
  if (comp >= dims()) throw Error("trace component index out of range");
  double slack = domain_slack(start_time(), end_time());
  if (t < start_time() - slack || t > end_time() + slack)
    throw OutOfDomain("sample time " + detail::format_double(t) + " outside trace span [" +
                      detail::format_double(start_time()) + ", " +
                      detail::format_double(end_time()) + "]");
  t = std::clamp(t, start_time(), end_time());
  std::size_t i = segment_of(t);
  if (t == times_[i]) return samples_[i][comp];
  if (t == times_[i + 1]) return samples_[i + 1][comp];
  return lerp(times_[i], samples_[i][comp], times_[i + 1], samples_[i + 1][comp], t);
}

double Trace::median_spacing() const {
  std::vector<double> gaps(times_.size() - 1);
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) gaps[i] = times_[i + 1] - times_[i];
  std::size_t mid = gaps.size() / 2;
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(mid), gaps.end());
  return gaps[mid];
}

Trace Trace::normalize(const std::map<std::string, Bounds>& bounds) const {
  std::vector<Bounds> per_comp(dims());
  for (std::size_t c = 0; c < dims(); ++c) {
    auto it = bounds.find(names_[c]);
    if (it == bounds.end())
      throw ConfigError("missing normalization bounds for component '" + names_[c] + "'");
    if (!(it->second.lo < it->second.hi))
      throw ConfigError("normalization bounds for '" + names_[c] + "' need lo < hi");
    per_comp[c] = it->second;
  }
  std::vector<std::vector<double>> rows(samples_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < dims(); ++c) {
      double x = rows[i][c];
      const Bounds& b = per_comp[c];
      if (x < b.lo || x > b.hi)
        throw OutOfBounds("component '" + names_[c] + "' value " + detail::format_double(x) +
                          " at t=" + detail::format_double(times_[i]) + " outside [" +
                          detail::format_double(b.lo) + ", " + detail::format_double(b.hi) + "]");
      rows[i][c] = detail::normalize_value(x, b);
    }
  }
  return Trace(names_, times_, std::move(rows), true);
}

Trace Trace::assume_normalized() const {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    for (std::size_t c = 0; c < dims(); ++c) {
      double v = samples_[i][c];
      if (v < -1.0 || v > 1.0)
        throw NotNormalized("component '" + names_[c] + "' value " + detail::format_double(v) +
                            " at t=" + detail::format_double(times_[i]) +
                            " outside [-1,1]; pass normalization bounds instead");
    }
  }
  return Trace(names_, times_, samples_, true);
}

Trace Trace::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file: " + path.string());
  return read_csv(in, path.string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_csv_double(const std::string& field, const std::string& origin, std::size_t line_no) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double v = 0.0;
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw Error(origin + ":" + std::to_string(line_no) + ": malformed number '" + field + "'");
  return v;
}

}  // namespace

Trace Trace::read_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw Error(origin + ": empty trace file");
  std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "time")
    throw Error(origin + ":1: header must start with 'time'");
  if (header.size() < 2) throw Error(origin + ":1: header needs at least one component column");
  std::vector<std::string> names(header.begin() + 1, header.end());

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(origin + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    times.push_back(parse_csv_double(fields[0], origin, line_no));
    std::vector<double> row(fields.size() - 1);
    for (std::size_t c = 1; c < fields.size(); ++c)
      row[c - 1] = parse_csv_double(fields[c], origin, line_no);
    rows.push_back(std::move(row));
  }
  return Trace(std::move(names), std::move(times), std::move(rows));
}

void Trace::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace file: " + path.string());
  write_csv(out);
}

void Trace::write_csv(std::ostream& out) const {
  out << "time";
  for (const auto& n : names_) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < times_.size(); ++i) {
    out << detail::format_double(times_[i]);
    for (double v : samples_[i]) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

ScoreSignal::ScoreSignal(std::vector<double> g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (grid.size() < 2) throw Error("score signal needs at least two grid points");
  if (grid.size() != values.size()) throw Error("score signal grid/value size mismatch");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error("score signal grid must increase strictly");
    if (std::isnan(values[i])) throw Error("score signal value is NaN");
  }
}

std::size_t ScoreSignal::upper_index(double t) const {
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  return static_cast<std::size_t>(it - grid.begin());
}

double ScoreSignal::value_at(double t) const {
  double slack = domain_slack(start(), end());
  if (t < start() - slack || t > end() + slack)
    throw OutOfDomain("signal query " + detail::format_double(t) + " outside [" +
                      detail::format_double(start()) + ", " + detail::format_double(end()) + "]");
  t = std::clamp(t, start(), end());
  auto it = std::lower_bound(grid.begin(), grid.end(), t);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i < grid.size() && grid[i] == t) return values[i];
  // t lies strictly inside segment (i-1, i)
  return lerp(grid[i - 1], values[i - 1], grid[i], values[i], t);
}

double ScoreSignal::min_on(double t1, double t2) const {
  if (t1 == t2) return value_at(t1);
  double m = std::numeric_limits<double>::infinity();
  for_each_segment(t1, t2, [&](double, double va, double, double vb) {
    m = std::min({m, va, vb});
  });
  return m;
}

double ScoreSignal::max_on(double t1, double t2) const {
  if (t1 == t2) return value_at(t1);
  double m = -std::numeric_limits<double>::infinity();
  for_each_segment(t1, t2, [&](double, double va, double, double vb) {
    m = std::max({m, va, vb});
  });
  return m;
}

std::vector<double> ScoreSignal::zero_crossings(double t1, double t2) const {
  std::vector<double> out;
  for_each_segment(t1, t2, [&](double ta, double va, double tb, double vb) {
    if (va == 0.0) {
      out.push_back(ta);
    } else if ((va < 0.0 && vb > 0.0) || (va > 0.0 && vb < 0.0)) {
      out.push_back(ta + va / (va - vb) * (tb - ta));
    }
  });
  if (value_at(t2) == 0.0) out.push_back(t2);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

double normalize_value(double x, const Bounds& b) {
  return 2.0 * (x - b.lo) / (b.hi - b.lo) - 1.0;
}

std::vector<double> refined_grid(const Trace& tr, double t1, double t2, double step) {
  if (!(t2 > t1)) throw Error("refined grid needs t1 < t2");
  if (!(step > 0.0)) throw Error("refined grid needs a positive step");

  // Fixed points: window endpoints plus trace timestamps strictly inside.
  std::vector<double> fixed;
  fixed.push_back(t1);
  const auto& times = tr.times();
  for (auto it = std::upper_bound(times.begin(), times.end(), t1);
       it != times.end() && *it < t2; ++it) {
    fixed.push_back(*it);
  }
  fixed.push_back(t2);

  double tol = step * 1e-9;
  std::vector<double> out;
  out.reserve(fixed.size() + static_cast<std::size_t>((t2 - t1) / step) + 2);
  long k = 1;
  double u = t1 + step;
  for (double f : fixed) {
    // Uniform points strictly before this fixed point.
    while (u < t2 && u < f - tol) {
      if (u > out.back() + tol) out.push_back(u);
      ++k;
      u = t1 + static_cast<double>(k) * step;
    }
    // Uniform points colliding with it are absorbed.
    while (std::fabs(u - f) <= tol) {
      ++k;
      u = t1 + static_cast<double>(k) * step;
    }
    out.push_back(f);
  }
  return out;
}

ScoreSignal predicate_signal(const Trace& tr, std::size_t comp, bool greater_equal,
                             double threshold, double scale, double t1, double t2, double step) {
  std::vector<double> grid = refined_grid(tr, t1, t2, step);

  // Exact threshold crossings along the raw trace segments inside (t1, t2).
  std::vector<double> roots;
  const auto& times = tr.times();
  const auto& rows = tr.samples();
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (times[i + 1] <= t1 || times[i] >= t2) continue;
    double va = rows[i][comp] - threshold;
    double vb = rows[i + 1][comp] - threshold;
    if ((va < 0.0 && vb > 0.0) || (va > 0.0 && vb < 0.0)) {
      double root = times[i] + va / (va - vb) * (times[i + 1] - times[i]);
      if (root > t1 && root < t2) roots.push_back(root);
    }
  }

  if (!roots.empty()) {
    std::sort(roots.begin(), roots.end());
    std::vector<double> with_roots;
    with_roots.reserve(grid.size() + roots.size());
    std::merge(grid.begin(), grid.end(), roots.begin(), roots.end(),
               std::back_inserter(with_roots));
    double tol = step * 1e-9;
    grid.clear();
    for (double t : with_roots) {
      if (grid.empty() || t > grid.back() + tol) grid.push_back(t);
    }
    // Roots are strictly inside the window; re-pin the end if one crowded it out.
    if (grid.back() != t2) grid.back() = t2;
  }

  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = tr.sample_component(comp, grid[i]);
    values[i] = greater_equal ? scale * (s - threshold) : scale * (threshold - s);
  }
  // Pin inserted crossings to exactly zero.
  for (double r : roots) {
    auto it = std::lower_bound(grid.begin(), grid.end(), r);
    if (it != grid.end() && *it == r) values[static_cast<std::size_t>(it - grid.begin())] = 0.0;
  }
  return ScoreSignal(std::move(grid), std::move(values));
}

std::vector<double> union_grids(const std::vector<const ScoreSignal*>& signals) {
  std::vector<double> merged;
  for (const ScoreSignal* s : signals)
    merged.insert(merged.end(), s->grid.begin(), s->grid.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return merged;
}

}  // namespace detail

}  // namespace agim
