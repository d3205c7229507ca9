#include "agimstl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "agimstl/errors.hpp"
#include "agimstl/util.hpp"

namespace agim {

namespace {

void check_adjacency(const std::vector<std::vector<int>>& a, std::size_t n) {
  if (a.size() != n) throw ConfigError("adjacency must be " + std::to_string(n) + " rows");
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) throw ConfigError("adjacency row " + std::to_string(i) + " has wrong width");
    if (a[i][i] != 0) throw ConfigError("adjacency diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      if (a[i][j] != 0 && a[i][j] != 1) throw ConfigError("adjacency entries must be 0 or 1");
      if (a[i][j] != a[j][i]) throw ConfigError("adjacency must be symmetric");
    }
  }
}

long checked_ratio(double whole, double part, const char* what) {
  double ratio = whole / part;
  long n = std::lround(ratio);
  if (n < 1 || std::fabs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    throw Misaligned(std::string(what) + ": " + detail::format_double(part) +
                     " does not divide " + detail::format_double(whole));
  return n;
}

}  // namespace

ControlSequence ControlSequence::make(double Ts, std::vector<std::vector<double>> values,
                                      std::vector<Bounds> bounds) {
  if (!(Ts > 0.0)) throw Error("control sample period must be positive");
  if (values.empty()) throw Error("control sequence needs at least one hold value");
  if (bounds.empty()) throw Error("control sequence needs input bounds");
  for (const auto& b : bounds) {
    if (!(b.lo <= b.hi)) throw Error("control bounds need lo <= hi");
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k].size() != bounds.size())
      throw Error("control value " + std::to_string(k) + " has wrong dimension");
    for (std::size_t d = 0; d < bounds.size(); ++d) {
      double v = values[k][d];
      if (!std::isfinite(v)) throw Error("control values must be finite");
      if (v < bounds[d].lo || v > bounds[d].hi)
        throw OutOfBounds("control value " + detail::format_double(v) + " at hold " +
                          std::to_string(k) + " dim " + std::to_string(d) + " outside [" +
                          detail::format_double(bounds[d].lo) + ", " +
                          detail::format_double(bounds[d].hi) + "]");
    }
  }
  ControlSequence cs;
  cs.Ts = Ts;
  cs.values = std::move(values);
  cs.bounds = std::move(bounds);
  return cs;
}

std::vector<double> ControlSequence::hold(double t) const {
  double T = horizon();
  if (t < 0.0 || t > T)
    throw OutOfDomain("hold time " + detail::format_double(t) + " outside [0, " +
                      detail::format_double(T) + "]");
  auto k = static_cast<std::size_t>(std::floor(t / Ts));
  if (k >= values.size()) k = values.size() - 1;  // t == T takes the last value
  return values[k];
}

void ControlSequence::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write control file: " + path.string());
  out << "k,t_start";
  for (std::size_t d = 0; d < dims(); ++d) out << ",u" << d;
  out << '\n';
  for (std::size_t k = 0; k < values.size(); ++k) {
    out << (k + 1) << ',' << detail::format_double(static_cast<double>(k) * Ts);
    for (double v : values[k]) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

Trace simulate(const Model& m, const ControlSequence& cs, double T, double h) {
  if (!(h > 0.0)) throw Error("integration step must be positive");
  if (!(T > 0.0)) throw Error("simulation horizon must be positive");
  if (m.q0.size() != m.state_dim) throw ConfigError("model q0 has wrong dimension");
  if (cs.dims() != m.input_dim) throw ConfigError("control dimension does not match model input");
  if (std::fabs(cs.horizon() - T) > 1e-9 * std::max(1.0, T))
    throw ConfigError("control sequence spans " + detail::format_double(cs.horizon()) +
                      " but the simulation horizon is " + detail::format_double(T));
  long steps_per_hold = checked_ratio(cs.Ts, h, "integration step vs Ts");
  long n_steps = checked_ratio(T, h, "integration step vs T");

  std::vector<double> q = m.q0;
  std::vector<double> k1(m.state_dim), k2(m.state_dim), k3(m.state_dim), k4(m.state_dim);
  std::vector<double> tmp(m.state_dim);

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  times.reserve(static_cast<std::size_t>(n_steps) + 1);
  rows.reserve(static_cast<std::size_t>(n_steps) + 1);

  auto record = [&](double t) {
    std::vector<double> row(m.outputs.size());
    for (std::size_t c = 0; c < m.outputs.size(); ++c) row[c] = q[m.outputs[c].second];
    times.push_back(t);
    rows.push_back(std::move(row));
  };

  record(0.0);
  for (long i = 0; i < n_steps; ++i) {
    double t = static_cast<double>(i) * h;
    // The hold index comes from the step counter, not from t, so input
    // switches land exactly on step boundaries.
    std::size_t hold_idx =
        std::min(static_cast<std::size_t>(i / steps_per_hold), cs.values.size() - 1);
    std::span<const double> u(cs.values[hold_idx]);

    m.rhs(t, q, u, k1);
    for (std::size_t d = 0; d < m.state_dim; ++d) tmp[d] = q[d] + 0.5 * h * k1[d];
    m.rhs(t + 0.5 * h, tmp, u, k2);
    for (std::size_t d = 0; d < m.state_dim; ++d) tmp[d] = q[d] + 0.5 * h * k2[d];
    m.rhs(t + 0.5 * h, tmp, u, k3);
    for (std::size_t d = 0; d < m.state_dim; ++d) tmp[d] = q[d] + h * k3[d];
    m.rhs(t + h, tmp, u, k4);
    for (std::size_t d = 0; d < m.state_dim; ++d)
      q[d] += h / 6.0 * (k1[d] + 2.0 * (k2[d] + k3[d]) + k4[d]);

    for (double v : q) {
      if (!std::isfinite(v))
        throw NonFinite("state became non-finite at t=" +
                        detail::format_double(static_cast<double>(i + 1) * h));
    }
    record(static_cast<double>(i + 1) * h);
  }

  std::vector<std::string> names(m.outputs.size());
  for (std::size_t c = 0; c < m.outputs.size(); ++c) names[c] = m.outputs[c].first;
  return Trace(std::move(names), std::move(times), std::move(rows));
}

std::vector<Vec2> consensus_input(std::span<const Vec2> pos, std::span<const Vec2> vel,
                                  const ConsensusParams& params) {
  std::size_t n = pos.size();
  if (vel.size() != n) throw Error("consensus input needs matching position/velocity counts");
  check_adjacency(params.adjacency, n);
  std::vector<Vec2> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      if (!params.adjacency[i][j]) continue;
      acc = acc - (pos[i] - pos[j]) * params.gamma_p - (vel[i] - vel[j]) * params.gamma_v;
    }
    u[i] = acc - vel[i] * params.gamma_d;
  }
  return u;
}

std::vector<Vec2> formation_input(std::span<const Vec2> pos, const FormationParams& params) {
  std::size_t n = pos.size();
  check_adjacency(params.adjacency, n);
  if (params.offsets.size() != n) throw ConfigError("formation offsets must cover every agent");
  std::vector<Vec2> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      if (!params.adjacency[i][j]) continue;
      Vec2 d_ij = params.offsets[i] - params.offsets[j];
      acc = acc - (pos[i] - pos[j] - d_ij) * params.gamma_p;
    }
    u[i] = acc;
  }
  return u;
}

Model transmission_surrogate() {
  // Gear schedule: speed thresholds with per-gear drive and rpm ratios.
  struct Gear {
    double up_to;
    double drive;
    double ratio;
  };
  static constexpr Gear gears[] = {
      {25.0, 2.9, 55.0},
      {45.0, 2.6, 32.0},
      {65.0, 2.45, 21.0},
      {1e300, 2.3, 15.0},
  };
  static constexpr double mass = 15.0;
  static constexpr double drag_lin = 0.5;
  static constexpr double drag_quad = 0.009;
  static constexpr double idle_rpm = 800.0;
  static constexpr double throttle_rpm = 25.0;
  static constexpr double rpm_rate = 2.0;

  Model m;
  m.name = "transmission";
  m.state_dim = 2;
  m.input_dim = 1;
  m.q0 = {0.0, idle_rpm};
  m.input_bounds = {{0.0, 80.0}};
  m.outputs = {{"speed", 0}, {"rpm", 1}};
  m.rhs = [](double, std::span<const double> q, std::span<const double> u, std::span<double> dq) {
    double v = q[0];
    double omega = q[1];
    const Gear* g = &gears[0];
    while (v >= g->up_to) ++g;
    double force = u[0] * g->drive - (drag_lin * v + drag_quad * v * v);
    double omega_cmd = idle_rpm + g->ratio * v + throttle_rpm * u[0];
    dq[0] = force / mass;
    dq[1] = rpm_rate * (omega_cmd - omega);
  };
  return m;
}

Model consensus_model(const ConsensusParams& params, std::size_t agents, std::vector<double> q0,
                      std::vector<Bounds> input_bounds) {
  if (agents < 1) throw ConfigError("consensus model needs at least one agent");
  check_adjacency(params.adjacency, agents);
  if (q0.size() != 4 * agents) throw ConfigError("consensus q0 must have 4 entries per agent");
  if (input_bounds.size() != 2 * agents)
    throw ConfigError("consensus input bounds must have 2 entries per agent");

  Model m;
  m.name = "consensus";
  m.state_dim = 4 * agents;
  m.input_dim = 2 * agents;
  m.q0 = std::move(q0);
  m.input_bounds = std::move(input_bounds);
  for (std::size_t i = 0; i < agents; ++i) {
    std::string k = std::to_string(i + 1);
    m.outputs.emplace_back("x" + k, 4 * i);
    m.outputs.emplace_back("y" + k, 4 * i + 1);
    m.outputs.emplace_back("vx" + k, 4 * i + 2);
    m.outputs.emplace_back("vy" + k, 4 * i + 3);
  }
  m.rhs = [params, agents](double, std::span<const double> q, std::span<const double> u,
                           std::span<double> dq) {
    std::vector<Vec2> pos(agents), vel(agents);
    for (std::size_t i = 0; i < agents; ++i) {
      pos[i] = {q[4 * i], q[4 * i + 1]};
      vel[i] = {q[4 * i + 2], q[4 * i + 3]};
    }
    std::vector<Vec2> uc = consensus_input(pos, vel, params);
    for (std::size_t i = 0; i < agents; ++i) {
      dq[4 * i] = vel[i].x;
      dq[4 * i + 1] = vel[i].y;
      dq[4 * i + 2] = uc[i].x + u[2 * i];
      dq[4 * i + 3] = uc[i].y + u[2 * i + 1];
    }
  };
  return m;
}

Model formation_model(const FormationParams& params, std::size_t agents, std::vector<double> q0,
                      std::vector<Bounds> input_bounds) {
  if (agents < 1) throw ConfigError("formation model needs at least one agent");
  check_adjacency(params.adjacency, agents);
  if (params.offsets.size() != agents)
    throw ConfigError("formation offsets must cover every agent");
  if (q0.size() != 2 * agents) throw ConfigError("formation q0 must have 2 entries per agent");
  if (input_bounds.size() != 2 * agents)
    throw ConfigError("formation input bounds must have 2 entries per agent");

  Model m;
  m.name = "formation";
  m.state_dim = 2 * agents;
  m.input_dim = 2 * agents;
  m.q0 = std::move(q0);
  m.input_bounds = std::move(input_bounds);
  for (std::size_t i = 0; i < agents; ++i) {
    std::string k = std::to_string(i + 1);
    m.outputs.emplace_back("x" + k, 2 * i);
    m.outputs.emplace_back("y" + k, 2 * i + 1);
  }
  m.rhs = [params, agents](double, std::span<const double> q, std::span<const double> u,
                           std::span<double> dq) {
    std::vector<Vec2> pos(agents);
    for (std::size_t i = 0; i < agents; ++i) pos[i] = {q[2 * i], q[2 * i + 1]};
    std::vector<Vec2> uf = formation_input(pos, params);
    for (std::size_t i = 0; i < agents; ++i) {
      dq[2 * i] = uf[i].x + u[2 * i];
      dq[2 * i + 1] = uf[i].y + u[2 * i + 1];
    }
  };
  return m;
}

namespace {

using nlohmann::json;

const json& require_key(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing config key '" + key + "'");
  return *it;
}

double require_number(const json& j, const std::string& key) {
  const json& v = require_key(j, key);
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> require_vector(const json& j, const std::string& key) {
  const json& v = require_key(j, key);
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("config key '" + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<Bounds> require_bounds_list(const json& j, const std::string& key) {
  const json& v = require_key(j, key);
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array of [lo, hi]");
  std::vector<Bounds> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ConfigError("config key '" + key + "' entries must be [lo, hi]");
    out.push_back(Bounds{e[0].get<double>(), e[1].get<double>()});
  }
  return out;
}

std::vector<std::vector<int>> require_adjacency(const json& j) {
  const json& v = require_key(j, "adjacency");
  if (!v.is_array()) throw ConfigError("config key 'adjacency' must be a matrix");
  std::vector<std::vector<int>> out;
  for (const auto& row : v) {
    if (!row.is_array()) throw ConfigError("config key 'adjacency' must be a matrix");
    std::vector<int> r;
    for (const auto& e : row) r.push_back(e.get<int>());
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Vec2> require_vec2_list(const json& j, const std::string& key) {
  const json& v = require_key(j, key);
  if (!v.is_array()) throw ConfigError("config key '" + key + "' must be an array of [x, y]");
  std::vector<Vec2> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2)
      throw ConfigError("config key '" + key + "' entries must be [x, y]");
    out.push_back(Vec2{e[0].get<double>(), e[1].get<double>()});
  }
  return out;
}

}  // namespace

ModelSetup load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }

  ModelSetup setup;
  setup.T = require_number(j, "T");
  setup.Ts = require_number(j, "Ts");
  setup.h = j.contains("h") ? require_number(j, "h") : 0.01;

  const json& norm = require_key(j, "normalization");
  if (!norm.is_object()) throw ConfigError("config key 'normalization' must be an object");
  for (auto it = norm.begin(); it != norm.end(); ++it) {
    const json& b = it.value();
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
      throw ConfigError("normalization entry '" + it.key() + "' must be [lo, hi]");
    setup.normalization[it.key()] = Bounds{b[0].get<double>(), b[1].get<double>()};
  }

  std::string kind = require_key(j, "model").get<std::string>();
  if (kind == "transmission") {
    setup.model = transmission_surrogate();
    if (j.contains("q0")) setup.model.q0 = require_vector(j, "q0");
    if (j.contains("input_bounds")) setup.model.input_bounds = require_bounds_list(j, "input_bounds");
  } else if (kind == "consensus") {
    auto agents = static_cast<std::size_t>(require_number(j, "agents"));
    ConsensusParams params;
    params.gamma_p = require_number(j, "gamma_p");
    params.gamma_v = require_number(j, "gamma_v");
    params.gamma_d = require_number(j, "gamma_d");
    params.adjacency = require_adjacency(j);
    setup.model = consensus_model(params, agents, require_vector(j, "q0"),
                                  require_bounds_list(j, "input_bounds"));
  } else if (kind == "formation") {
    auto agents = static_cast<std::size_t>(require_number(j, "agents"));
    FormationParams params;
    params.gamma_p = require_number(j, "gamma_p");
    params.adjacency = require_adjacency(j);
    params.offsets = require_vec2_list(j, "formation_offsets");
    setup.model = formation_model(params, agents, require_vector(j, "q0"),
                                  require_bounds_list(j, "input_bounds"));
  } else {
    throw ConfigError("unknown model kind '" + kind + "'");
  }
  return setup;
}

}  // namespace agim
