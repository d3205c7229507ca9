#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "agimstl/trace.hpp"

namespace agim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
};

/// Piecewise-constant input: value u_k is held on [(k-1)Ts, k Ts); the final
/// value also covers t == horizon so the endpoint can be sampled.
struct ControlSequence {
  double Ts = 1.0;
  std::vector<std::vector<double>> values;  // one m-vector per hold interval
  std::vector<Bounds> bounds;               // per input dimension

  static ControlSequence make(double Ts, std::vector<std::vector<double>> values,
                              std::vector<Bounds> bounds);

  double horizon() const { return Ts * static_cast<double>(values.size()); }
  std::size_t dims() const { return bounds.size(); }

  std::vector<double> hold(double t) const;

  void write_csv(const std::filesystem::path& path) const;
};

/// ODE right-hand side dq = f(t, q, u) with named state outputs.
struct Model {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  std::function<void(double t, std::span<const double> q, std::span<const double> u,
                     std::span<double> dq)>
      rhs;
  std::vector<double> q0;
  std::vector<Bounds> input_bounds;                     // per input dimension
  std::vector<std::pair<std::string, std::size_t>> outputs;  // trace name -> state index
};

/// Fixed-step RK4 from q0, sampling the named outputs every h (raw units).
/// The held input switches exactly on integration-step boundaries, so h must
/// divide Ts and T (Misaligned otherwise); a non-finite state raises NonFinite.
Trace simulate(const Model& m, const ControlSequence& cs, double T, double h);

struct ConsensusParams {
  double gamma_p = 1.0;
  double gamma_v = 1.0;
  double gamma_d = 1.0;
  std::vector<std::vector<int>> adjacency;  // symmetric 0/1, zero diagonal
};

/// u_c[i] = -gamma_p * sum_j a_ij (p_i - p_j) - gamma_v * sum_j a_ij (v_i - v_j)
///          - gamma_d * v_i
std::vector<Vec2> consensus_input(std::span<const Vec2> pos, std::span<const Vec2> vel,
                                  const ConsensusParams& params);

struct FormationParams {
  double gamma_p = 0.5;
  std::vector<std::vector<int>> adjacency;
  std::vector<Vec2> offsets;  // per-agent target offsets; d_ij = offsets[i] - offsets[j]
};

/// u_f[i] = -gamma_p * sum_j a_ij (p_i - p_j - d_ij)
std::vector<Vec2> formation_input(std::span<const Vec2> pos, const FormationParams& params);

/// Two-state stand-in for an automatic-transmission bench: speed and engine
/// rpm driven by a throttle in [0, 80] through a four-gear schedule with
/// quadratic drag. Full throttle pushes rpm past 4000 and speed past 100
/// within 30 s; moderate throttle keeps both below those limits; zero
/// throttle decays to idle.
Model transmission_surrogate();

/// N agents with double-integrator dynamics under a consensus feedback plus a
/// synthesized per-agent acceleration. State layout per agent: x,y,vx,vy;
/// outputs named x1,y1,vx1,vy1,x2,...
Model consensus_model(const ConsensusParams& params, std::size_t agents, std::vector<double> q0,
                      std::vector<Bounds> input_bounds);

/// N agents with single-integrator dynamics under a formation feedback plus a
/// synthesized per-agent velocity. State layout per agent: x,y.
Model formation_model(const FormationParams& params, std::size_t agents, std::vector<double> q0,
                      std::vector<Bounds> input_bounds);

/// A model plus the simulation/normalization context declared in a JSON
/// configuration file.
struct ModelSetup {
  Model model;
  double T = 0.0;
  double Ts = 0.0;
  double h = 0.01;
  std::map<std::string, Bounds> normalization;
};

/// Loads a model configuration:
///   { "model": "transmission" | "consensus" | "formation",
///     "T": 30, "Ts": 5, "h": 0.01,
///     "q0": [...], "input_bounds": [[lo, hi], ...],
///     "agents": 2, "gamma_p": .., "gamma_v": .., "gamma_d": ..,
///     "adjacency": [[0,1],[1,0]], "formation_offsets": [[x,y], ...],
///     "normalization": {"name": [lo, hi], ...} }
/// Missing or ill-typed keys raise ConfigError naming the key.
ModelSetup load_model_config(const std::filesystem::path& path);

}  // namespace agim
