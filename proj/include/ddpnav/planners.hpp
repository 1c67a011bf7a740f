#pragma once

#include <optional>

#include "ddpnav/cost.hpp"
#include "ddpnav/dynamics.hpp"

namespace ddpnav {

enum class PlannerKind { Dwa, Mppi, LogMppi };

// A fully resolved planner setup: one of these exists per benchmark variant,
// so `horizon`/`p` already reflect whether DDP augmentation is on.
struct PlannerConfig {
  PlannerKind kind = PlannerKind::Dwa;
  bool ddp_enabled = false;
  int steps = 30;
  double horizon = 2.4;
  double p = 1.4;
  int samples = 300;        // K, sampling planners
  int retain = 10;          // best collision-free kept for averaging
  double lambda = 0.3;
  double sigma_v = 0.25;
  double sigma_omega = 0.6;
  double sigma_eta = 0.15;  // log-mppi multiplicative noise
  int dwa_v_samples = 11;
  int dwa_omega_samples = 21;
  double control_dt = 0.05;
  CostWeights weights;
  uint64_t seed = 0;
  bool dense_masks = false;      // diagnostic: keep every point despite ddp_enabled
  bool use_scan_field = false;   // plan on a per-tick scan-built field instead of ground truth
  double field_clearance = 2.0;  // clearance cap for that transient field
};

struct PlanStats {
  long long point_evals = 0;
  int feasible = 0;
};

inline FidelitySchedule planner_schedule(const PlannerConfig& cfg, int n) {
  if (!cfg.ddp_enabled) return uniform_schedule(cfg.steps, cfg.horizon, n);
  FidelitySchedule sched = build_schedule(cfg.steps, cfg.horizon, cfg.p, n);
  if (cfg.dense_masks) {
    std::fill(sched.masks_.begin(), sched.masks_.end(), 1);
    std::fill(sched.n_points.begin(), sched.n_points.end(), n);
  }
  return sched;
}

// Softmax with the minimum subtracted before exponentiation, normalized to
// sum 1. Subtracting the minimum keeps the exponent arguments bounded and
// makes the weights invariant to shifting every cost by a constant.
inline std::vector<double> softmax_weights(const std::vector<double>& costs, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("softmax_weights: lambda must be > 0");
  if (costs.empty()) return {};
  double cmin = costs[0];
  for (double c : costs) cmin = std::min(cmin, c);
  std::vector<double> w(costs.size());
  double sum = 0.0;
  for (size_t i = 0; i < costs.size(); ++i) {
    w[i] = std::exp(-(costs[i] - cmin) / lambda);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

// Dynamic-window search: a deterministic v x omega grid over the velocities
// reachable within one control period, each pair rolled out as a constant
// command. Returns the best collision-free pair, or nothing if every sample
// collides.
inline std::optional<Control> dwa_plan(const State& s, const DistanceField& field,
                                       const Vec2& goal, const PlannerConfig& cfg,
                                       const RobotSpec& spec, PlanStats* stats = nullptr) {
  if (cfg.dwa_v_samples < 2 || cfg.dwa_omega_samples < 2)
    throw std::invalid_argument("dwa_plan: need at least 2 samples per axis");
  FidelitySchedule sched = planner_schedule(cfg, spec.n_boundary);
  auto canonical = footprint_perimeter(spec);

  const double dt = cfg.control_dt;
  double v_lo = std::max(spec.v_min, s.v - spec.a_max * dt);
  double v_hi = std::min(spec.v_max, s.v + spec.a_max * dt);
  double w_lo = std::max(-spec.omega_max, s.omega - spec.alpha_max * dt);
  double w_hi = std::min(spec.omega_max, s.omega + spec.alpha_max * dt);

  PlanStats local;
  Trajectory traj;
  std::optional<Control> best;
  double best_cost = 0.0;
  for (int i = 0; i < cfg.dwa_v_samples; ++i) {
    double v = v_lo + (v_hi - v_lo) * i / (cfg.dwa_v_samples - 1);
    for (int j = 0; j < cfg.dwa_omega_samples; ++j) {
      double w = w_lo + (w_hi - w_lo) * j / (cfg.dwa_omega_samples - 1);
      Control u{v, w};
      rollout(s, std::span<const Control>(&u, 1), sched, field, spec, canonical, traj);
      local.point_evals += traj.points_checked;
      if (traj.collision) continue;
      ++local.feasible;
      double cost = evaluate_cost(traj, goal, cfg.weights);
      if (!best || cost < best_cost) {
        best = u;
        best_cost = cost;
      }
    }
  }
  if (stats) *stats = local;
  return best;
}

// Carried between calls of the sampling planners: the nominal control tape,
// the noise stream, and reusable rollout buffers.
struct MppiState {
  std::vector<Control> nominal;
  Rng rng;
  FidelitySchedule sched;
  std::vector<Vec2> canonical;
  PlanStats last_stats;

  // scratch
  std::vector<Control> tapes;   // K x T
  std::vector<double> costs;
  std::vector<uint8_t> feasible;
  Trajectory traj;

  MppiState(const PlannerConfig& cfg, const RobotSpec& spec)
      : nominal(cfg.steps), rng(cfg.seed), sched(planner_schedule(cfg, spec.n_boundary)),
        canonical(footprint_perimeter(spec)) {
    if (cfg.samples < 1) throw std::invalid_argument("MppiState: samples must be >= 1");
    if (cfg.retain < 1) throw std::invalid_argument("MppiState: retain must be >= 1");
  }
};

namespace detail {

inline void shift_nominal(std::vector<Control>& nominal) {
  if (nominal.size() < 2) return;
  std::copy(nominal.begin() + 1, nominal.end(), nominal.begin());
  nominal.back() = nominal[nominal.size() - 2];
}

inline Control clamp_control(const Control& u, const RobotSpec& spec) {
  return {clampd(u.v, spec.v_min, spec.v_max), clampd(u.omega, -spec.omega_max, spec.omega_max)};
}

// Center-point probe used by baseline log-MPPI: same integration, but only
// the robot center is tested against occupancy.
inline void rollout_center(const State& s0, std::span<const Control> controls,
                           const FidelitySchedule& sched, const DistanceField& field,
                           const RobotSpec& spec, Trajectory& out) {
  const int T = sched.steps;
  out.states.resize(T + 1);
  out.deltas = sched.deltas;
  out.clearances.assign(T, 0.0);
  out.collision = false;
  out.first_collision_step = -1;
  out.cost = 0.0;
  out.points_checked = 0;

  const double contact = field.resolution * 0.5;
  out.states[0] = s0;
  State cur = s0;
  for (int t = 0; t < T; ++t) {
    const Control& u = controls.size() == 1 ? controls[0] : controls[t];
    cur = step_unicycle(cur, u, sched.deltas[t], spec);
    out.states[t + 1] = cur;
    double cl = field.clearance_world({cur.x, cur.y});
    ++out.points_checked;
    if (cl < contact) {
      out.collision = true;
      out.first_collision_step = t;
      for (int r = t + 1; r <= T; ++r) out.states[r] = cur;
      break;
    }
    out.clearances[t] = cl;
  }
}

}  // namespace detail

// Path-integral update: K Gaussian perturbations of the shifted nominal tape,
// the best `retain` collision-free samples averaged with softmax weights.
// Returns nothing when no sample is collision-free.
inline std::optional<Control> mppi_plan(const State& s, const DistanceField& field,
                                        const Vec2& goal, const PlannerConfig& cfg,
                                        const RobotSpec& spec, MppiState& st) {
  const int T = cfg.steps, K = cfg.samples;
  detail::shift_nominal(st.nominal);

  st.tapes.resize(static_cast<size_t>(K) * T);
  st.costs.resize(K);
  st.feasible.resize(K);
  st.last_stats = {};

  for (int k = 0; k < K; ++k) {
    Control* tape = st.tapes.data() + static_cast<size_t>(k) * T;
    for (int t = 0; t < T; ++t) {
      Control u{st.nominal[t].v + cfg.sigma_v * st.rng.normal(),
                st.nominal[t].omega + cfg.sigma_omega * st.rng.normal()};
      tape[t] = detail::clamp_control(u, spec);
    }
    rollout(s, std::span<const Control>(tape, T), st.sched, field, spec, st.canonical, st.traj);
    st.last_stats.point_evals += st.traj.points_checked;
    st.feasible[k] = st.traj.collision ? 0 : 1;
    st.costs[k] = evaluate_cost(st.traj, goal, cfg.weights);
    if (st.feasible[k]) ++st.last_stats.feasible;
  }

  // Pick the retain best collision-free samples; ties resolved by index.
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(K);
  for (int k = 0; k < K; ++k)
    if (st.feasible[k]) ranked.emplace_back(st.costs[k], k);
  if (ranked.empty()) return std::nullopt;
  size_t keep = std::min<size_t>(cfg.retain, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end());
  ranked.resize(keep);

  // Weighted reduction in sample-index order.
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<double> kept_costs(keep);
  for (size_t r = 0; r < keep; ++r) kept_costs[r] = ranked[r].first;
  std::vector<double> w = softmax_weights(kept_costs, cfg.lambda);

  for (int t = 0; t < T; ++t) {
    double v = 0.0, om = 0.0;
    for (size_t r = 0; r < keep; ++r) {
      const Control& u = st.tapes[static_cast<size_t>(ranked[r].second) * T + t];
      v += w[r] * u.v;
      om += w[r] * u.omega;
    }
    st.nominal[t] = {v, om};
  }
  return st.nominal[0];
}

// Log-MPPI: perturbations are a normal/log-normal product eps = eta * xi with
// eta ~ N(1, sigma_eta^2), xi ~ N(0, sigma^2). Faithful to the published
// baseline, every sample enters the average (no collision-free filtering) and
// without DDP only the robot center is collision-checked, which is exactly
// the failure mode the augmentation repairs.
inline Control log_mppi_plan(const State& s, const DistanceField& field, const Vec2& goal,
                             const PlannerConfig& cfg, const RobotSpec& spec, MppiState& st) {
  const int T = cfg.steps, K = cfg.samples;
  detail::shift_nominal(st.nominal);

  st.tapes.resize(static_cast<size_t>(K) * T);
  st.costs.resize(K);
  st.last_stats = {};

  for (int k = 0; k < K; ++k) {
    Control* tape = st.tapes.data() + static_cast<size_t>(k) * T;
    for (int t = 0; t < T; ++t) {
      double eta_v = 1.0 + cfg.sigma_eta * st.rng.normal();
      double xi_v = cfg.sigma_v * st.rng.normal();
      double eta_w = 1.0 + cfg.sigma_eta * st.rng.normal();
      double xi_w = cfg.sigma_omega * st.rng.normal();
      Control u{st.nominal[t].v + eta_v * xi_v, st.nominal[t].omega + eta_w * xi_w};
      tape[t] = detail::clamp_control(u, spec);
    }
    if (cfg.ddp_enabled)
      rollout(s, std::span<const Control>(tape, T), st.sched, field, spec, st.canonical, st.traj);
    else
      detail::rollout_center(s, std::span<const Control>(tape, T), st.sched, field, spec, st.traj);
    st.last_stats.point_evals += st.traj.points_checked;
    if (!st.traj.collision) ++st.last_stats.feasible;
    st.costs[k] = evaluate_cost(st.traj, goal, cfg.weights);
  }

  std::vector<double> w = softmax_weights(st.costs, cfg.lambda);
  for (int t = 0; t < T; ++t) {
    double v = 0.0, om = 0.0;
    for (int k = 0; k < K; ++k) {
      const Control& u = st.tapes[static_cast<size_t>(k) * T + t];
      v += w[k] * u.v;
      om += w[k] * u.omega;
    }
    st.nominal[t] = {v, om};
  }
  return st.nominal[0];
}

}  // namespace ddpnav
