#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "ddpnav/core.hpp"
#include "ddpnav/grid.hpp"

namespace ddpnav {

struct State {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

struct Control {
  double v = 0.0;
  double omega = 0.0;
};

struct RobotSpec {
  double length = 0.508;  // along body x
  double width = 0.430;
  double v_max = 1.5;
  double v_min = -0.5;
  double omega_max = 2.0;
  double a_max = 2.5;
  double alpha_max = 3.2;
  int n_boundary = 16;

  double inscribed_radius() const { return std::min(length, width) * 0.5; }
};

// Exact constant-twist step. Commands are first clamped to the acceleration
// window reachable within dt, intersected with the velocity envelope.
inline State step_unicycle(const State& s, const Control& u, double dt, const RobotSpec& spec) {
  if (dt <= 0.0) throw std::invalid_argument("step_unicycle: dt must be > 0");
  double v = clampd(u.v, s.v - spec.a_max * dt, s.v + spec.a_max * dt);
  v = clampd(v, spec.v_min, spec.v_max);
  double w = clampd(u.omega, s.omega - spec.alpha_max * dt, s.omega + spec.alpha_max * dt);
  w = clampd(w, -spec.omega_max, spec.omega_max);

  State out;
  if (std::abs(w) > 1e-6) {
    out.x = s.x + (v / w) * (std::sin(s.psi + w * dt) - std::sin(s.psi));
    out.y = s.y - (v / w) * (std::cos(s.psi + w * dt) - std::cos(s.psi));
  } else {
    out.x = s.x + v * dt * std::cos(s.psi);
    out.y = s.y + v * dt * std::sin(s.psi);
  }
  out.psi = wrap_angle(s.psi + w * dt);
  out.v = v;
  out.omega = w;
  return out;
}

// n points evenly spaced along the footprint rectangle, index 0 at the front
// bumper center, proceeding clockwise (toward -y in the body frame).
inline std::vector<Vec2> footprint_perimeter(const RobotSpec& spec) {
  const int n = spec.n_boundary;
  if (n < 4 || n % 4 != 0)
    throw std::invalid_argument("footprint_perimeter: n_boundary must be a positive multiple of 4");
  const double hl = spec.length * 0.5, hw = spec.width * 0.5;
  const double perim = 2.0 * (spec.length + spec.width);
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    double s = perim * i / n;
    if (s < hw) {
      pts[i] = {hl, -s};
    } else if (s < hw + spec.length) {
      pts[i] = {hl - (s - hw), -hw};
    } else if (s < hw + spec.length + spec.width) {
      pts[i] = {-hl, -hw + (s - hw - spec.length)};
    } else if (s < hw + 2.0 * spec.length + spec.width) {
      pts[i] = {-hl + (s - hw - spec.length - spec.width), hw};
    } else {
      pts[i] = {hl, hw - (s - hw - 2.0 * spec.length - spec.width)};
    }
  }
  return pts;
}

inline std::array<Vec2, 4> footprint_corners(const RobotSpec& spec) {
  const double hl = spec.length * 0.5, hw = spec.width * 0.5;
  return {Vec2{hl, -hw}, Vec2{-hl, -hw}, Vec2{-hl, hw}, Vec2{hl, hw}};
}

inline Vec2 body_to_world(const Pose2& pose, const Vec2& b) {
  double c = std::cos(pose.psi), s = std::sin(pose.psi);
  return {pose.x + c * b.x - s * b.y, pose.y + s * b.x + c * b.y};
}

// World positions of the masked footprint points at state s.
inline std::vector<Vec2> boundary_points(const State& s, const RobotSpec& spec,
                                         const std::vector<uint8_t>& mask) {
  auto canonical = footprint_perimeter(spec);
  if (mask.size() != canonical.size())
    throw std::invalid_argument("boundary_points: mask size must equal n_boundary");
  std::vector<Vec2> out;
  out.reserve(canonical.size());
  Pose2 pose{s.x, s.y, s.psi};
  for (size_t i = 0; i < canonical.size(); ++i)
    if (mask[i]) out.push_back(body_to_world(pose, canonical[i]));
  return out;
}

// Priority order that keeps surviving point subsets spread around the
// perimeter: indices sorted by bit-reversed rank over ceil(log2 n) bits.
inline std::vector<int> spread_order(int n) {
  int bits = 0;
  while ((1 << bits) < n) ++bits;
  std::vector<std::pair<uint32_t, int>> keyed(n);
  for (int i = 0; i < n; ++i) {
    uint32_t r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (1 << b)) r |= 1u << (bits - 1 - b);
    keyed[i] = {r, i};
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = keyed[i].second;
  return order;
}

// Per-step rollout fidelity: integration interval and checked-point mask.
// Intervals sum to the horizon; masks are nested and never empty.
struct FidelitySchedule {
  int steps = 0;
  double horizon = 0.0;
  double p = 1.0;
  int n = 0;
  std::vector<double> deltas;    // steps entries
  std::vector<int> n_points;     // rounded counts before the floor of 1
  std::vector<uint8_t> masks_;   // steps x n, row-major

  bool mask(int t, int i) const { return masks_[static_cast<size_t>(t) * n + i] != 0; }
  int checked_points(int t) const { return std::max(1, n_points[t]); }
};

inline FidelitySchedule build_schedule(int T, double horizon, double p, int n) {
  if (T < 1) throw std::invalid_argument("build_schedule: T must be >= 1");
  if (horizon <= 0.0) throw std::invalid_argument("build_schedule: horizon must be > 0");
  if (p <= 0.0) throw std::invalid_argument("build_schedule: p must be > 0");
  if (n < 4 || n % 4 != 0)
    throw std::invalid_argument("build_schedule: n must be a positive multiple of 4");

  FidelitySchedule sched;
  sched.steps = T;
  sched.horizon = horizon;
  sched.p = p;
  sched.n = n;
  sched.deltas.resize(T);
  sched.n_points.resize(T);
  sched.masks_.assign(static_cast<size_t>(T) * n, 0);

  for (int t = 0; t < T; ++t) {
    double a = std::pow(static_cast<double>(t) / T, p);
    double b = std::pow(static_cast<double>(t + 1) / T, p);
    sched.deltas[t] = horizon * (b - a);
    // Round half up; the checked set never drops below the front-center point.
    sched.n_points[t] = static_cast<int>(std::floor(n * (1.0 - a) + 0.5));
  }

  auto order = spread_order(n);
  for (int t = 0; t < T; ++t) {
    int keep = std::max(1, sched.n_points[t]);
    for (int k = 0; k < keep; ++k)
      sched.masks_[static_cast<size_t>(t) * n + order[k]] = 1;
  }
  return sched;
}

// Full-fidelity schedule: the p = 1 interval layout with every point checked.
// This is what planners use when DDP augmentation is disabled.
inline FidelitySchedule uniform_schedule(int T, double horizon, int n) {
  FidelitySchedule sched = build_schedule(T, horizon, 1.0, n);
  std::fill(sched.masks_.begin(), sched.masks_.end(), 1);
  std::fill(sched.n_points.begin(), sched.n_points.end(), n);
  return sched;
}

struct Trajectory {
  std::vector<State> states;      // T+1 entries, states[0] = s0
  std::vector<double> deltas;     // interval actually used per step
  std::vector<double> clearances; // min clearance over checked points per step
  bool collision = false;
  int first_collision_step = -1;
  double cost = 0.0;
  long long points_checked = 0;
};

// Roll a control tape (length T, or length 1 held constant) through the
// schedule. Checked points follow the per-step mask; the first detected
// contact stops integration and the colliding state is repeated.
inline void rollout(const State& s0, std::span<const Control> controls,
                    const FidelitySchedule& sched, const DistanceField& field,
                    const RobotSpec& spec, std::span<const Vec2> canonical, Trajectory& out) {
  const int T = sched.steps;
  if (controls.size() != 1 && static_cast<int>(controls.size()) != T)
    throw std::invalid_argument("rollout: controls must have length 1 or T");
  if (static_cast<int>(canonical.size()) != sched.n)
    throw std::invalid_argument("rollout: boundary point count does not match schedule");

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

    double c = std::cos(cur.psi), s = std::sin(cur.psi);
    double min_cl = field.max_clearance;
    bool hit = false;
    const uint8_t* mrow = sched.masks_.data() + static_cast<size_t>(t) * sched.n;
    for (int i = 0; i < sched.n; ++i) {
      if (!mrow[i]) continue;
      Vec2 p{cur.x + c * canonical[i].x - s * canonical[i].y,
             cur.y + s * canonical[i].x + c * canonical[i].y};
      double cl = field.clearance_world(p);
      ++out.points_checked;
      if (cl < min_cl) min_cl = cl;
      if (cl < contact) {
        hit = true;
        break;
      }
    }
    if (hit) {
      out.collision = true;
      out.first_collision_step = t;
      for (int r = t + 1; r <= T; ++r) out.states[r] = cur;
      break;
    }
    out.clearances[t] = min_cl;
  }
}

inline Trajectory rollout(const State& s0, std::span<const Control> controls,
                          const FidelitySchedule& sched, const DistanceField& field,
                          const RobotSpec& spec) {
  auto canonical = footprint_perimeter(spec);
  Trajectory out;
  rollout(s0, controls, sched, field, spec, canonical, out);
  return out;
}

}  // namespace ddpnav
