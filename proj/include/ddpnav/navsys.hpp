#pragma once

#include "ddpnav/lidar.hpp"
#include "ddpnav/planners.hpp"

namespace ddpnav {

enum class Mode { HighSpeed, LowSpeed, Braking, Recovery };
enum class RecoveryKind { Rotate, Reverse };

inline const char* mode_name(Mode m, RecoveryKind r = RecoveryKind::Rotate) {
  switch (m) {
    case Mode::HighSpeed: return "highspeed";
    case Mode::LowSpeed: return "lowspeed";
    case Mode::Braking: return "braking";
    case Mode::Recovery: return r == RecoveryKind::Rotate ? "recovery_rotate" : "recovery_reverse";
  }
  return "?";
}

struct ModeThresholds {
  double v_low = 0.25;     // below this, HighSpeed starts counting down
  double t_low = 1.0;
  double v_rec = 0.1;      // below this, LowSpeed counts toward Braking
  double t_rec = 1.5;
  double t_brake = 0.5;    // commanded-stop dwell before Recovery
  double v_resume = 0.5;   // above this, LowSpeed counts toward HighSpeed
  double t_resume = 2.0;
  double low_v_frac = 0.5;     // LowSpeed velocity cap as a fraction of v_max
  double low_omega_frac = 0.7;
};

struct ModeState {
  Mode mode = Mode::HighSpeed;
  RecoveryKind recovery = RecoveryKind::Rotate;
  double below_timer = 0.0;
  double above_timer = 0.0;
  double brake_timer = 0.0;
};

// Speed-triggered mode transitions. Pure in (state, |v|, dt); recovery
// maneuver completion is decided by the navigator, which can see the scan.
inline ModeState update_mode(ModeState m, double v_measured, double dt, const ModeThresholds& th) {
  const double sp = std::abs(v_measured);
  const double eps = 1e-9;
  auto to = [&](Mode target) {
    m.mode = target;
    m.below_timer = m.above_timer = m.brake_timer = 0.0;
  };
  switch (m.mode) {
    case Mode::HighSpeed:
      if (sp < th.v_low) {
        m.below_timer += dt;
        if (m.below_timer >= th.t_low - eps) to(Mode::LowSpeed);
      } else {
        m.below_timer = 0.0;
      }
      break;
    case Mode::LowSpeed:
      if (sp < th.v_rec) {
        m.below_timer += dt;
        if (m.below_timer >= th.t_rec - eps) to(Mode::Braking);
      } else {
        m.below_timer = 0.0;
      }
      if (m.mode == Mode::LowSpeed) {
        if (sp > th.v_resume) {
          m.above_timer += dt;
          if (m.above_timer >= th.t_resume - eps) to(Mode::HighSpeed);
        } else {
          m.above_timer = 0.0;
        }
      }
      break;
    case Mode::Braking:
      m.brake_timer += dt;
      if (m.brake_timer >= th.t_brake - eps) to(Mode::Recovery);
      break;
    case Mode::Recovery:
      if (sp > th.v_rec) {
        m.above_timer += dt;
        if (m.above_timer >= th.t_resume - eps) to(Mode::LowSpeed);
      } else {
        m.above_timer = 0.0;
      }
      break;
  }
  return m;
}

namespace detail {

inline double goal_bearing(const State& s, const Vec2& goal) {
  return wrap_angle(std::atan2(goal.y - s.y, goal.x - s.x) - s.psi);
}

}  // namespace detail

// Best of 9 scan sectors: mean free range, discounted by misalignment with
// the goal bearing. Returns the sector center bearing relative to the robot;
// ties go to the more positive bearing.
inline double best_sector_bearing(const LidarScan& scan, const State& s, const Vec2& goal) {
  constexpr int kSectors = 9;
  const double gb = detail::goal_bearing(s, goal);
  double best_score = -std::numeric_limits<double>::infinity();
  double best_bearing = 0.0;
  for (int sec = 0; sec < kSectors; ++sec) {
    int lo = sec * scan.n_beams / kSectors;
    int hi = (sec + 1) * scan.n_beams / kSectors;
    if (hi <= lo) hi = lo + 1;
    double sum = 0.0;
    for (int i = lo; i < hi && i < scan.n_beams; ++i) sum += scan.ranges[i];
    double mean = sum / (hi - lo);
    double bearing = -scan.fov / 2.0 + (sec + 0.5) * scan.fov / kSectors;
    double score = mean - 0.5 * std::abs(bearing - gb);
    if (score > best_score || (score == best_score && bearing > best_bearing)) {
      best_score = score;
      best_bearing = bearing;
    }
  }
  return best_bearing;
}

// Reverse when the front 60-degree cone is tighter than the robot is long.
inline RecoveryKind choose_recovery(const LidarScan& scan, const RobotSpec& spec) {
  double front_min = scan.max_range;
  for (int i = 0; i < scan.n_beams; ++i) {
    double rel = scan.bearing(i) - scan.pose.psi;
    if (std::abs(rel) <= kPi / 6.0) front_min = std::min(front_min, scan.ranges[i]);
  }
  return front_min < spec.length ? RecoveryKind::Reverse : RecoveryKind::Rotate;
}

inline Control recovery_command(RecoveryKind kind, const State& s, const LidarScan& scan,
                                const Vec2& goal, const RobotSpec& spec) {
  if (kind == RecoveryKind::Reverse) return {-0.2, 0.0};
  double bearing = best_sector_bearing(scan, s, goal);
  double w = bearing >= 0.0 ? spec.omega_max / 2.0 : -spec.omega_max / 2.0;
  return {0.0, w};
}

struct NavsysConfig {
  int steps = 30;
  double horizon = 4.2;
  double p = 1.4;
  int samples_high = 500;
  int samples_low = 800;
  int retain = 10;
  // Sharper than the planners' 0.3: the retained arcs often split between a
  // left and a right swerve, and a soft average of those aims straight at the
  // pinch between them. A small temperature keeps the average glued to the
  // best arc unless the runners-up genuinely tie.
  double lambda = 0.05;
  double sigma_v = 0.15;
  double sigma_omega = 0.4;
  double field_clearance = 2.0;
  double control_dt = 0.05;
  double rotate_done_tol = 0.1;  // radians from the chosen sector
  CostWeights weights;
  ModeThresholds thresholds;
  uint64_t seed = 0;
};

struct NavsysState {
  ModeState mode;
  Rng rng;
  FidelitySchedule sched;
  std::vector<Vec2> canonical;
  GridGeometry geom;
  PlanStats last_stats;
  double rotate_target = 0.0;  // world heading latched when rotation engages

  // scratch
  std::vector<Control> samples;
  std::vector<double> costs;
  std::vector<uint8_t> feasible;
  Trajectory traj;

  NavsysState(const NavsysConfig& cfg, const RobotSpec& spec, const GridGeometry& g)
      : rng(cfg.seed), sched(build_schedule(cfg.steps, cfg.horizon, cfg.p, spec.n_boundary)),
        canonical(footprint_perimeter(spec)), geom(g) {}
};

// The standalone navigator: mode machine wrapped around DDP velocity
// sampling. The obstacle representation is rebuilt from the scan every call,
// so the navigator never touches ground truth.
inline Control ddp_navigate(const State& s, const LidarScan& scan, const Vec2& goal,
                            const NavsysConfig& cfg, const RobotSpec& spec, NavsysState& st) {
  const ModeThresholds& th = cfg.thresholds;
  ModeState next = update_mode(st.mode, s.v, cfg.control_dt, th);
  if (next.mode == Mode::Recovery && st.mode.mode != Mode::Recovery) {
    next.recovery = choose_recovery(scan, spec);
    // Latch the direction chosen at engagement. The per-tick steering keeps
    // chasing the live best sector, but completion against a moving argmax
    // can limit-cycle between two flanking gaps, so reaching either the
    // latched heading or the live best sector counts as done.
    st.rotate_target = wrap_angle(s.psi + best_sector_bearing(scan, s, goal));
  }

  if (next.mode == Mode::Recovery) {
    bool done = next.recovery == RecoveryKind::Rotate &&
                (std::abs(best_sector_bearing(scan, s, goal)) <= cfg.rotate_done_tol ||
                 std::abs(wrap_angle(st.rotate_target - s.psi)) <= cfg.rotate_done_tol);
    if (!done) {
      st.mode = next;
      return recovery_command(next.recovery, s, scan, goal, spec);
    }
    next = ModeState{};
    next.mode = Mode::LowSpeed;
  }
  if (next.mode == Mode::Braking) {
    st.mode = next;
    return {0.0, 0.0};
  }

  const bool low = next.mode == Mode::LowSpeed;
  const double v_cap = (low ? th.low_v_frac : 1.0) * spec.v_max;
  const double w_cap = (low ? th.low_omega_frac : 1.0) * spec.omega_max;
  const int K = low ? cfg.samples_low : cfg.samples_high;

  DistanceField field = scan_field(scan, st.geom, cfg.field_clearance);

  st.samples.resize(K);
  st.costs.resize(K);
  st.feasible.resize(K);
  st.last_stats = {};
  for (int k = 0; k < K; ++k) {
    double v = st.rng.uniform(0.0, v_cap) + cfg.sigma_v * st.rng.normal();
    double w = st.rng.uniform(-w_cap, w_cap) + cfg.sigma_omega * st.rng.normal();
    Control u{clampd(v, 0.0, v_cap), clampd(w, -w_cap, w_cap)};
    st.samples[k] = u;
    rollout(s, std::span<const Control>(&u, 1), st.sched, field, spec, st.canonical, st.traj);
    st.last_stats.point_evals += st.traj.points_checked;
    st.feasible[k] = st.traj.collision ? 0 : 1;
    st.costs[k] = evaluate_cost(st.traj, goal, cfg.weights);
    if (st.feasible[k]) ++st.last_stats.feasible;
  }

  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(K);
  for (int k = 0; k < K; ++k)
    if (st.feasible[k]) ranked.emplace_back(st.costs[k], k);
  st.mode = next;
  if (ranked.empty()) return {0.0, 0.0};  // stall; the mode machine takes over

  size_t keep = std::min<size_t>(cfg.retain, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end());
  ranked.resize(keep);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<double> kept(keep);
  for (size_t r = 0; r < keep; ++r) kept[r] = ranked[r].first;
  std::vector<double> w = softmax_weights(kept, cfg.lambda);

  Control out{0.0, 0.0};
  for (size_t r = 0; r < keep; ++r) {
    const Control& u = st.samples[ranked[r].second];
    out.v += w[r] * u.v;
    out.omega += w[r] * u.omega;
  }
  return out;
}

}  // namespace ddpnav
