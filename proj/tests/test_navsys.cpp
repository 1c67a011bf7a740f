#include <catch2/catch_amalgamated.hpp>

#include "ddpnav/mapgen.hpp"
#include "ddpnav/navsys.hpp"

using namespace ddpnav;

namespace {

// Synthetic scan with handpicked ranges. fov = 9 rad makes every sector
// center bearing an exact small integer (-4..4), so score ties are bitwise.
LidarScan nine_sector_scan(double fill, double fov = 9.0) {
  LidarScan s;
  s.pose = {0.0, 0.0, 0.0};
  s.fov = fov;
  s.n_beams = 9;
  s.max_range = 20.0;
  s.ranges.assign(9, fill);
  return s;
}

ModeState run_ticks(ModeState m, double v, int ticks, const ModeThresholds& th) {
  for (int i = 0; i < ticks; ++i) m = update_mode(m, v, 0.05, th);
  return m;
}

}  // namespace

TEST_CASE("sustained slow driving walks down the mode ladder") {
  ModeThresholds th;
  ModeState m;

  m = run_ticks(m, 0.05, 19, th);
  REQUIRE(m.mode == Mode::HighSpeed);  // 0.95 s below v_low: not yet
  m = run_ticks(m, 0.05, 1, th);
  REQUIRE(m.mode == Mode::LowSpeed);  // 1.0 s crossed

  m = run_ticks(m, 0.05, 29, th);
  REQUIRE(m.mode == Mode::LowSpeed);
  m = run_ticks(m, 0.05, 1, th);
  REQUIRE(m.mode == Mode::Braking);  // 1.5 s below v_rec

  m = run_ticks(m, 0.0, 9, th);
  REQUIRE(m.mode == Mode::Braking);
  m = run_ticks(m, 0.0, 1, th);
  REQUIRE(m.mode == Mode::Recovery);  // 0.5 s commanded stop

  m = run_ticks(m, 0.3, 39, th);
  REQUIRE(m.mode == Mode::Recovery);
  m = run_ticks(m, 0.3, 1, th);
  REQUIRE(m.mode == Mode::LowSpeed);  // 2.0 s of regained motion

  m = run_ticks(m, 0.6, 39, th);
  REQUIRE(m.mode == Mode::LowSpeed);
  m = run_ticks(m, 0.6, 1, th);
  REQUIRE(m.mode == Mode::HighSpeed);  // 2.0 s above v_resume
}

TEST_CASE("a burst of speed resets the slowdown countdown") {
  ModeThresholds th;
  ModeState m;
  m = run_ticks(m, 0.05, 15, th);
  m = run_ticks(m, 0.4, 1, th);  // above v_low: timer cleared
  m = run_ticks(m, 0.05, 19, th);
  REQUIRE(m.mode == Mode::HighSpeed);
  m = run_ticks(m, 0.05, 1, th);
  REQUIRE(m.mode == Mode::LowSpeed);
}

TEST_CASE("mid-band speed holds low-speed mode indefinitely") {
  ModeThresholds th;
  ModeState m;
  m.mode = Mode::LowSpeed;
  m = run_ticks(m, 0.3, 200, th);  // between v_rec and v_resume
  REQUIRE(m.mode == Mode::LowSpeed);
  REQUIRE(m.below_timer == 0.0);
  REQUIRE(m.above_timer == 0.0);
}

TEST_CASE("reverse motion counts as motion for leaving recovery") {
  ModeThresholds th;
  ModeState m;
  m.mode = Mode::Recovery;
  m = run_ticks(m, -0.2, 40, th);
  REQUIRE(m.mode == Mode::LowSpeed);
}

TEST_CASE("sector scoring trades free range against goal alignment") {
  LidarScan scan = nine_sector_scan(1.0);
  State s{0, 0, 0, 0, 0};
  Vec2 goal{0.0, 0.0};  // bearing atan2(0,0) = 0

  scan.ranges[6] = 5.0;  // bearing +2: 5 - 0.5*2 = 4 beats 1 - 0 dead ahead
  REQUIRE(best_sector_bearing(scan, s, goal) == 2.0);

  scan.ranges[6] = 1.0;
  scan.ranges[2] = 10.0;  // bearing -2 dominates despite the discount
  REQUIRE(best_sector_bearing(scan, s, goal) == -2.0);
}

TEST_CASE("tied sectors resolve toward the positive bearing") {
  LidarScan scan = nine_sector_scan(1.0);
  scan.ranges[3] = 5.0;  // bearing -1, score 4.5
  scan.ranges[5] = 5.0;  // bearing +1, score 4.5
  REQUIRE(best_sector_bearing(scan, {0, 0, 0, 0, 0}, {0.0, 0.0}) == 1.0);
}

TEST_CASE("recovery reverses only when the front cone is tighter than the body") {
  RobotSpec spec;
  LidarScan scan = nine_sector_scan(5.0);
  // Beam 4 points dead ahead (bearing 0); the others sit outside the
  // 30-degree half cone.
  scan.ranges[4] = 0.4;
  REQUIRE(choose_recovery(scan, spec) == RecoveryKind::Reverse);

  scan.ranges[4] = 0.6;
  scan.ranges[0] = 0.1;  // far outside the cone: ignored
  scan.ranges[8] = 0.1;
  REQUIRE(choose_recovery(scan, spec) == RecoveryKind::Rotate);

  Control u = recovery_command(RecoveryKind::Reverse, {}, scan, {1, 0}, spec);
  REQUIRE(u.v == -0.2);
  REQUIRE(u.omega == 0.0);
}

TEST_CASE("rotate-in-place turns toward the chosen sector") {
  RobotSpec spec;
  State s{0, 0, 0, 0, 0};
  LidarScan left = nine_sector_scan(1.0);
  left.ranges[6] = 8.0;
  Control u = recovery_command(RecoveryKind::Rotate, s, left, {0.0, 0.0}, spec);
  REQUIRE(u.v == 0.0);
  REQUIRE(u.omega == spec.omega_max / 2.0);

  LidarScan right = nine_sector_scan(1.0);
  right.ranges[2] = 8.0;
  u = recovery_command(RecoveryKind::Rotate, s, right, {0.0, 0.0}, spec);
  REQUIRE(u.omega == -spec.omega_max / 2.0);
}

TEST_CASE("open-world navigation commands forward motion within bounds") {
  OccupancyGrid g = make_blank_grid({120, 40, 0.1, {0.0, 0.0}});
  RobotSpec spec;
  NavsysConfig cfg;
  cfg.seed = 99;
  NavsysState st(cfg, spec, g.geometry());
  State s{2.0, 2.0, 0.0, 0.0, 0.0};
  LidarScan scan = simulate_lidar(g, {s.x, s.y, s.psi}, 1.5 * kPi, 121, 10.0);

  Control u = ddp_navigate(s, scan, {10.0, 2.0}, cfg, spec, st);
  REQUIRE(st.mode.mode == Mode::HighSpeed);
  REQUIRE(u.v >= 0.0);
  REQUIRE(u.v <= spec.v_max);
  REQUIRE(std::abs(u.omega) <= spec.omega_max);
  REQUIRE(st.last_stats.feasible > 0);

  // Identical seed and inputs reproduce the command bitwise.
  NavsysState st2(cfg, spec, g.geometry());
  Control u2 = ddp_navigate(s, scan, {10.0, 2.0}, cfg, spec, st2);
  REQUIRE(u.v == u2.v);
  REQUIRE(u.omega == u2.omega);
}

TEST_CASE("low-speed mode caps the commanded velocities") {
  OccupancyGrid g = make_blank_grid({120, 40, 0.1, {0.0, 0.0}});
  RobotSpec spec;
  NavsysConfig cfg;
  cfg.seed = 7;
  NavsysState st(cfg, spec, g.geometry());
  st.mode.mode = Mode::LowSpeed;
  State s{2.0, 2.0, 0.0, 0.3, 0.0};
  LidarScan scan = simulate_lidar(g, {s.x, s.y, s.psi}, 1.5 * kPi, 121, 10.0);

  const ModeThresholds& th = cfg.thresholds;
  for (int i = 0; i < 5; ++i) {
    Control u = ddp_navigate(s, scan, {10.0, 2.0}, cfg, spec, st);
    REQUIRE(st.mode.mode == Mode::LowSpeed);
    REQUIRE(u.v >= 0.0);
    REQUIRE(u.v <= th.low_v_frac * spec.v_max + 1e-12);
    REQUIRE(std::abs(u.omega) <= th.low_omega_frac * spec.omega_max + 1e-12);
  }
}

TEST_CASE("braking mode commands a full stop") {
  OccupancyGrid g = make_blank_grid({120, 40, 0.1, {0.0, 0.0}});
  RobotSpec spec;
  NavsysConfig cfg;
  NavsysState st(cfg, spec, g.geometry());
  st.mode.mode = Mode::LowSpeed;
  st.mode.below_timer = 1.46;  // one 0.05 s tick away from t_rec
  State s{2.0, 2.0, 0.0, 0.0, 0.0};
  LidarScan scan = simulate_lidar(g, {s.x, s.y, s.psi}, 1.5 * kPi, 121, 10.0);

  Control u = ddp_navigate(s, scan, {10.0, 2.0}, cfg, spec, st);
  REQUIRE(st.mode.mode == Mode::Braking);
  REQUIRE(u.v == 0.0);
  REQUIRE(u.omega == 0.0);
}

TEST_CASE("recovery rotates toward open space until aligned, then resumes") {
  RobotSpec spec;
  NavsysConfig cfg;
  GridGeometry geom{80, 80, 0.25, {-10.0, -10.0}};
  State s{0, 0, 0, 0, 0};

  // Entering recovery with space ahead but the best sector off to the left.
  NavsysState st(cfg, spec, geom);
  st.mode.mode = Mode::Braking;
  st.mode.brake_timer = 0.46;
  LidarScan scan = nine_sector_scan(1.0);
  scan.ranges[6] = 8.0;  // bearing +2
  Control u = ddp_navigate(s, scan, {5.0, 0.0}, cfg, spec, st);
  REQUIRE(st.mode.mode == Mode::Recovery);
  REQUIRE(st.mode.recovery == RecoveryKind::Rotate);
  REQUIRE(u.v == 0.0);
  REQUIRE(u.omega == spec.omega_max / 2.0);

  // Same entry with the best sector dead ahead: rotation is already done,
  // so the tick drops to low speed and plans normally.
  NavsysState st2(cfg, spec, geom);
  st2.mode.mode = Mode::Braking;
  st2.mode.brake_timer = 0.46;
  LidarScan open = nine_sector_scan(1.0);
  open.ranges[4] = 8.0;  // bearing 0
  ddp_navigate(s, open, {5.0, 0.0}, cfg, spec, st2);
  REQUIRE(st2.mode.mode == Mode::LowSpeed);

  // Blocked dead ahead at less than a body length: back out instead.
  NavsysState st3(cfg, spec, geom);
  st3.mode.mode = Mode::Braking;
  st3.mode.brake_timer = 0.46;
  LidarScan tight = nine_sector_scan(5.0);
  tight.ranges[4] = 0.3;
  u = ddp_navigate(s, tight, {5.0, 0.0}, cfg, spec, st3);
  REQUIRE(st3.mode.recovery == RecoveryKind::Reverse);
  REQUIRE(u.v == -0.2);
}

TEST_CASE("decayed checking keeps the per-tick point budget below dense") {
  // Large enough that no rollout can leave the grid within the horizon.
  OccupancyGrid g = make_blank_grid({200, 200, 0.1, {0.0, 0.0}});
  RobotSpec spec;
  NavsysConfig cfg;
  NavsysState st(cfg, spec, g.geometry());
  State s{10.0, 10.0, 0.0, 0.0, 0.0};
  LidarScan scan = simulate_lidar(g, {s.x, s.y, s.psi}, 1.5 * kPi, 121, 10.0);

  ddp_navigate(s, scan, {18.0, 10.0}, cfg, spec, st);
  long long per_rollout = 0;
  for (int t = 0; t < cfg.steps; ++t) per_rollout += st.sched.checked_points(t);
  REQUIRE(st.last_stats.point_evals == per_rollout * cfg.samples_high);
  REQUIRE(st.last_stats.point_evals <
          static_cast<long long>(cfg.samples_high) * cfg.steps * spec.n_boundary);
}

TEST_CASE("a fully blocked pocket stalls to a zero command") {
  // Occupy everything except a 3x3 pocket; the footprint cannot fit.
  OccupancyGrid g = make_blank_grid({40, 40, 0.1, {0.0, 0.0}});
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      if (!(x >= 19 && x <= 21 && y >= 19 && y <= 21)) g.at(x, y) = 1;

  RobotSpec spec;
  NavsysConfig cfg;
  cfg.seed = 3;
  NavsysState st(cfg, spec, g.geometry());
  State s{2.05, 2.05, 0.0, 0.0, 0.0};
  LidarScan scan = simulate_lidar(g, {s.x, s.y, s.psi}, 1.5 * kPi, 241, 10.0);

  Control u = ddp_navigate(s, scan, {3.5, 2.05}, cfg, spec, st);
  REQUIRE(st.last_stats.feasible == 0);
  REQUIRE(u.v == 0.0);
  REQUIRE(u.omega == 0.0);
}
