#include <catch2/catch_amalgamated.hpp>

#include "ddpnav/mapgen.hpp"
#include "ddpnav/planners.hpp"

using namespace ddpnav;

namespace {

Trajectory straight_line_traj() {
  Trajectory t;
  t.states = {{0, 0, 0, 1, 0}, {0.5, 0, 0, 1, 0}, {1.0, 0, 0, 1, 0}};
  t.deltas = {0.5, 0.5};
  t.clearances = {1.0, 1.0};
  return t;
}

// Annulus of occupied cells around a center: free inside, solid ring, free
// beyond. Tight enough that every footprint pose overlaps the ring.
OccupancyGrid ring_world(double cx, double cy) {
  OccupancyGrid g = make_blank_grid({40, 40, 0.1, {0.0, 0.0}});
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) {
      Vec2 c = g.cell_center(x, y);
      double d = std::hypot(c.x - cx, c.y - cy);
      if (d >= 0.3 && d <= 0.8) g.at(x, y) = 1;
    }
  return g;
}

DistanceField open_field() {
  return compute_distance_field(make_blank_grid({160, 40, 0.1, {0.0, 0.0}}), 2.0);
}

}  // namespace

TEST_CASE("cost reduces to the path term when every other term vanishes") {
  Trajectory t = straight_line_traj();
  CostWeights w;
  REQUIRE(evaluate_cost(t, {1.0, 0.0}, w) == w.w_path * 1.0);
}

TEST_CASE("cost is linear in the terminal goal distance") {
  Trajectory t = straight_line_traj();
  CostWeights w;
  double near = evaluate_cost(t, {2.0, 0.0}, w);
  double far = evaluate_cost(t, {3.0, 0.0}, w);
  REQUIRE(std::abs((far - near) - w.w_goal * 1.0) <= 1e-12);
}

TEST_CASE("cost matches an independent term-by-term recomputation") {
  Rng rng(31);
  CostWeights w;
  w.w_obstacle = 0.7;
  w.obstacle_saturation = 0.5;
  for (int trial = 0; trial < 20; ++trial) {
    Trajectory t;
    int T = 3 + static_cast<int>(rng.uniform01() * 8);
    State s{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-kPi, kPi), 0.4, 0.0};
    t.states.push_back(s);
    for (int i = 0; i < T; ++i) {
      s.x += rng.uniform(-0.3, 0.3);
      s.y += rng.uniform(-0.3, 0.3);
      s.psi = wrap_angle(s.psi + rng.uniform(-0.5, 0.5));
      s.omega = rng.uniform(-1, 1);
      t.states.push_back(s);
      t.clearances.push_back(rng.uniform(0.0, 1.0));
      t.deltas.push_back(0.1);
    }
    Vec2 goal{rng.uniform(-3, 3), rng.uniform(-3, 3)};

    double expect = 0.0;
    const State& last = t.states.back();
    expect += w.w_goal * std::hypot(goal.x - last.x, goal.y - last.y);
    for (double cl : t.clearances)
      expect += w.w_obstacle * std::max(0.0, w.obstacle_saturation - cl) / w.obstacle_saturation;
    for (int i = 0; i < T; ++i)
      expect += w.w_path * std::hypot(t.states[i + 1].x - t.states[i].x,
                                      t.states[i + 1].y - t.states[i].y);
    for (int i = 0; i < T; ++i)
      expect += w.w_smooth * std::abs(t.states[i + 1].omega - t.states[i].omega);
    expect +=
        w.w_heading * std::abs(wrap_angle(std::atan2(goal.y - last.y, goal.x - last.x) - last.psi));

    REQUIRE(std::abs(evaluate_cost(t, goal, w) - expect) <= 1e-12);

    t.collision = true;
    REQUIRE(evaluate_cost(t, goal, w) == Catch::Approx(expect + w.collision_penalty));
  }
}

TEST_CASE("softmax weights normalize, favor low cost, and ignore cost shifts") {
  auto w = softmax_weights({1.0, 3.0, 7.0}, 0.5);
  double sum = 0.0;
  for (double x : w) sum += x;
  REQUIRE(std::abs(sum - 1.0) <= 1e-12);
  REQUIRE(w[0] > w[1]);
  REQUIRE(w[1] > w[2]);

  // Integer shift keeps every (c - cmin) difference bitwise identical.
  REQUIRE(w == softmax_weights({101.0, 103.0, 107.0}, 0.5));

  auto equal = softmax_weights({2.0, 2.0, 2.0, 2.0}, 0.3);
  for (double x : equal) REQUIRE(x == 0.25);

  // Steep temperature pushes everything onto the minimum.
  auto steep = softmax_weights({0.0, 100.0}, 0.01);
  REQUIRE(std::abs(steep[0] - 1.0) <= 1e-6);
  REQUIRE(steep[1] <= 1e-6);

  REQUIRE(softmax_weights({}, 1.0).empty());
  REQUIRE_THROWS_AS(softmax_weights({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("dwa drives straight at a goal dead ahead") {
  DistanceField field = open_field();
  PlannerConfig cfg;
  cfg.kind = PlannerKind::Dwa;
  RobotSpec spec;
  State s{2.0, 2.0, 0.0, 0.0, 0.0};
  Vec2 goal{12.0, 2.0};

  auto u = dwa_plan(s, field, goal, cfg, spec);
  REQUIRE(u.has_value());
  // From rest the window is +-a_max*dt = +-0.125 and +-alpha_max*dt = +-0.16;
  // full forward speed with zero turn wins on the goal and heading terms.
  REQUIRE(u->v == 0.125);
  REQUIRE(u->omega == 0.0);

  auto again = dwa_plan(s, field, goal, cfg, spec);
  REQUIRE(u->v == again->v);
  REQUIRE(u->omega == again->omega);
}

TEST_CASE("dwa agrees with exhaustive enumeration of its sample grid") {
  OccupancyGrid g = generate_environment(21, GenParams{});
  DistanceField field = compute_distance_field(g, 2.0);
  PlannerConfig cfg;
  cfg.kind = PlannerKind::Dwa;
  RobotSpec spec;
  State s{g.start.x, g.start.y, g.start.psi, 0.6, 0.2};

  auto sched = planner_schedule(cfg, spec.n_boundary);
  double v_lo = std::max(spec.v_min, s.v - spec.a_max * cfg.control_dt);
  double v_hi = std::min(spec.v_max, s.v + spec.a_max * cfg.control_dt);
  double w_lo = std::max(-spec.omega_max, s.omega - spec.alpha_max * cfg.control_dt);
  double w_hi = std::min(spec.omega_max, s.omega + spec.alpha_max * cfg.control_dt);

  std::optional<Control> expect;
  double best = 0.0;
  for (int i = 0; i < cfg.dwa_v_samples; ++i)
    for (int j = 0; j < cfg.dwa_omega_samples; ++j) {
      Control u{v_lo + (v_hi - v_lo) * i / (cfg.dwa_v_samples - 1),
                w_lo + (w_hi - w_lo) * j / (cfg.dwa_omega_samples - 1)};
      Trajectory traj = rollout(s, std::span(&u, 1), sched, field, spec);
      if (traj.collision) continue;
      double c = evaluate_cost(traj, g.goal, cfg.weights);
      if (!expect || c < best) {
        expect = u;
        best = c;
      }
    }

  auto got = dwa_plan(s, field, g.goal, cfg, spec);
  REQUIRE(got.has_value() == expect.has_value());
  if (expect) {
    REQUIRE(got->v == expect->v);
    REQUIRE(got->omega == expect->omega);
  }
}

TEST_CASE("dwa reports no feasible trajectory when boxed in") {
  OccupancyGrid g = ring_world(2.0, 2.0);
  DistanceField field = compute_distance_field(g, 2.0);
  PlannerConfig cfg;
  cfg.kind = PlannerKind::Dwa;
  RobotSpec spec;
  PlanStats stats;
  auto u = dwa_plan({2.0, 2.0, 0.0, 0.0, 0.0}, field, {3.5, 2.0}, cfg, spec, &stats);
  REQUIRE(!u.has_value());
  REQUIRE(stats.feasible == 0);

  PlannerConfig bad = cfg;
  bad.dwa_v_samples = 1;
  REQUIRE_THROWS_AS(dwa_plan({}, field, {1, 1}, bad, spec), std::invalid_argument);
}

TEST_CASE("mppi with a single sample returns that sample's first control") {
  DistanceField field = open_field();
  PlannerConfig cfg;
  cfg.kind = PlannerKind::Mppi;
  cfg.samples = 1;
  cfg.steps = 6;
  cfg.horizon = 0.6;
  cfg.seed = 404;
  RobotSpec spec;
  MppiState st(cfg, spec);

  auto u = mppi_plan({2.0, 2.0, 0.0, 0.3, 0.0}, field, {12.0, 2.0}, cfg, spec, st);
  REQUIRE(u.has_value());

  // Replay the generator: per step, v noise then omega noise.
  Rng rng(cfg.seed);
  double v0 = cfg.sigma_v * rng.normal();
  double w0 = cfg.sigma_omega * rng.normal();
  REQUIRE(u->v == clampd(v0, spec.v_min, spec.v_max));
  REQUIRE(u->omega == clampd(w0, -spec.omega_max, spec.omega_max));
}

TEST_CASE("mppi averages equal-cost samples evenly under a flat temperature") {
  DistanceField field = open_field();
  PlannerConfig cfg;
  cfg.kind = PlannerKind::Mppi;
  cfg.samples = 2;
  cfg.retain = 2;
  cfg.steps = 4;
  cfg.horizon = 0.4;
  cfg.lambda = 1e9;  // flattens the weights to 1/2 each
  cfg.seed = 11;
  RobotSpec spec;
  MppiState st(cfg, spec);

  auto u = mppi_plan({2.0, 2.0, 0.0, 0.0, 0.0}, field, {12.0, 2.0}, cfg, spec, st);
  REQUIRE(u.has_value());

  Rng rng(cfg.seed);
  std::vector<Control> first;
  for (int k = 0; k < 2; ++k)
    for (int t = 0; t < cfg.steps; ++t) {
      Control c{cfg.sigma_v * rng.normal(), cfg.sigma_omega * rng.normal()};
      if (t == 0) first.push_back(detail::clamp_control(c, spec));
    }
  REQUIRE(std::abs(u->v - 0.5 * (first[0].v + first[1].v)) <= 1e-9);
  REQUIRE(std::abs(u->omega - 0.5 * (first[0].omega + first[1].omega)) <= 1e-9);
}

TEST_CASE("mppi returns nothing when every sample collides") {
  OccupancyGrid g = ring_world(2.0, 2.0);
  DistanceField field = compute_distance_field(g, 2.0);
  PlannerConfig cfg;
  cfg.kind = PlannerKind::Mppi;
  cfg.samples = 64;
  cfg.steps = 10;
  cfg.horizon = 1.0;
  RobotSpec spec;
  MppiState st(cfg, spec);
  auto u = mppi_plan({2.0, 2.0, 0.0, 0.0, 0.0}, field, {3.5, 2.0}, cfg, spec, st);
  REQUIRE(!u.has_value());
  REQUIRE(st.last_stats.feasible == 0);
}

TEST_CASE("mppi is deterministic in the seed and respects velocity bounds") {
  OccupancyGrid g = generate_environment(5, GenParams{});
  DistanceField field = compute_distance_field(g, 2.0);
  PlannerConfig cfg;
  cfg.kind = PlannerKind::Mppi;
  cfg.samples = 40;
  cfg.steps = 10;
  cfg.horizon = 1.0;
  cfg.seed = 77;
  RobotSpec spec;

  MppiState a(cfg, spec), b(cfg, spec);
  State s{g.start.x, g.start.y, g.start.psi, 0.0, 0.0};
  for (int call = 0; call < 5; ++call) {
    auto ua = mppi_plan(s, field, g.goal, cfg, spec, a);
    auto ub = mppi_plan(s, field, g.goal, cfg, spec, b);
    REQUIRE(ua.has_value() == ub.has_value());
    if (ua) {
      REQUIRE(ua->v == ub->v);
      REQUIRE(ua->omega == ub->omega);
      REQUIRE(ua->v >= spec.v_min);
      REQUIRE(ua->v <= spec.v_max);
      REQUIRE(std::abs(ua->omega) <= spec.omega_max);
    }
  }
}

TEST_CASE("disabling decay is bit-identical to p=1 with full masks") {
  OccupancyGrid g = generate_environment(9, GenParams{});
  DistanceField field = compute_distance_field(g, 2.0);
  RobotSpec spec;

  PlannerConfig off;
  off.kind = PlannerKind::Mppi;
  off.ddp_enabled = false;
  off.samples = 30;
  off.steps = 12;
  off.horizon = 1.2;
  off.seed = 5150;

  PlannerConfig on = off;
  on.ddp_enabled = true;
  on.p = 1.0;
  on.dense_masks = true;

  MppiState st_off(off, spec), st_on(on, spec);
  State s{g.start.x, g.start.y, g.start.psi, 0.0, 0.0};
  for (int call = 0; call < 10; ++call) {
    auto a = mppi_plan(s, field, g.goal, off, spec, st_off);
    auto b = mppi_plan(s, field, g.goal, on, spec, st_on);
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      REQUIRE(a->v == b->v);
      REQUIRE(a->omega == b->omega);
    }
  }
}

TEST_CASE("decay cuts per-call point evaluations below the dense count") {
  DistanceField field = open_field();
  RobotSpec spec;
  PlannerConfig base;
  base.kind = PlannerKind::Mppi;
  base.samples = 20;
  base.steps = 30;
  base.horizon = 2.4;
  base.seed = 2;

  PlannerConfig ddp = base;
  ddp.ddp_enabled = true;
  ddp.p = 1.4;

  State s{2.0, 2.0, 0.0, 0.0, 0.0};
  MppiState st_base(base, spec), st_ddp(ddp, spec);
  mppi_plan(s, field, {12.0, 2.0}, base, spec, st_base);
  mppi_plan(s, field, {12.0, 2.0}, ddp, spec, st_ddp);

  // Open world, no early stops: the counters hit the exact budgets.
  long long dense = static_cast<long long>(base.samples) * base.steps * spec.n_boundary;
  long long decayed = 0;
  for (int t = 0; t < ddp.steps; ++t) decayed += st_ddp.sched.checked_points(t);
  decayed *= ddp.samples;
  REQUIRE(st_base.last_stats.point_evals == dense);
  REQUIRE(st_ddp.last_stats.point_evals == decayed);
  REQUIRE(decayed < dense);
}

TEST_CASE("baseline log-mppi misses obstacles the footprint overlaps") {
  // Wall band the center line clears by 0.2 m but the 0.43 m wide body does
  // not. Zero noise keeps every sample on that line.
  OccupancyGrid g = make_blank_grid({60, 40, 0.1, {0.0, 0.0}});
  for (int x = 0; x < 60; ++x) g.at(x, 22) = 1;  // band y in [2.2, 2.3)
  DistanceField field = compute_distance_field(g, 2.0);

  PlannerConfig cfg;
  cfg.kind = PlannerKind::LogMppi;
  cfg.samples = 4;
  cfg.steps = 8;
  cfg.horizon = 0.8;
  cfg.sigma_v = 0.0;
  cfg.sigma_omega = 0.0;
  cfg.sigma_eta = 0.0;
  RobotSpec spec;
  State s{2.0, 2.0, 0.0, 0.0, 0.0};

  MppiState st(cfg, spec);
  log_mppi_plan(s, field, {5.0, 2.0}, cfg, spec, st);
  REQUIRE(st.last_stats.feasible == cfg.samples);  // flaw: nothing flagged
  for (int k = 0; k < cfg.samples; ++k) REQUIRE(st.costs[k] < cfg.weights.collision_penalty);

  PlannerConfig aug = cfg;
  aug.ddp_enabled = true;
  aug.p = 1.4;
  MppiState st2(aug, spec);
  log_mppi_plan(s, field, {5.0, 2.0}, aug, spec, st2);
  REQUIRE(st2.last_stats.feasible < aug.samples);
  bool charged = false;
  for (int k = 0; k < aug.samples; ++k)
    if (st2.costs[k] >= aug.weights.collision_penalty) charged = true;
  REQUIRE(charged);
}

TEST_CASE("log-mppi averages identical samples to their common control") {
  DistanceField field = open_field();
  PlannerConfig cfg;
  cfg.kind = PlannerKind::LogMppi;
  cfg.samples = 4;
  cfg.steps = 6;
  cfg.horizon = 0.6;
  cfg.sigma_v = 0.0;
  cfg.sigma_omega = 0.0;
  cfg.sigma_eta = 0.0;
  RobotSpec spec;
  MppiState st(cfg, spec);
  std::fill(st.nominal.begin(), st.nominal.end(), Control{0.5, 0.1});

  Control u = log_mppi_plan({2.0, 2.0, 0.0, 0.5, 0.1}, field, {12.0, 2.0}, cfg, spec, st);
  REQUIRE(u.v == 0.5);
  REQUIRE(u.omega == 0.1);
}

TEST_CASE("log-mppi always returns a command, even boxed in") {
  OccupancyGrid g = ring_world(2.0, 2.0);
  DistanceField field = compute_distance_field(g, 2.0);
  PlannerConfig cfg;
  cfg.kind = PlannerKind::LogMppi;
  cfg.ddp_enabled = true;
  cfg.samples = 16;
  cfg.steps = 8;
  cfg.horizon = 0.8;
  RobotSpec spec;
  MppiState st(cfg, spec);
  Control u = log_mppi_plan({2.0, 2.0, 0.0, 0.0, 0.0}, field, {3.5, 2.0}, cfg, spec, st);
  REQUIRE(std::abs(u.v) <= spec.v_max);
  REQUIRE(std::abs(u.omega) <= spec.omega_max);
}

TEST_CASE("without multiplicative noise log-mppi matches mppi in expectation") {
  DistanceField field = open_field();
  RobotSpec spec;
  PlannerConfig mc;
  mc.kind = PlannerKind::Mppi;
  mc.samples = 8;
  mc.steps = 5;
  mc.horizon = 0.5;
  mc.retain = 8;
  PlannerConfig lc = mc;
  lc.kind = PlannerKind::LogMppi;
  lc.sigma_eta = 0.0;

  State s{2.0, 2.0, 0.0, 0.0, 0.0};
  Vec2 goal{12.0, 2.0};
  double sum_m = 0.0, sum_l = 0.0;
  const int trials = 300;
  for (int i = 0; i < trials; ++i) {
    mc.seed = lc.seed = 1000 + i;
    MppiState sm(mc, spec), sl(lc, spec);
    auto um = mppi_plan(s, field, goal, mc, spec, sm);
    Control ul = log_mppi_plan(s, field, goal, lc, spec, sl);
    REQUIRE(um.has_value());
    sum_m += um->v;
    sum_l += ul.v;
  }
  REQUIRE(std::abs(sum_m / trials - sum_l / trials) <= 0.05);
}

TEST_CASE("planner state construction validates sample counts") {
  PlannerConfig cfg;
  RobotSpec spec;
  cfg.samples = 0;
  REQUIRE_THROWS_AS(MppiState(cfg, spec), std::invalid_argument);
  cfg.samples = 10;
  cfg.retain = 0;
  REQUIRE_THROWS_AS(MppiState(cfg, spec), std::invalid_argument);
}
