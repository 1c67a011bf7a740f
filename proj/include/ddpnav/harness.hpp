#pragma once

#include <atomic>
#include <bit>
#include <condition_variable>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>

#include "ddpnav/mapgen.hpp"
#include "ddpnav/navsys.hpp"

namespace ddpnav {

enum class Outcome { Success, Collision, Timeout };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Collision: return "collision";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

struct OptimalTime {
  double seconds = 0.0;
  bool over_constrained = false;  // inflation sealed the course; time is uninflated
};

namespace detail {

// 8-connected Dijkstra over unblocked cells; diagonal moves may not cut
// corners. Returns path length in meters, or +inf when disconnected.
inline double grid_shortest_path(const OccupancyGrid& grid, const std::vector<uint8_t>& blocked,
                                 int sx, int sy, int gx, int gy) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int w = grid.width, h = grid.height;
  auto idx = [w](int x, int y) { return static_cast<size_t>(y) * w + x; };
  if (sx < 0 || sx >= w || sy < 0 || sy >= h || gx < 0 || gx >= w || gy < 0 || gy >= h) return kInf;
  if (blocked[idx(sx, sy)] || blocked[idx(gx, gy)]) return kInf;

  std::vector<double> dist(static_cast<size_t>(w) * h, kInf);
  using Node = std::pair<double, size_t>;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> pq;
  dist[idx(sx, sy)] = 0.0;
  pq.emplace(0.0, idx(sx, sy));
  const double straight = grid.resolution;
  const double diagonal = grid.resolution * std::sqrt(2.0);
  const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const size_t goal = idx(gx, gy);

  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d != dist[i]) continue;
    if (i == goal) return d;
    int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    for (int k = 0; k < 8; ++k) {
      int nx = x + dx[k], ny = y + dy[k];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      if (blocked[idx(nx, ny)]) continue;
      if (k >= 4 && (blocked[idx(nx, y)] || blocked[idx(x, ny)])) continue;
      double nd = d + (k >= 4 ? diagonal : straight);
      if (nd < dist[idx(nx, ny)]) {
        dist[idx(nx, ny)] = nd;
        pq.emplace(nd, idx(nx, ny));
      }
    }
  }
  return kInf;
}

}  // namespace detail

// Shortest feasible traversal time: inflate by the inscribed radius, take the
// 8-connected shortest path, divide by top speed. If inflation seals the
// course, fall back to the uninflated grid and say so.
inline OptimalTime optimal_time(const OccupancyGrid& grid, const RobotSpec& spec) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto [sx, sy] = grid.world_to_cell({grid.start.x, grid.start.y});
  auto [gx, gy] = grid.world_to_cell(grid.goal);
  const double r = spec.inscribed_radius();

  DistanceField field = compute_distance_field(grid, r + grid.resolution);
  std::vector<uint8_t> blocked(grid.cells.size());
  for (size_t i = 0; i < blocked.size(); ++i) blocked[i] = field.dist[i] < r ? 1 : 0;

  double len = detail::grid_shortest_path(grid, blocked, sx, sy, gx, gy);
  if (len < kInf) return {len / spec.v_max, false};

  for (size_t i = 0; i < blocked.size(); ++i) blocked[i] = grid.cells[i];
  len = detail::grid_shortest_path(grid, blocked, sx, sy, gx, gy);
  if (len < kInf) return {len / spec.v_max, true};
  return {distance({grid.start.x, grid.start.y}, grid.goal) / spec.v_max, true};
}

// BARN-style episode score. Failures score 0; successes are rewarded for
// closing in on twice the optimal time, floored at eight times it.
inline double score_episode(Outcome outcome, double at, double ot) {
  if (outcome != Outcome::Success) return 0.0;
  double denom = clampd(at, 2.0 * ot, 8.0 * ot);
  return ot / denom;
}

struct ModeTraceSummary {
  int highspeed = 0;
  int lowspeed = 0;
  int braking = 0;
  int recovery = 0;
};

struct EpisodeResult {
  std::string env_id;
  std::string planner;  // base id: dwa | mppi | logmppi | navsys
  bool ddp = false;
  double speed = 0.0;
  int repeat = 0;
  uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  double at = 0.0;       // traversal seconds, success only
  double elapsed = 0.0;  // termination time whatever the outcome
  double ot = 0.0;
  bool ot_over_constrained = false;
  double score = 0.0;
  double path_length = 0.0;
  int no_feasible = 0;  // ticks where the planner had no collision-free sample
  ModeTraceSummary modes;
};

// Uniform episode-facing front for the seven variants.
class PlannerAdapter {
 public:
  virtual ~PlannerAdapter() = default;
  virtual bool wants_scan() const { return false; }
  virtual Control tick(const State& s, const LidarScan* scan, const DistanceField& truth,
                       const Vec2& goal) = 0;
  virtual const char* mode() const { return "-"; }
  virtual const ModeState* mode_state() const { return nullptr; }

  int no_feasible = 0;
};

namespace detail {

class DwaAdapter : public PlannerAdapter {
 public:
  DwaAdapter(const PlannerConfig& cfg, const RobotSpec& spec, const GridGeometry& geom)
      : cfg_(cfg), spec_(spec), geom_(geom) {}
  bool wants_scan() const override { return cfg_.use_scan_field; }
  Control tick(const State& s, const LidarScan* scan, const DistanceField& truth,
               const Vec2& goal) override {
    const DistanceField* field = &truth;
    DistanceField transient;
    if (cfg_.use_scan_field) {
      transient = scan_field(*scan, geom_, cfg_.field_clearance);
      field = &transient;
    }
    auto u = dwa_plan(s, *field, goal, cfg_, spec_);
    if (!u) {
      ++no_feasible;
      return {0.0, 0.0};
    }
    return *u;
  }

 private:
  PlannerConfig cfg_;
  RobotSpec spec_;
  GridGeometry geom_;
};

class MppiAdapter : public PlannerAdapter {
 public:
  MppiAdapter(const PlannerConfig& cfg, const RobotSpec& spec, const GridGeometry& geom)
      : cfg_(cfg), spec_(spec), geom_(geom), st_(cfg, spec) {}
  bool wants_scan() const override { return cfg_.use_scan_field; }
  Control tick(const State& s, const LidarScan* scan, const DistanceField& truth,
               const Vec2& goal) override {
    const DistanceField* field = &truth;
    DistanceField transient;
    if (cfg_.use_scan_field) {
      transient = scan_field(*scan, geom_, cfg_.field_clearance);
      field = &transient;
    }
    if (cfg_.kind == PlannerKind::LogMppi) return log_mppi_plan(s, *field, goal, cfg_, spec_, st_);
    auto u = mppi_plan(s, *field, goal, cfg_, spec_, st_);
    if (!u) {
      ++no_feasible;
      return {0.0, 0.0};
    }
    return *u;
  }

 private:
  PlannerConfig cfg_;
  RobotSpec spec_;
  GridGeometry geom_;
  MppiState st_;
};

class NavsysAdapter : public PlannerAdapter {
 public:
  NavsysAdapter(const NavsysConfig& cfg, const RobotSpec& spec, const GridGeometry& geom)
      : cfg_(cfg), spec_(spec), st_(cfg, spec, geom) {}
  bool wants_scan() const override { return true; }
  Control tick(const State& s, const LidarScan* scan, const DistanceField&,
               const Vec2& goal) override {
    return ddp_navigate(s, *scan, goal, cfg_, spec_, st_);
  }
  const char* mode() const override { return mode_name(st_.mode.mode, st_.mode.recovery); }
  const ModeState* mode_state() const override { return &st_.mode; }

 private:
  NavsysConfig cfg_;
  RobotSpec spec_;
  NavsysState st_;
};

inline std::string fmt_fixed(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

}  // namespace detail

// One benchmark column: a planner variant with everything resolved except the
// per-episode seed.
struct VariantConfig {
  std::string planner;  // dwa | mppi | logmppi | navsys
  bool ddp = false;
  bool is_navsys = false;
  PlannerConfig planner_cfg;
  NavsysConfig navsys_cfg;

  std::string display_name() const {
    if (is_navsys) return planner;
    return ddp ? planner + "-ddp" : planner;
  }
};

inline std::unique_ptr<PlannerAdapter> make_adapter(const VariantConfig& var, const RobotSpec& spec,
                                                    const GridGeometry& geom, uint64_t seed) {
  if (var.is_navsys) {
    NavsysConfig cfg = var.navsys_cfg;
    cfg.seed = seed;
    return std::make_unique<detail::NavsysAdapter>(cfg, spec, geom);
  }
  PlannerConfig cfg = var.planner_cfg;
  cfg.seed = seed;
  if (var.planner == "dwa") return std::make_unique<detail::DwaAdapter>(cfg, spec, geom);
  return std::make_unique<detail::MppiAdapter>(cfg, spec, geom);
}

struct EpisodeOptions {
  double rate = 20.0;
  double max_time = 50.0;
  double goal_tolerance = 0.5;
  double field_clearance = 2.0;
  double lidar_fov = 3.0 * kPi / 2.0;
  int lidar_beams = 241;
  double lidar_range = 10.0;
  std::ostream* trace = nullptr;
};

// Closed-loop episode: plan, step the true dynamics, judge against ground
// truth (every perimeter point plus the four corners), repeat at the control
// rate until the goal, a contact, or the time limit.
inline EpisodeResult run_episode(const OccupancyGrid& grid, PlannerAdapter& planner,
                                 const RobotSpec& spec, const EpisodeOptions& opt) {
  EpisodeResult res;
  const double dt = 1.0 / opt.rate;
  const long max_ticks = std::lround(opt.max_time * opt.rate);

  DistanceField truth = compute_distance_field(grid, opt.field_clearance);
  auto canonical = footprint_perimeter(spec);
  auto corners = footprint_corners(spec);

  OptimalTime ot = optimal_time(grid, spec);
  res.ot = ot.seconds;
  res.ot_over_constrained = ot.over_constrained;

  if (opt.trace) *opt.trace << "t,x,y,psi,v,omega,mode\n";

  State st{grid.start.x, grid.start.y, grid.start.psi, 0.0, 0.0};
  LidarScan scan;
  res.outcome = Outcome::Timeout;
  for (long tick = 0; tick < max_ticks; ++tick) {
    if (planner.wants_scan())
      scan = simulate_lidar(grid, {st.x, st.y, st.psi}, opt.lidar_fov, opt.lidar_beams,
                            opt.lidar_range);
    Control u = planner.tick(st, planner.wants_scan() ? &scan : nullptr, truth, grid.goal);

    State prev = st;
    st = step_unicycle(st, u, dt, spec);
    res.path_length += distance({st.x, st.y}, {prev.x, prev.y});
    double t_now = (tick + 1) / opt.rate;

    if (const ModeState* m = planner.mode_state()) {
      switch (m->mode) {
        case Mode::HighSpeed: ++res.modes.highspeed; break;
        case Mode::LowSpeed: ++res.modes.lowspeed; break;
        case Mode::Braking: ++res.modes.braking; break;
        case Mode::Recovery: ++res.modes.recovery; break;
      }
    }
    if (opt.trace) {
      *opt.trace << detail::fmt_fixed(t_now, 2) << ',' << detail::fmt_fixed(st.x, 6) << ','
                 << detail::fmt_fixed(st.y, 6) << ',' << detail::fmt_fixed(st.psi, 6) << ','
                 << detail::fmt_fixed(st.v, 6) << ',' << detail::fmt_fixed(st.omega, 6) << ','
                 << planner.mode() << '\n';
    }

    bool hit = false;
    {
      Pose2 pose{st.x, st.y, st.psi};
      for (const Vec2& c : corners) {
        if (grid.occupied_world(body_to_world(pose, c))) {
          hit = true;
          break;
        }
      }
      if (!hit)
        for (const Vec2& b : canonical) {
          if (grid.occupied_world(body_to_world(pose, b))) {
            hit = true;
            break;
          }
        }
    }
    if (hit) {
      res.outcome = Outcome::Collision;
      res.elapsed = t_now;
      break;
    }
    if (distance({st.x, st.y}, grid.goal) < opt.goal_tolerance) {
      res.outcome = Outcome::Success;
      res.at = t_now;
      res.elapsed = t_now;
      break;
    }
    res.elapsed = t_now;
  }
  res.no_feasible = planner.no_feasible;
  res.score = score_episode(res.outcome, res.at, res.ot);
  return res;
}

inline constexpr const char* kResultsCsvHeader = "env_id,planner,ddp,speed,repeat,outcome,AT,OT,score,path_length";

inline void write_result_row(std::ostream& os, const EpisodeResult& r) {
  os << r.env_id << ',' << r.planner << ',' << (r.ddp ? 1 : 0) << ','
     << detail::format_double(r.speed) << ',' << r.repeat << ',' << outcome_name(r.outcome) << ',';
  if (r.outcome == Outcome::Success) os << detail::fmt_fixed(r.at, 4);
  os << ',' << detail::fmt_fixed(r.ot, 4) << ',' << detail::fmt_fixed(r.score, 4) << ','
     << detail::fmt_fixed(r.path_length, 4) << '\n';
}

struct BenchmarkCell {
  std::string planner;
  bool ddp = false;
  double speed = 0.0;
  int episodes = 0;
  double success_pct = 0.0;
  double collision_pct = 0.0;
  double timeout_pct = 0.0;
  double avg_time_success = 0.0;  // mean AT over successful episodes
  double avg_time_all = 0.0;      // mean termination time over every episode
  double avg_score = 0.0;
};

struct BenchmarkResults {
  std::vector<EpisodeResult> episodes;
  std::vector<BenchmarkCell> cells;
};

struct BenchmarkSpec {
  std::vector<std::pair<std::string, OccupancyGrid>> envs;  // sorted by id internally
  std::vector<VariantConfig> variants;
  std::vector<double> speeds;
  int repeats = 3;
  uint64_t seed = 0;
  int threads = 1;
  EpisodeOptions episode;
};

inline uint64_t episode_seed(uint64_t master, const std::string& env_id,
                             const std::string& variant, double speed, int repeat) {
  uint64_t h = mix_seed(master, hash_string(env_id));
  h = mix_seed(h, hash_string(variant));
  h = mix_seed(h, std::bit_cast<uint64_t>(speed));
  return mix_seed(h, static_cast<uint64_t>(repeat));
}

// Full cross product env x variant x speed x repeat. Episodes may run on a
// small pool; rows stream to `csv` in canonical order regardless of which
// worker finishes first, so identical seeds give byte-identical output.
inline BenchmarkResults run_benchmark(const BenchmarkSpec& spec_in, const RobotSpec& robot,
                                      std::ostream* csv,
                                      std::function<void(size_t, size_t)> progress = {}) {
  BenchmarkSpec spec = spec_in;  // local copy so envs can be sorted
  std::sort(spec.envs.begin(), spec.envs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  struct Job {
    size_t env_i, var_i, speed_i;
    int repeat;
  };
  std::vector<Job> jobs;
  for (size_t e = 0; e < spec.envs.size(); ++e)
    for (size_t v = 0; v < spec.variants.size(); ++v)
      for (size_t sp = 0; sp < spec.speeds.size(); ++sp)
        for (int r = 0; r < spec.repeats; ++r) jobs.push_back({e, v, sp, r});

  BenchmarkResults out;
  out.episodes.resize(jobs.size());
  std::vector<uint8_t> done(jobs.size(), 0);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<size_t> next{0};

  auto run_job = [&](size_t j) {
    const Job& job = jobs[j];
    const auto& [env_id, grid] = spec.envs[job.env_i];
    const VariantConfig& var = spec.variants[job.var_i];
    double speed = spec.speeds[job.speed_i];

    RobotSpec rs = robot;
    rs.v_max = speed;
    uint64_t seed = episode_seed(spec.seed, env_id, var.display_name(), speed, job.repeat);
    auto adapter = make_adapter(var, rs, grid.geometry(), seed);
    EpisodeResult res = run_episode(grid, *adapter, rs, spec.episode);
    res.env_id = env_id;
    res.planner = var.planner;
    res.ddp = var.is_navsys ? true : var.ddp;
    res.speed = speed;
    res.repeat = job.repeat;
    res.seed = seed;

    std::lock_guard<std::mutex> lk(mu);
    out.episodes[j] = std::move(res);
    done[j] = 1;
    cv.notify_all();
  };

  int n_threads = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(jobs.size())));

  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back([&]() {
      while (true) {
        size_t j = next.fetch_add(1);
        if (j >= jobs.size()) return;
        run_job(j);
      }
    });

  if (csv) *csv << kResultsCsvHeader << '\n';
  {
    std::unique_lock<std::mutex> lk(mu);
    for (size_t j = 0; j < jobs.size(); ++j) {
      cv.wait(lk, [&]() { return done[j] != 0; });
      if (csv) write_result_row(*csv, out.episodes[j]);
      if (progress) progress(j + 1, jobs.size());
    }
  }
  for (auto& t : pool) t.join();

  // Aggregate per (variant, speed) in declaration order.
  for (const auto& var : spec.variants) {
    for (double speed : spec.speeds) {
      BenchmarkCell cell;
      cell.planner = var.display_name();
      cell.ddp = var.is_navsys ? true : var.ddp;
      cell.speed = speed;
      int succ = 0, coll = 0, tout = 0;
      double at_sum = 0.0, all_sum = 0.0, score_sum = 0.0;
      for (const auto& r : out.episodes) {
        if (r.planner != var.planner || r.ddp != cell.ddp || r.speed != speed) continue;
        ++cell.episodes;
        all_sum += r.elapsed;
        score_sum += r.score;
        if (r.outcome == Outcome::Success) {
          ++succ;
          at_sum += r.at;
        } else if (r.outcome == Outcome::Collision) {
          ++coll;
        } else {
          ++tout;
        }
      }
      if (cell.episodes == 0) continue;
      cell.success_pct = 100.0 * succ / cell.episodes;
      cell.collision_pct = 100.0 * coll / cell.episodes;
      cell.timeout_pct = 100.0 * tout / cell.episodes;
      cell.avg_time_success = succ > 0 ? at_sum / succ : 0.0;
      cell.avg_time_all = all_sum / cell.episodes;
      cell.avg_score = score_sum / cell.episodes;
      out.cells.push_back(cell);
    }
  }
  return out;
}

// Environments ranked easiest-last: ascending mean score across every episode
// that ran on them, ties broken by id. Returns the k hardest ids.
inline std::vector<std::string> hardest_subset(const BenchmarkResults& results, int k) {
  struct Acc {
    double sum = 0.0;
    int n = 0;
  };
  std::vector<std::pair<std::string, Acc>> acc;
  for (const auto& r : results.episodes) {
    auto it = std::find_if(acc.begin(), acc.end(),
                           [&](const auto& a) { return a.first == r.env_id; });
    if (it == acc.end()) {
      acc.push_back({r.env_id, {r.score, 1}});
    } else {
      it->second.sum += r.score;
      ++it->second.n;
    }
  }
  std::sort(acc.begin(), acc.end(), [](const auto& a, const auto& b) {
    double ma = a.second.sum / a.second.n, mb = b.second.sum / b.second.n;
    if (ma != mb) return ma < mb;
    return a.first < b.first;
  });
  if (k < 0) k = 0;
  if (k > static_cast<int>(acc.size())) k = static_cast<int>(acc.size());
  std::vector<std::string> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(acc[i].first);
  return out;
}

}  // namespace ddpnav
