#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "ddpnav/config.hpp"

namespace ddpnav {

// Exit codes: 0/1/2 mirror the episode outcome (success/collision/timeout),
// 64 is a usage or input problem, 70 an internal failure.
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& tok : split_list(s)) {
    size_t pos = 0;
    double d = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("bad number '" + tok + "'");
    out.push_back(d);
  }
  return out;
}

inline std::string env_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

}  // namespace detail

// DDP_NAV_THREADS caps benchmark workers; 0 or unset means one per core.
inline int resolve_threads() {
  const char* raw = std::getenv("DDP_NAV_THREADS");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 0) return 0;
  return static_cast<int>(v);
}

inline std::vector<std::pair<std::string, OccupancyGrid>> load_env_dir(const std::string& dir) {
  std::vector<std::pair<std::string, OccupancyGrid>> envs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    try {
      envs.emplace_back(entry.path().stem().string(), load_environment(entry.path().string()));
    } catch (const EnvParseError& e) {
      throw std::runtime_error(entry.path().string() + ": " + e.what());
    }
  }
  std::sort(envs.begin(), envs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return envs;
}

struct GenEnvsArgs {
  std::string out_dir;
  int count = 50;
  std::optional<uint64_t> seed;  // defaults to the config seed
};

inline int cmd_gen_envs(const RunConfig& rc, const GenEnvsArgs& args, std::ostream& out,
                        std::ostream& err) {
  if (args.count < 0) {
    err << "error: --count must be nonnegative\n";
    return kExitUsage;
  }
  uint64_t master = args.seed.value_or(rc.seed);
  try {
    std::filesystem::create_directories(args.out_dir);
    for (int i = 0; i < args.count; ++i) {
      OccupancyGrid grid = generate_environment(mix_seed(master, static_cast<uint64_t>(i)), rc.world);
      char name[32];
      std::snprintf(name, sizeof(name), "env_%03d.txt", i);
      save_environment((std::filesystem::path(args.out_dir) / name).string(), grid);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  out << "wrote " << args.count << " environments to " << args.out_dir << "\n";
  return 0;
}

struct RunArgs {
  std::string env_file;
  std::string planner = "navsys";
  double speed = 0.0;  // 0 keeps the config robot's v_max
  int repeat = 0;
  std::string trace_path;
};

inline int cmd_run(const RunConfig& rc, const RunArgs& args, std::ostream& out, std::ostream& err) {
  OccupancyGrid grid;
  try {
    grid = load_environment(args.env_file);
  } catch (const EnvParseError& e) {
    err << "error: " << args.env_file << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  VariantConfig var;
  try {
    var = make_variant(rc, args.planner);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  RobotSpec spec = rc.robot;
  if (args.speed > 0.0) spec.v_max = args.speed;

  std::ofstream trace_file;
  EpisodeOptions opt = episode_options(rc);
  if (!args.trace_path.empty()) {
    trace_file.open(args.trace_path, std::ios::binary);
    if (!trace_file) {
      err << "error: cannot open trace file '" << args.trace_path << "'\n";
      return kExitUsage;
    }
    opt.trace = &trace_file;
  }

  std::string env_id = detail::env_stem(args.env_file);
  uint64_t seed = episode_seed(rc.seed, env_id, var.display_name(), spec.v_max, args.repeat);

  try {
    auto adapter = make_adapter(var, spec, grid.geometry(), seed);
    EpisodeResult res = run_episode(grid, *adapter, spec, opt);
    res.env_id = env_id;
    res.planner = var.planner;
    res.ddp = var.is_navsys ? true : var.ddp;
    res.speed = spec.v_max;
    res.repeat = args.repeat;
    write_result_row(out, res);
    switch (res.outcome) {
      case Outcome::Success: return 0;
      case Outcome::Collision: return 1;
      case Outcome::Timeout: return 2;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

inline void print_benchmark_table(const BenchmarkResults& results, std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %6s %5s %8s %8s %8s %9s %9s %8s\n", "planner", "speed",
                "n", "succ%", "coll%", "tout%", "at_succ", "at_all", "score");
  out << buf;
  for (const auto& c : results.cells) {
    std::snprintf(buf, sizeof(buf), "%-12s %6.2f %5d %8.2f %8.2f %8.2f %9.3f %9.3f %8.4f\n",
                  c.planner.c_str(), c.speed, c.episodes, c.success_pct, c.collision_pct,
                  c.timeout_pct, c.avg_time_success, c.avg_time_all, c.avg_score);
    out << buf;
  }
}

struct BenchArgs {
  std::string env_dir;
  std::vector<std::string> planners;  // empty means all seven variants
  std::vector<double> speeds;         // empty means the config robot's v_max
  int repeats = 0;                    // 0 means the config value
  std::string out_csv;
  bool progress = false;
};

inline int cmd_bench(const RunConfig& rc, const BenchArgs& args, std::ostream& out,
                     std::ostream& err) {
  BenchmarkSpec spec;
  try {
    spec.envs = load_env_dir(args.env_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (spec.envs.empty()) {
    err << "error: no .txt environments in " << args.env_dir << "\n";
    return kExitUsage;
  }

  std::vector<std::string> names = args.planners;
  if (names.empty() || (names.size() == 1 && names[0] == "all")) names = variant_names();
  try {
    for (const std::string& n : names) spec.variants.push_back(make_variant(rc, n));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  spec.speeds = args.speeds.empty() ? std::vector<double>{rc.robot.v_max} : args.speeds;
  spec.repeats = args.repeats > 0 ? args.repeats : rc.repeats;
  spec.seed = rc.seed;
  spec.threads = resolve_threads();
  spec.episode = episode_options(rc);

  std::ofstream csv_file;
  std::ostream* csv = nullptr;
  if (!args.out_csv.empty()) {
    csv_file.open(args.out_csv, std::ios::binary);
    if (!csv_file) {
      err << "error: cannot open output csv '" << args.out_csv << "'\n";
      return kExitUsage;
    }
    csv = &csv_file;
  }

  std::function<void(size_t, size_t)> progress;
  if (args.progress)
    progress = [&err](size_t done, size_t total) {
      if (done % 50 == 0 || done == total)
        err << "\r" << done << "/" << total << " episodes" << (done == total ? "\n" : "") << std::flush;
    };

  try {
    BenchmarkResults results = run_benchmark(spec, rc.robot, csv, progress);
    print_benchmark_table(results, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}

struct SweepPArgs {
  std::string env_dir;
  std::vector<double> p_values = {1.2, 1.4, 1.7, 2.0};
  std::vector<double> speeds;
  int repeats = 0;
};

// Same navigator, same seeds, only the decay exponent changes between rows.
inline int cmd_sweep_p(const RunConfig& rc, const SweepPArgs& args, std::ostream& out,
                       std::ostream& err) {
  std::vector<std::pair<std::string, OccupancyGrid>> envs;
  try {
    envs = load_env_dir(args.env_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (envs.empty()) {
    err << "error: no .txt environments in " << args.env_dir << "\n";
    return kExitUsage;
  }
  if (args.p_values.empty()) {
    err << "error: --p-values list is empty\n";
    return kExitUsage;
  }

  char buf[120];
  std::snprintf(buf, sizeof(buf), "%-6s %5s %8s %8s %8s %8s\n", "p", "n", "succ%", "coll%",
                "tout%", "score");
  out << buf;
  for (double p : args.p_values) {
    RunConfig rcp = rc;
    rcp.navsys.p = p;
    BenchmarkSpec spec;
    spec.envs = envs;
    try {
      spec.variants = {make_variant(rcp, "navsys")};
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    spec.speeds = args.speeds.empty() ? std::vector<double>{rc.robot.v_max} : args.speeds;
    spec.repeats = args.repeats > 0 ? args.repeats : rc.repeats;
    spec.seed = rc.seed;
    spec.threads = resolve_threads();
    spec.episode = episode_options(rcp);
    try {
      BenchmarkResults results = run_benchmark(spec, rcp.robot, nullptr);
      const BenchmarkCell& c = results.cells.at(0);
      std::snprintf(buf, sizeof(buf), "%-6.2f %5d %8.2f %8.2f %8.2f %8.4f\n", p, c.episodes,
                    c.success_pct, c.collision_pct, c.timeout_pct, c.avg_score);
      out << buf;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitInternal;
    }
  }
  return 0;
}

}  // namespace ddpnav
