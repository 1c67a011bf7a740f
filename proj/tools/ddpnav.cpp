#include <CLI11.hpp>

#include "ddpnav/ddpnav.hpp"

using namespace ddpnav;

int main(int argc, char** argv) {
  CLI::App app{"DDP navigation: environment generation, episodes, benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "config file (key = value sections)");

  GenEnvsArgs gen;
  uint64_t gen_seed = 0;
  CLI::App* gen_cmd = app.add_subcommand("gen-envs", "generate an environment suite");
  gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();
  gen_cmd->add_option("--count", gen.count, "number of environments");
  CLI::Option* gen_seed_opt = gen_cmd->add_option("--seed", gen_seed, "master seed");

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "run one episode");
  run_cmd->add_option("env_file", run.env_file, "environment file")->required();
  run_cmd->add_option("--planner", run.planner, "dwa|dwa-ddp|mppi|mppi-ddp|logmppi|logmppi-ddp|navsys");
  run_cmd->add_option("--speed", run.speed, "max speed override [m/s]");
  run_cmd->add_option("--repeat", run.repeat, "repeat index (varies the seed)");
  run_cmd->add_option("--trace", run.trace_path, "write a state trace CSV here");

  BenchArgs bench;
  std::string bench_planners, bench_speeds;
  CLI::App* bench_cmd = app.add_subcommand("bench", "benchmark planners over an environment suite");
  bench_cmd->add_option("env_dir", bench.env_dir, "directory of environment files")->required();
  bench_cmd->add_option("--planners", bench_planners, "comma list of variants, or 'all'");
  bench_cmd->add_option("--speeds", bench_speeds, "comma list of max speeds [m/s]");
  bench_cmd->add_option("--repeats", bench.repeats, "repeats per cell");
  bench_cmd->add_option("--out", bench.out_csv, "write per-episode results CSV here");
  bench_cmd->add_flag("--progress", bench.progress, "report progress on stderr");

  SweepPArgs sweep;
  std::string sweep_ps, sweep_speeds;
  CLI::App* sweep_cmd = app.add_subcommand("sweep-p", "navigator success vs decay exponent");
  sweep_cmd->add_option("env_dir", sweep.env_dir, "directory of environment files")->required();
  sweep_cmd->add_option("--p-values", sweep_ps, "comma list of decay exponents");
  sweep_cmd->add_option("--speeds", sweep_speeds, "comma list of max speeds [m/s]");
  sweep_cmd->add_option("--repeats", sweep.repeats, "repeats per cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  RunConfig rc;
  if (!config_path.empty()) {
    try {
      rc = load_config(config_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }

  try {
    if (gen_cmd->parsed()) {
      if (gen_seed_opt->count() > 0) gen.seed = gen_seed;
      return cmd_gen_envs(rc, gen, std::cout, std::cerr);
    }
    if (run_cmd->parsed()) return cmd_run(rc, run, std::cout, std::cerr);
    if (bench_cmd->parsed()) {
      if (!bench_planners.empty()) bench.planners = detail::split_list(bench_planners);
      if (!bench_speeds.empty()) bench.speeds = detail::parse_double_list(bench_speeds);
      return cmd_bench(rc, bench, std::cout, std::cerr);
    }
    if (sweep_cmd->parsed()) {
      if (!sweep_ps.empty()) sweep.p_values = detail::parse_double_list(sweep_ps);
      if (!sweep_speeds.empty()) sweep.speeds = detail::parse_double_list(sweep_speeds);
      return cmd_sweep_p(rc, sweep, std::cout, std::cerr);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
