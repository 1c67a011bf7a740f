#pragma once

#include <functional>
#include <map>

#include "ddpnav/harness.hpp"

namespace ddpnav {

// Per-planner knobs as they appear in the config file. `horizon` is the
// baseline lookahead; the DDP-augmented variant uses `ddp_horizon` with `p`.
struct PlannerSection {
  int steps = 30;
  double horizon = 2.4;
  double ddp_horizon = 4.2;
  double p = 1.4;
  int samples = 300;
  int retain = 10;
  double lambda = 0.3;
  double sigma_v = 0.25;
  double sigma_omega = 0.6;
  double sigma_eta = 0.15;
  int v_samples = 11;
  int omega_samples = 21;
  bool scan_field = false;
  CostWeights weights;
};

struct RunConfig {
  RobotSpec robot;
  double lidar_fov = 3.0 * kPi / 2.0;
  int lidar_beams = 241;
  double lidar_range = 10.0;
  GenParams world;
  double rate = 20.0;
  double max_time = 50.0;
  double goal_tolerance = 0.5;
  double field_clearance = 2.0;
  uint64_t seed = 1234;
  int repeats = 3;
  PlannerSection dwa;
  PlannerSection mppi;
  PlannerSection logmppi;
  NavsysConfig navsys;
  ModeThresholds modes;

  RunConfig() {
    // Log-MPPI's published cost only knows obstacles as a binary hit, so the
    // graded clearance term is off for it.
    logmppi.weights.w_obstacle = 0.0;
    logmppi.sigma_v = 0.25;
    logmppi.sigma_omega = 0.6;
    // DWA commits to the single cheapest arc, so an aggressively extended
    // horizon lures it into channels whose far end the thinned-out checks
    // cannot vet, and it cannot blend its way back out the way the sampling
    // planners do. A dense step grid with a slim extension keeps the
    // under-checked tail short enough that replanning can still retract.
    dwa.steps = 72;
    dwa.ddp_horizon = 2.6;
    // The navigator keeps a wider comfort band than the bare planners but a
    // gentle slope: caution comes from the mode machine and the larger
    // low-speed sample count, not from pricing every corridor transit off the
    // table (a steep obstacle term makes standing still beat any approach arc
    // and the navigator crawls). Goal pull stays moderate for the same reason
    // in reverse: a greedy navigator outruns its own comfort band.
    navsys.weights.w_goal = 3.0;
    navsys.weights.w_obstacle = 0.9;
    navsys.weights.obstacle_saturation = 0.45;
  }
};

struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_, const std::string& msg)
      : std::runtime_error("config line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

namespace detail {

inline double cfg_parse_double(const std::string& v, int line) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + v + "'");
  }
}

inline int cfg_parse_int(const std::string& v, int line) {
  try {
    size_t pos = 0;
    int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return i;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an integer, got '" + v + "'");
  }
}

inline uint64_t cfg_parse_u64(const std::string& v, int line) {
  try {
    size_t pos = 0;
    unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return u;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an unsigned integer, got '" + v + "'");
  }
}

inline bool cfg_parse_bool(const std::string& v, int line) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError(line, "expected 0/1/true/false, got '" + v + "'");
}

struct ConfigKey {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, int)> set;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    auto D = [&k](const char* sec, const char* key, std::function<double&(RunConfig&)> ref) {
      k.push_back({sec, key,
                   [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
                   [ref](RunConfig& c, const std::string& v, int ln) { ref(c) = cfg_parse_double(v, ln); }});
    };
    auto I = [&k](const char* sec, const char* key, std::function<int&(RunConfig&)> ref) {
      k.push_back({sec, key,
                   [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
                   [ref](RunConfig& c, const std::string& v, int ln) { ref(c) = cfg_parse_int(v, ln); }});
    };
    auto U = [&k](const char* sec, const char* key, std::function<uint64_t&(RunConfig&)> ref) {
      k.push_back({sec, key,
                   [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
                   [ref](RunConfig& c, const std::string& v, int ln) { ref(c) = cfg_parse_u64(v, ln); }});
    };
    auto B = [&k](const char* sec, const char* key, std::function<bool&(RunConfig&)> ref) {
      k.push_back({sec, key,
                   [ref](const RunConfig& c) { return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false"); },
                   [ref](RunConfig& c, const std::string& v, int ln) { ref(c) = cfg_parse_bool(v, ln); }});
    };

    D("robot", "length", [](RunConfig& c) -> double& { return c.robot.length; });
    D("robot", "width", [](RunConfig& c) -> double& { return c.robot.width; });
    D("robot", "v_max", [](RunConfig& c) -> double& { return c.robot.v_max; });
    D("robot", "v_min", [](RunConfig& c) -> double& { return c.robot.v_min; });
    D("robot", "omega_max", [](RunConfig& c) -> double& { return c.robot.omega_max; });
    D("robot", "a_max", [](RunConfig& c) -> double& { return c.robot.a_max; });
    D("robot", "alpha_max", [](RunConfig& c) -> double& { return c.robot.alpha_max; });
    I("robot", "boundary_points", [](RunConfig& c) -> int& { return c.robot.n_boundary; });

    D("lidar", "fov", [](RunConfig& c) -> double& { return c.lidar_fov; });
    I("lidar", "beams", [](RunConfig& c) -> int& { return c.lidar_beams; });
    D("lidar", "max_range", [](RunConfig& c) -> double& { return c.lidar_range; });

    I("world", "width", [](RunConfig& c) -> int& { return c.world.width; });
    I("world", "height", [](RunConfig& c) -> int& { return c.world.height; });
    D("world", "resolution", [](RunConfig& c) -> double& { return c.world.resolution; });
    D("world", "fill_prob", [](RunConfig& c) -> double& { return c.world.fill_prob; });
    I("world", "smooth_iters", [](RunConfig& c) -> int& { return c.world.smooth_iters; });
    I("world", "corridor_half_width", [](RunConfig& c) -> int& { return c.world.corridor_half_width; });

    D("harness", "rate", [](RunConfig& c) -> double& { return c.rate; });
    D("harness", "max_time", [](RunConfig& c) -> double& { return c.max_time; });
    D("harness", "goal_tolerance", [](RunConfig& c) -> double& { return c.goal_tolerance; });
    D("harness", "field_clearance", [](RunConfig& c) -> double& { return c.field_clearance; });
    U("harness", "seed", [](RunConfig& c) -> uint64_t& { return c.seed; });
    I("harness", "repeats", [](RunConfig& c) -> int& { return c.repeats; });

    auto planner_keys = [&](const char* sec, std::function<PlannerSection&(RunConfig&)> ps) {
      I(sec, "steps", [ps](RunConfig& c) -> int& { return ps(c).steps; });
      D(sec, "horizon", [ps](RunConfig& c) -> double& { return ps(c).horizon; });
      D(sec, "ddp_horizon", [ps](RunConfig& c) -> double& { return ps(c).ddp_horizon; });
      D(sec, "p", [ps](RunConfig& c) -> double& { return ps(c).p; });
      B(sec, "scan_field", [ps](RunConfig& c) -> bool& { return ps(c).scan_field; });
      D(sec, "w_goal", [ps](RunConfig& c) -> double& { return ps(c).weights.w_goal; });
      D(sec, "w_obstacle", [ps](RunConfig& c) -> double& { return ps(c).weights.w_obstacle; });
      D(sec, "w_path", [ps](RunConfig& c) -> double& { return ps(c).weights.w_path; });
      D(sec, "w_smooth", [ps](RunConfig& c) -> double& { return ps(c).weights.w_smooth; });
      D(sec, "w_heading", [ps](RunConfig& c) -> double& { return ps(c).weights.w_heading; });
      D(sec, "obstacle_saturation",
        [ps](RunConfig& c) -> double& { return ps(c).weights.obstacle_saturation; });
      D(sec, "collision_penalty",
        [ps](RunConfig& c) -> double& { return ps(c).weights.collision_penalty; });
    };

    auto dwa_ps = [](RunConfig& c) -> PlannerSection& { return c.dwa; };
    auto mppi_ps = [](RunConfig& c) -> PlannerSection& { return c.mppi; };
    auto log_ps = [](RunConfig& c) -> PlannerSection& { return c.logmppi; };

    planner_keys("dwa", dwa_ps);
    I("dwa", "v_samples", [](RunConfig& c) -> int& { return c.dwa.v_samples; });
    I("dwa", "omega_samples", [](RunConfig& c) -> int& { return c.dwa.omega_samples; });

    planner_keys("mppi", mppi_ps);
    I("mppi", "samples", [](RunConfig& c) -> int& { return c.mppi.samples; });
    I("mppi", "retain", [](RunConfig& c) -> int& { return c.mppi.retain; });
    D("mppi", "lambda", [](RunConfig& c) -> double& { return c.mppi.lambda; });
    D("mppi", "sigma_v", [](RunConfig& c) -> double& { return c.mppi.sigma_v; });
    D("mppi", "sigma_omega", [](RunConfig& c) -> double& { return c.mppi.sigma_omega; });

    planner_keys("logmppi", log_ps);
    I("logmppi", "samples", [](RunConfig& c) -> int& { return c.logmppi.samples; });
    I("logmppi", "retain", [](RunConfig& c) -> int& { return c.logmppi.retain; });
    D("logmppi", "lambda", [](RunConfig& c) -> double& { return c.logmppi.lambda; });
    D("logmppi", "sigma_v", [](RunConfig& c) -> double& { return c.logmppi.sigma_v; });
    D("logmppi", "sigma_omega", [](RunConfig& c) -> double& { return c.logmppi.sigma_omega; });
    D("logmppi", "sigma_eta", [](RunConfig& c) -> double& { return c.logmppi.sigma_eta; });

    I("navsys", "steps", [](RunConfig& c) -> int& { return c.navsys.steps; });
    D("navsys", "horizon", [](RunConfig& c) -> double& { return c.navsys.horizon; });
    D("navsys", "p", [](RunConfig& c) -> double& { return c.navsys.p; });
    I("navsys", "samples_high", [](RunConfig& c) -> int& { return c.navsys.samples_high; });
    I("navsys", "samples_low", [](RunConfig& c) -> int& { return c.navsys.samples_low; });
    I("navsys", "retain", [](RunConfig& c) -> int& { return c.navsys.retain; });
    D("navsys", "lambda", [](RunConfig& c) -> double& { return c.navsys.lambda; });
    D("navsys", "sigma_v", [](RunConfig& c) -> double& { return c.navsys.sigma_v; });
    D("navsys", "sigma_omega", [](RunConfig& c) -> double& { return c.navsys.sigma_omega; });
    D("navsys", "field_clearance", [](RunConfig& c) -> double& { return c.navsys.field_clearance; });
    D("navsys", "rotate_done_tol", [](RunConfig& c) -> double& { return c.navsys.rotate_done_tol; });
    D("navsys", "w_goal", [](RunConfig& c) -> double& { return c.navsys.weights.w_goal; });
    D("navsys", "w_obstacle", [](RunConfig& c) -> double& { return c.navsys.weights.w_obstacle; });
    D("navsys", "w_path", [](RunConfig& c) -> double& { return c.navsys.weights.w_path; });
    D("navsys", "w_smooth", [](RunConfig& c) -> double& { return c.navsys.weights.w_smooth; });
    D("navsys", "w_heading", [](RunConfig& c) -> double& { return c.navsys.weights.w_heading; });
    D("navsys", "obstacle_saturation",
      [](RunConfig& c) -> double& { return c.navsys.weights.obstacle_saturation; });
    D("navsys", "collision_penalty",
      [](RunConfig& c) -> double& { return c.navsys.weights.collision_penalty; });

    D("modes", "v_low", [](RunConfig& c) -> double& { return c.modes.v_low; });
    D("modes", "t_low", [](RunConfig& c) -> double& { return c.modes.t_low; });
    D("modes", "v_rec", [](RunConfig& c) -> double& { return c.modes.v_rec; });
    D("modes", "t_rec", [](RunConfig& c) -> double& { return c.modes.t_rec; });
    D("modes", "t_brake", [](RunConfig& c) -> double& { return c.modes.t_brake; });
    D("modes", "v_resume", [](RunConfig& c) -> double& { return c.modes.v_resume; });
    D("modes", "t_resume", [](RunConfig& c) -> double& { return c.modes.t_resume; });
    D("modes", "low_v_frac", [](RunConfig& c) -> double& { return c.modes.low_v_frac; });
    D("modes", "low_omega_frac", [](RunConfig& c) -> double& { return c.modes.low_omega_frac; });
    return k;
  }();
  return keys;
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

// key = value under [section] headers; '#' starts a comment; unknown sections
// or keys are errors, missing ones keep their defaults.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  const auto& keys = detail::config_keys();
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      bool known = std::any_of(keys.begin(), keys.end(),
                               [&](const auto& k) { return k.section == section; });
      if (!known) throw ConfigError(lineno, "unknown section [" + section + "]");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(lineno, "key '" + key + "' outside any section");
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const auto& k) { return k.section == section && k.key == key; });
    if (it == keys.end())
      throw ConfigError(lineno, "unknown key '" + key + "' in section [" + section + "]");
    it->set(cfg, value, lineno);
  }
  return cfg;
}

// Every key, every default, grouped by section: parsing the output reproduces
// the input config exactly.
inline std::string serialize_config(const RunConfig& cfg) {
  const auto& keys = detail::config_keys();
  std::string out;
  std::string section;
  for (const auto& k : keys) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.key + " = " + k.get(cfg) + "\n";
  }
  return out;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline PlannerConfig make_planner_config(const RunConfig& rc, PlannerKind kind, bool ddp) {
  const PlannerSection& ps = kind == PlannerKind::Dwa ? rc.dwa
                             : kind == PlannerKind::Mppi ? rc.mppi
                                                         : rc.logmppi;
  PlannerConfig cfg;
  cfg.kind = kind;
  cfg.ddp_enabled = ddp;
  cfg.steps = ps.steps;
  cfg.horizon = ddp ? ps.ddp_horizon : ps.horizon;
  cfg.p = ps.p;
  cfg.samples = ps.samples;
  cfg.retain = ps.retain;
  cfg.lambda = ps.lambda;
  cfg.sigma_v = ps.sigma_v;
  cfg.sigma_omega = ps.sigma_omega;
  cfg.sigma_eta = ps.sigma_eta;
  cfg.dwa_v_samples = ps.v_samples;
  cfg.dwa_omega_samples = ps.omega_samples;
  cfg.control_dt = 1.0 / rc.rate;
  cfg.weights = ps.weights;
  cfg.use_scan_field = ps.scan_field;
  cfg.field_clearance = rc.field_clearance;
  return cfg;
}

inline NavsysConfig make_navsys_config(const RunConfig& rc) {
  NavsysConfig cfg = rc.navsys;
  cfg.thresholds = rc.modes;
  cfg.control_dt = 1.0 / rc.rate;
  return cfg;
}

inline const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {"dwa",     "dwa-ddp", "mppi",        "mppi-ddp",
                                                 "logmppi", "logmppi-ddp", "navsys"};
  return names;
}

inline VariantConfig make_variant(const RunConfig& rc, const std::string& name) {
  VariantConfig var;
  if (name == "navsys") {
    var.planner = "navsys";
    var.is_navsys = true;
    var.ddp = true;
    var.navsys_cfg = make_navsys_config(rc);
    return var;
  }
  bool ddp = name.size() > 4 && name.ends_with("-ddp");
  std::string base = ddp ? name.substr(0, name.size() - 4) : name;
  PlannerKind kind;
  if (base == "dwa")
    kind = PlannerKind::Dwa;
  else if (base == "mppi")
    kind = PlannerKind::Mppi;
  else if (base == "logmppi")
    kind = PlannerKind::LogMppi;
  else
    throw std::invalid_argument("unknown planner variant '" + name + "'");
  var.planner = base;
  var.ddp = ddp;
  var.planner_cfg = make_planner_config(rc, kind, ddp);
  return var;
}

inline EpisodeOptions episode_options(const RunConfig& rc) {
  EpisodeOptions opt;
  opt.rate = rc.rate;
  opt.max_time = rc.max_time;
  opt.goal_tolerance = rc.goal_tolerance;
  opt.field_clearance = rc.field_clearance;
  opt.lidar_fov = rc.lidar_fov;
  opt.lidar_beams = rc.lidar_beams;
  opt.lidar_range = rc.lidar_range;
  return opt;
}

}  // namespace ddpnav
