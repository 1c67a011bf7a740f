#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddpnav/core.hpp"

namespace ddpnav {

struct GridGeometry {
  int width = 0;
  int height = 0;
  double resolution = 0.0;
  Vec2 origin{0.0, 0.0};
};

// Row-major occupancy grid. cells[y * width + x], 1 = occupied.
// Row 0 is the minimum-y row; origin is the world position of the
// grid's lower-left corner.
struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double resolution = 0.0;
  Vec2 origin{0.0, 0.0};
  Pose2 start;
  Vec2 goal{0.0, 0.0};
  std::vector<uint8_t> cells;

  GridGeometry geometry() const { return {width, height, resolution, origin}; }

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width && iy >= 0 && iy < height;
  }

  uint8_t& at(int ix, int iy) { return cells[static_cast<size_t>(iy) * width + ix]; }
  uint8_t at(int ix, int iy) const { return cells[static_cast<size_t>(iy) * width + ix]; }

  // Anything outside the grid counts as occupied.
  bool occupied(int ix, int iy) const {
    if (!in_bounds(ix, iy)) return true;
    return at(ix, iy) != 0;
  }

  std::pair<int, int> world_to_cell(const Vec2& p) const {
    int ix = static_cast<int>(std::floor((p.x - origin.x) / resolution));
    int iy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
    return {ix, iy};
  }

  Vec2 cell_center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
  }

  bool occupied_world(const Vec2& p) const {
    auto [ix, iy] = world_to_cell(p);
    return occupied(ix, iy);
  }
};

inline OccupancyGrid make_blank_grid(const GridGeometry& g) {
  OccupancyGrid out;
  out.width = g.width;
  out.height = g.height;
  out.resolution = g.resolution;
  out.origin = g.origin;
  out.cells.assign(static_cast<size_t>(g.width) * g.height, 0);
  return out;
}

// Euclidean clearance to the nearest occupied cell center, capped.
struct DistanceField {
  int width = 0;
  int height = 0;
  double resolution = 0.0;
  Vec2 origin{0.0, 0.0};
  double max_clearance = 0.0;
  std::vector<double> dist;

  double at(int ix, int iy) const { return dist[static_cast<size_t>(iy) * width + ix]; }

  // World-point clearance; outside the grid reads as occupied (0).
  double clearance_world(const Vec2& p) const {
    int ix = static_cast<int>(std::floor((p.x - origin.x) / resolution));
    int iy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
    if (ix < 0 || ix >= width || iy < 0 || iy >= height) return 0.0;
    return dist[static_cast<size_t>(iy) * width + ix];
  }
};

namespace detail {

// Felzenszwalb/Huttenlocher 1D squared-distance transform.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n,
                   std::vector<int>& v, std::vector<double>& z) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    while (true) {
      s = ((f[q] + q * static_cast<double>(q)) - (f[v[k]] + v[k] * static_cast<double>(v[k]))) /
          (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

inline DistanceField compute_distance_field(const OccupancyGrid& grid, double max_clearance) {
  if (grid.width <= 0 || grid.height <= 0 || grid.resolution <= 0.0)
    throw std::invalid_argument("compute_distance_field: empty grid");
  if (max_clearance <= 0.0)
    throw std::invalid_argument("compute_distance_field: max_clearance must be > 0");

  // Free-cell seed must stay finite: a true infinity turns the parabola
  // intersection into inf - inf. 1e20 dwarfs any real squared cell distance.
  constexpr double kFar = 1e20;
  const int w = grid.width, h = grid.height;
  std::vector<double> g(static_cast<size_t>(w) * h);

  {
    std::vector<double> f(h), d(h), z(h + 1);
    std::vector<int> v(h);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) f[y] = grid.at(x, y) ? 0.0 : kFar;
      detail::edt_1d(f, d, h, v, z);
      for (int y = 0; y < h; ++y) g[static_cast<size_t>(y) * w + x] = d[y];
    }
  }

  DistanceField out;
  out.width = w;
  out.height = h;
  out.resolution = grid.resolution;
  out.origin = grid.origin;
  out.max_clearance = max_clearance;
  out.dist.resize(static_cast<size_t>(w) * h);

  // Row pass, then convert squared cell distances to capped meters.
  {
    std::vector<double> f(w), d(w), z(w + 1);
    std::vector<int> v(w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f[x] = g[static_cast<size_t>(y) * w + x];
      detail::edt_1d(f, d, w, v, z);
      for (int x = 0; x < w; ++x) {
        double m = d[x] >= kFar ? max_clearance : std::sqrt(d[x]) * grid.resolution;
        out.dist[static_cast<size_t>(y) * w + x] = std::min(m, max_clearance);
      }
    }
  }
  return out;
}

// Grid traversal (Amanatides/Woo). Returns the distance to the entry boundary
// of the first occupied cell, max_range if nothing is hit within range, and 0
// when the origin cell itself is occupied. Leaving the grid counts as a hit.
inline double raycast(const OccupancyGrid& grid, const Vec2& origin, double bearing,
                      double max_range) {
  if (max_range <= 0.0) throw std::invalid_argument("raycast: max_range must be > 0");
  auto [ix, iy] = grid.world_to_cell(origin);
  if (grid.occupied(ix, iy)) return 0.0;

  const double dx = std::cos(bearing);
  const double dy = std::sin(bearing);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  double t_delta_x = step_x != 0 ? grid.resolution / std::abs(dx) : kInf;
  double t_delta_y = step_y != 0 ? grid.resolution / std::abs(dy) : kInf;

  double t_max_x = kInf;
  if (step_x > 0)
    t_max_x = (grid.origin.x + (ix + 1) * grid.resolution - origin.x) / dx;
  else if (step_x < 0)
    t_max_x = (grid.origin.x + ix * grid.resolution - origin.x) / dx;
  double t_max_y = kInf;
  if (step_y > 0)
    t_max_y = (grid.origin.y + (iy + 1) * grid.resolution - origin.y) / dy;
  else if (step_y < 0)
    t_max_y = (grid.origin.y + iy * grid.resolution - origin.y) / dy;

  while (true) {
    double t;
    bool crossed_x;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      ix += step_x;
      crossed_x = true;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      iy += step_y;
      crossed_x = false;
    }
    if (t > max_range) return max_range;
    if (grid.occupied(ix, iy)) {
      // Accumulated t drifts a few ulp per crossing; report the exact plane
      // intersection of the face we just stepped through.
      double exact;
      if (crossed_x) {
        double plane = grid.origin.x + (step_x > 0 ? ix : ix + 1) * grid.resolution;
        exact = (plane - origin.x) / dx;
      } else {
        double plane = grid.origin.y + (step_y > 0 ? iy : iy + 1) * grid.resolution;
        exact = (plane - origin.y) / dy;
      }
      return std::min(exact, max_range);
    }
  }
}

struct EnvParseError : std::runtime_error {
  int line;
  EnvParseError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double_tok(const std::string& tok, int line, const char* what) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw EnvParseError(line, std::string("bad ") + what + " value '" + tok + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

// Environment file layout:
//   width height resolution
//   start x y psi
//   goal x y
//   <height> rows of <width> chars in {0,1}, first row = minimum y
inline std::string write_environment(const OccupancyGrid& grid) {
  std::string out;
  out += std::to_string(grid.width) + " " + std::to_string(grid.height) + " " +
         detail::format_double(grid.resolution) + "\n";
  out += "start " + detail::format_double(grid.start.x) + " " + detail::format_double(grid.start.y) +
         " " + detail::format_double(grid.start.psi) + "\n";
  out += "goal " + detail::format_double(grid.goal.x) + " " + detail::format_double(grid.goal.y) + "\n";
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) out += grid.at(x, y) ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline OccupancyGrid parse_environment(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;

  auto next_line = [&]() -> std::string {
    if (!std::getline(is, line)) throw EnvParseError(lineno + 1, "unexpected end of file");
    ++lineno;
    return line;
  };

  OccupancyGrid grid;
  {
    auto toks = detail::split_ws(next_line());
    if (toks.size() != 3) throw EnvParseError(lineno, "expected 'width height resolution'");
    grid.width = static_cast<int>(detail::parse_double_tok(toks[0], lineno, "width"));
    grid.height = static_cast<int>(detail::parse_double_tok(toks[1], lineno, "height"));
    grid.resolution = detail::parse_double_tok(toks[2], lineno, "resolution");
    if (grid.width <= 0 || grid.height <= 0) throw EnvParseError(lineno, "non-positive grid dimensions");
    if (grid.resolution <= 0.0) throw EnvParseError(lineno, "non-positive resolution");
  }
  {
    auto toks = detail::split_ws(next_line());
    if (toks.size() != 4 || toks[0] != "start")
      throw EnvParseError(lineno, "expected 'start x y psi'");
    grid.start.x = detail::parse_double_tok(toks[1], lineno, "start x");
    grid.start.y = detail::parse_double_tok(toks[2], lineno, "start y");
    grid.start.psi = detail::parse_double_tok(toks[3], lineno, "start psi");
  }
  {
    auto toks = detail::split_ws(next_line());
    if (toks.size() != 3 || toks[0] != "goal") throw EnvParseError(lineno, "expected 'goal x y'");
    grid.goal.x = detail::parse_double_tok(toks[1], lineno, "goal x");
    grid.goal.y = detail::parse_double_tok(toks[2], lineno, "goal y");
  }
  grid.cells.assign(static_cast<size_t>(grid.width) * grid.height, 0);
  for (int y = 0; y < grid.height; ++y) {
    std::string row = next_line();
    if (static_cast<int>(row.size()) != grid.width)
      throw EnvParseError(lineno, "expected " + std::to_string(grid.width) + " cells, got " +
                                      std::to_string(row.size()));
    for (int x = 0; x < grid.width; ++x) {
      if (row[x] == '1')
        grid.at(x, y) = 1;
      else if (row[x] != '0')
        throw EnvParseError(lineno, std::string("invalid cell character '") + row[x] + "'");
    }
  }
  return grid;
}

inline void save_environment(const std::string& path, const OccupancyGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << write_environment(grid);
}

inline OccupancyGrid load_environment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_environment(ss.str());
}

}  // namespace ddpnav
