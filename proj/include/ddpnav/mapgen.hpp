#pragma once

#include <deque>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "ddpnav/grid.hpp"

namespace ddpnav {

struct GenParams {
  int width = 32;
  int height = 72;
  double resolution = 0.15;
  double fill_prob = 0.35;
  int smooth_iters = 4;
  int corridor_half_width = 2;  // cells carved each side of a repair path
};

// 4-connected reachability over free cells.
inline bool free_cells_connected(const OccupancyGrid& grid, int ax, int ay, int bx, int by) {
  if (grid.occupied(ax, ay) || grid.occupied(bx, by)) return false;
  std::vector<uint8_t> seen(static_cast<size_t>(grid.width) * grid.height, 0);
  std::deque<std::pair<int, int>> q;
  q.emplace_back(ax, ay);
  seen[static_cast<size_t>(ay) * grid.width + ax] = 1;
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop_front();
    if (x == bx && y == by) return true;
    for (int k = 0; k < 4; ++k) {
      int nx = x + dx[k], ny = y + dy[k];
      if (!grid.in_bounds(nx, ny) || grid.occupied(nx, ny)) continue;
      uint8_t& s = seen[static_cast<size_t>(ny) * grid.width + nx];
      if (!s) {
        s = 1;
        q.emplace_back(nx, ny);
      }
    }
  }
  return false;
}

namespace detail {

// Min-cost 4-connected path where stepping into an occupied cell costs 10x a
// free step. Used to pick where to carve when start and goal are separated.
inline std::vector<std::pair<int, int>> repair_path(const OccupancyGrid& grid, int sx, int sy,
                                                    int gx, int gy) {
  const int w = grid.width, h = grid.height;
  const size_t n = static_cast<size_t>(w) * h;
  std::vector<int> cost(n, std::numeric_limits<int>::max());
  std::vector<int> parent(n, -1);
  using Node = std::pair<int, int>;  // (cost, index); index breaks ties
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> pq;
  int s = sy * w + sx;
  cost[s] = 0;
  pq.emplace(0, s);
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  while (!pq.empty()) {
    auto [c, idx] = pq.top();
    pq.pop();
    if (c != cost[idx]) continue;
    if (idx == gy * w + gx) break;
    int x = idx % w, y = idx / w;
    for (int k = 0; k < 4; ++k) {
      int nx = x + dx[k], ny = y + dy[k];
      // Keep the outer border intact: never route through it.
      if (nx <= 0 || nx >= w - 1 || ny <= 0 || ny >= h - 1) continue;
      int nidx = ny * w + nx;
      int nc = c + (grid.at(nx, ny) ? 10 : 1);
      if (nc < cost[nidx]) {
        cost[nidx] = nc;
        parent[nidx] = idx;
        pq.emplace(nc, nidx);
      }
    }
  }
  std::vector<std::pair<int, int>> path;
  int cur = gy * w + gx;
  if (cost[cur] == std::numeric_limits<int>::max()) return path;
  while (cur != -1) {
    path.emplace_back(cur % w, cur / w);
    cur = parent[cur];
  }
  return path;
}

inline int clear_rows_for(const GenParams& p) {
  int r = static_cast<int>(std::floor(0.9 / p.resolution + 0.5));
  return std::max(3, r);
}

}  // namespace detail

// Cellular-automata obstacle course: random interior fill, majority smoothing,
// forced solid border, cleared start strip (bottom) and goal strip (top), and
// a carved corridor whenever no route wide enough for the robot survives.
inline OccupancyGrid generate_environment(uint64_t seed, const GenParams& p) {
  if (p.width < 8 || p.resolution <= 0.0)
    throw std::invalid_argument("generate_environment: grid too narrow or bad resolution");
  if (p.fill_prob < 0.0 || p.fill_prob > 1.0)
    throw std::invalid_argument("generate_environment: fill_prob outside [0, 1]");
  if (p.smooth_iters < 0 || p.corridor_half_width < 1)
    throw std::invalid_argument("generate_environment: bad smoothing/corridor parameters");
  const int clear_rows = detail::clear_rows_for(p);
  if (p.height < 2 * (clear_rows + 1) + 8)
    throw std::invalid_argument("generate_environment: height too small for start/goal regions");

  OccupancyGrid grid = make_blank_grid({p.width, p.height, p.resolution, {0.0, 0.0}});
  const int w = p.width, h = p.height;

  Rng rng(seed);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x)
      if (rng.uniform01() < p.fill_prob) grid.at(x, y) = 1;
  for (int x = 0; x < w; ++x) {
    grid.at(x, 0) = 1;
    grid.at(x, h - 1) = 1;
  }
  for (int y = 0; y < h; ++y) {
    grid.at(0, y) = 1;
    grid.at(w - 1, y) = 1;
  }

  // Synchronous 9-cell majority rule on the interior; border stays solid.
  std::vector<uint8_t> next(grid.cells.size());
  for (int it = 0; it < p.smooth_iters; ++it) {
    next = grid.cells;
    for (int y = 1; y < h - 1; ++y) {
      for (int x = 1; x < w - 1; ++x) {
        int count = 0;
        for (int oy = -1; oy <= 1; ++oy)
          for (int ox = -1; ox <= 1; ++ox)
            if (grid.at(x + ox, y + oy)) ++count;
        next[static_cast<size_t>(y) * w + x] = count >= 5 ? 1 : 0;
      }
    }
    grid.cells = next;
  }

  for (int y = 1; y <= clear_rows; ++y)
    for (int x = 1; x < w - 1; ++x) grid.at(x, y) = 0;
  for (int y = h - 1 - clear_rows; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) grid.at(x, y) = 0;

  // Both endpoints sit at the inner edge of their cleared strip, a full strip
  // depth away from the border wall, so an overshooting approach has room to
  // brake instead of clipping the boundary.
  grid.start = {w * p.resolution * 0.5, (clear_rows + 0.5) * p.resolution, kPi / 2.0};
  grid.goal = {w * p.resolution * 0.5, (h - 1 - clear_rows + 0.5) * p.resolution};

  auto [sx, sy] = grid.world_to_cell({grid.start.x, grid.start.y});
  auto [gx, gy] = grid.world_to_cell(grid.goal);

  // Pocket around each endpoint so the footprint spawns clear of clutter that
  // smoothing may have pushed right up against the strip edge.
  const int pocket = p.corridor_half_width + 1;
  for (auto [cx, cy] : {std::pair{sx, sy}, std::pair{gx, gy}}) {
    for (int oy = -pocket; oy <= pocket; ++oy)
      for (int ox = -pocket; ox <= pocket; ++ox) {
        int x = cx + ox, y = cy + oy;
        if (x >= 1 && x <= w - 2 && y >= 1 && y <= h - 2) grid.at(x, y) = 0;
      }
  }

  // Cell-level connectivity is not enough: a one-cell gap joins regions the
  // robot cannot actually fit through. Erode free space by the same radius the
  // carver cuts, and if no route that wide survives, carve one along the
  // cheapest crossing of the eroded map. Carving reshapes the erosion, so
  // iterate until a wide-enough route appears.
  const double route_radius = (p.corridor_half_width + 0.5) * p.resolution;
  for (int attempt = 0; attempt < 8; ++attempt) {
    DistanceField field = compute_distance_field(grid, route_radius + p.resolution);
    OccupancyGrid eroded = grid;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (field.dist[static_cast<size_t>(y) * w + x] < route_radius) eroded.at(x, y) = 1;
    if (free_cells_connected(eroded, sx, sy, gx, gy)) break;
    auto path = detail::repair_path(eroded, sx, sy, gx, gy);
    if (path.empty()) break;
    for (auto [px, py] : path) {
      for (int oy = -p.corridor_half_width; oy <= p.corridor_half_width; ++oy) {
        for (int ox = -p.corridor_half_width; ox <= p.corridor_half_width; ++ox) {
          int cx = px + ox, cy = py + oy;
          if (cx >= 1 && cx <= w - 2 && cy >= 1 && cy <= h - 2) grid.at(cx, cy) = 0;
        }
      }
    }
  }
  return grid;
}

}  // namespace ddpnav
