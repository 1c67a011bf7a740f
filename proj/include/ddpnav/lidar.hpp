#pragma once

#include <stdexcept>
#include <vector>

#include "ddpnav/grid.hpp"

namespace ddpnav {

struct LidarScan {
  Pose2 pose;
  double fov = 0.0;
  int n_beams = 0;
  double max_range = 0.0;
  std::vector<double> ranges;

  // Beam i sweeps from psi - fov/2 to psi + fov/2.
  double bearing(int i) const {
    if (n_beams < 2) return pose.psi;
    return pose.psi - fov / 2.0 + i * (fov / (n_beams - 1));
  }
};

inline LidarScan simulate_lidar(const OccupancyGrid& grid, const Pose2& pose, double fov,
                                int n_beams, double max_range) {
  if (n_beams < 1) throw std::invalid_argument("simulate_lidar: n_beams must be >= 1");
  if (fov < 0.0 || fov > 2.0 * kPi) throw std::invalid_argument("simulate_lidar: fov outside [0, 2pi]");
  LidarScan scan;
  scan.pose = pose;
  scan.fov = fov;
  scan.n_beams = n_beams;
  scan.max_range = max_range;
  scan.ranges.resize(n_beams);
  Vec2 o{pose.x, pose.y};
  for (int i = 0; i < n_beams; ++i) scan.ranges[i] = raycast(grid, o, scan.bearing(i), max_range);
  return scan;
}

// World-frame endpoints of beams that hit something (range < max_range).
inline std::vector<Vec2> scan_to_points(const LidarScan& scan) {
  std::vector<Vec2> pts;
  pts.reserve(scan.ranges.size());
  for (int i = 0; i < scan.n_beams; ++i) {
    double r = scan.ranges[i];
    if (r >= scan.max_range) continue;
    double b = scan.bearing(i);
    pts.push_back({scan.pose.x + r * std::cos(b), scan.pose.y + r * std::sin(b)});
  }
  return pts;
}

// Mark the cell behind each hit endpoint. Endpoints land exactly on the hit
// cell's entry face, so step a hair further along the beam before binning; a
// larger nudge (say half a cell) would punch through obliquely-entered cells
// into their free neighbors.
inline OccupancyGrid rasterize_scan(const LidarScan& scan, const GridGeometry& geom) {
  OccupancyGrid grid = make_blank_grid(geom);
  for (int i = 0; i < scan.n_beams; ++i) {
    double r = scan.ranges[i];
    if (r >= scan.max_range) continue;
    double b = scan.bearing(i);
    double rr = r + 1e-6 * geom.resolution;
    Vec2 p{scan.pose.x + rr * std::cos(b), scan.pose.y + rr * std::sin(b)};
    auto [ix, iy] = grid.world_to_cell(p);
    if (grid.in_bounds(ix, iy)) grid.at(ix, iy) = 1;
  }
  return grid;
}

// Transient clearance field built from the current scan only.
inline DistanceField scan_field(const LidarScan& scan, const GridGeometry& geom,
                                double max_clearance) {
  return compute_distance_field(rasterize_scan(scan, geom), max_clearance);
}

}  // namespace ddpnav
