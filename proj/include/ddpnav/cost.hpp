#pragma once

#include "ddpnav/dynamics.hpp"

namespace ddpnav {

struct CostWeights {
  double w_goal = 4.0;
  double w_obstacle = 0.6;
  double w_path = 0.1;
  double w_smooth = 0.3;
  double w_heading = 0.8;
  double obstacle_saturation = 0.25;  // clearance beyond which obstacles stop mattering
  double collision_penalty = 1e6;
};

// Five-term trajectory cost: terminal goal distance, saturated clearance
// deficit, arc length, turn-rate smoothness, terminal bearing error. A
// collision adds the flat penalty on top (callers that filter colliding
// samples never see it).
inline double evaluate_cost(const Trajectory& traj, const Vec2& goal, const CostWeights& w) {
  const State& last = traj.states.back();
  const double sat = w.obstacle_saturation;

  double goal_dist = distance({last.x, last.y}, goal);

  double obstacle = 0.0;
  for (double cl : traj.clearances)
    if (cl < sat) obstacle += (sat - cl) / sat;

  double path_len = 0.0;
  for (size_t i = 1; i < traj.states.size(); ++i)
    path_len += distance({traj.states[i].x, traj.states[i].y},
                         {traj.states[i - 1].x, traj.states[i - 1].y});

  double smooth = 0.0;
  for (size_t i = 1; i < traj.states.size(); ++i)
    smooth += std::abs(traj.states[i].omega - traj.states[i - 1].omega);

  double heading = 0.0;
  if (goal_dist > 1e-12)
    heading = std::abs(wrap_angle(std::atan2(goal.y - last.y, goal.x - last.x) - last.psi));

  double cost = w.w_goal * goal_dist + w.w_obstacle * obstacle + w.w_path * path_len +
                w.w_smooth * smooth + w.w_heading * heading;
  if (traj.collision) cost += w.collision_penalty;
  return cost;
}

}  // namespace ddpnav
