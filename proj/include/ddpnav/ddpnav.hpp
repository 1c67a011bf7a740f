#pragma once

#include "ddpnav/cli.hpp"
#include "ddpnav/config.hpp"
#include "ddpnav/core.hpp"
#include "ddpnav/cost.hpp"
#include "ddpnav/dynamics.hpp"
#include "ddpnav/grid.hpp"
#include "ddpnav/harness.hpp"
#include "ddpnav/lidar.hpp"
#include "ddpnav/mapgen.hpp"
#include "ddpnav/navsys.hpp"
#include "ddpnav/planners.hpp"
