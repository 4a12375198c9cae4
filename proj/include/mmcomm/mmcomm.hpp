#pragma once

#include "mmcomm/rational.hpp"
#include "mmcomm/quantity.hpp"
#include "mmcomm/core_model.hpp"
#include "mmcomm/kkt_optimizer.hpp"
#include "mmcomm/grid_planner.hpp"
#include "mmcomm/mm_simulator.hpp"
#include "mmcomm/projection_oracle.hpp"
#include "mmcomm/json_io.hpp"
