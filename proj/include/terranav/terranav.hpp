#pragma once

// Umbrella header.

#include "terranav/config.hpp"
#include "terranav/feasibility.hpp"
#include "terranav/geometry.hpp"
#include "terranav/graph.hpp"
#include "terranav/grid_map.hpp"
#include "terranav/height_field.hpp"
#include "terranav/io.hpp"
#include "terranav/navigator.hpp"
#include "terranav/subgoals.hpp"
#include "terranav/tree.hpp"
