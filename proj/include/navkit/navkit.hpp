#pragma once

#include "navkit/backend.hpp"
#include "navkit/config.hpp"
#include "navkit/error.hpp"
#include "navkit/geometry.hpp"
#include "navkit/grid.hpp"
#include "navkit/gridmap.hpp"
#include "navkit/harness.hpp"
#include "navkit/image_io.hpp"
#include "navkit/localnav.hpp"
#include "navkit/nodes.hpp"
#include "navkit/occupancy.hpp"
#include "navkit/planning.hpp"
#include "navkit/procgen.hpp"
#include "navkit/prompts.hpp"
#include "navkit/raycast.hpp"
#include "navkit/reasoning.hpp"
#include "navkit/render.hpp"
#include "navkit/rooms.hpp"
#include "navkit/simulator.hpp"
#include "navkit/verification.hpp"
#include "navkit/vfh.hpp"
