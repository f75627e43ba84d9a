#pragma once

// Umbrella header: the full library surface.

#include "dmrac/cli.hpp"
#include "dmrac/config_io.hpp"
#include "dmrac/controller.hpp"
#include "dmrac/core.hpp"
#include "dmrac/engine.hpp"
#include "dmrac/graph.hpp"
#include "dmrac/layout.hpp"
#include "dmrac/matching.hpp"
#include "dmrac/plant.hpp"
#include "dmrac/presets.hpp"
#include "dmrac/scenario.hpp"
#include "dmrac/trace_io.hpp"

