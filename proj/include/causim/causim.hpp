#pragma once

// Umbrella header: the full simulation engine.

#include "causim/agents.hpp"
#include "causim/base_functions.hpp"
#include "causim/batch.hpp"
#include "causim/config_json.hpp"
#include "causim/context.hpp"
#include "causim/drift.hpp"
#include "causim/environment.hpp"
#include "causim/errors.hpp"
#include "causim/evaluation.hpp"
#include "causim/grid.hpp"
#include "causim/noise.hpp"
#include "causim/rng.hpp"
#include "causim/selfcheck.hpp"
#include "causim/surface.hpp"
