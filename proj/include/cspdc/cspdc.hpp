#pragma once
// Umbrella header for the whole library.

#include "cspdc/analysis.hpp"
#include "cspdc/common.hpp"
#include "cspdc/config.hpp"
#include "cspdc/fock.hpp"
#include "cspdc/manifest.hpp"
#include "cspdc/model.hpp"
#include "cspdc/rng.hpp"
#include "cspdc/sim.hpp"
#include "cspdc/tags.hpp"
#include "cspdc/version.hpp"
