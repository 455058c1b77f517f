#pragma once
// Umbrella header: the whole library.

#include "model.hpp"      // steady-state fields, reflectivity, thermal occupation
#include "modes.hpp"      // hybrid modes, splitting, regime classification
#include "synthesis.hpp"  // noisy spectra, detuning maps, calibrations
#include "io.hpp"         // CSV persistence
#include "config.hpp"     // JSON run configuration
#include "units.hpp"      // quantity parsing for CLI flags
#include "fit.hpp"        // joint least-squares estimation
