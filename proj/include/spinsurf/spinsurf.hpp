#pragma once

// Umbrella header: exact unitary dynamics of small spin-1/2 clusters,
// energy-surface confinement analysis, and quantum-jump ensembles.

#include "spinsurf/basis.hpp"
#include "spinsurf/commands.hpp"
#include "spinsurf/config.hpp"
#include "spinsurf/dynamics.hpp"
#include "spinsurf/errors.hpp"
#include "spinsurf/hamiltonian.hpp"
#include "spinsurf/jumps.hpp"
#include "spinsurf/observables.hpp"
#include "spinsurf/surfaces.hpp"
#include "spinsurf/system.hpp"
#include "spinsurf/version.hpp"
