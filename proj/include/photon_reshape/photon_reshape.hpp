#pragma once

// Single-photon spectral reshaping by cross-phase modulation in a
// dispersion-managed fiber: control-pulse propagation, the induced linear
// reshaping operator, joint-spectral-state transformations, and two-photon
// interference observables.

#include "photon_reshape/biphoton.hpp"
#include "photon_reshape/config.hpp"
#include "photon_reshape/errors.hpp"
#include "photon_reshape/fiber.hpp"
#include "photon_reshape/grid.hpp"
#include "photon_reshape/interference.hpp"
#include "photon_reshape/io.hpp"
#include "photon_reshape/propagate.hpp"
#include "photon_reshape/scenario.hpp"
#include "photon_reshape/svg.hpp"
#include "photon_reshape/units.hpp"
