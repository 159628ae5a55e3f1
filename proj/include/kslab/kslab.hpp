#pragma once

// Umbrella header for the library part of kslab.

#include "kslab/bounds.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/grid.hpp"
#include "kslab/mass_profile.hpp"
#include "kslab/mass_solver.hpp"
#include "kslab/model.hpp"
#include "kslab/primal_solver.hpp"
#include "kslab/radial_elliptic.hpp"
#include "kslab/stepping.hpp"
#include "kslab/tridiagonal.hpp"
