#pragma once

/// Umbrella header for the whole library.

#include "imcf/cartesian_solver.hpp"
#include "imcf/diagnostics.hpp"
#include "imcf/errors.hpp"
#include "imcf/exact_solutions.hpp"
#include "imcf/geometry.hpp"
#include "imcf/grid.hpp"
#include "imcf/io.hpp"
#include "imcf/radial_solver.hpp"
#include "imcf/report.hpp"
#include "imcf/selfsimilar.hpp"
#include "imcf/stencil.hpp"
#include "imcf/sweep.hpp"
