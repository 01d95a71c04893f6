#pragma once

#include "error.hpp"
#include "taylor.hpp"
#include "roots.hpp"
#include "quadrature.hpp"
#include "spline.hpp"
#include "parallel.hpp"
#include "majorant.hpp"
#include "growth_solver.hpp"
#include "model_geometries.hpp"
#include "bergman_numeric.hpp"
#include "decay_analysis.hpp"
