#pragma once

#include "coolshape/errors.hpp"
#include "coolshape/fourier.hpp"
#include "coolshape/geometry.hpp"
#include "coolshape/spectral.hpp"
#include "coolshape/potential.hpp"
#include "coolshape/solver.hpp"
#include "coolshape/cost.hpp"
#include "coolshape/gradient.hpp"
#include "coolshape/optimize.hpp"
#include "coolshape/presets.hpp"
#include "coolshape/validation.hpp"
#include "coolshape/io/csv.hpp"
