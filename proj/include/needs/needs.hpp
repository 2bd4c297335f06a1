#ifndef NEEDS_NEEDS_HPP_
#define NEEDS_NEEDS_HPP_

#include "conditioned.hpp"
#include "empirical.hpp"
#include "estimate.hpp"
#include "io.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "population.hpp"
#include "pwl_fit.hpp"
#include "solver.hpp"
#include "synth.hpp"
#include "types.hpp"

#endif
