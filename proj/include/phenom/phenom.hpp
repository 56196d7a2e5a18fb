#pragma once

// Umbrella header: the whole calculus of exchangeable binary phenomena.
// Pull in individual headers instead if compile time matters; cli.hpp is
// intentionally excluded (it drags in the argument parser).

#include "phenom/combinatorics.hpp"
#include "phenom/errors.hpp"
#include "phenom/io.hpp"
#include "phenom/limitdist.hpp"
#include "phenom/mixtures.hpp"
#include "phenom/moments.hpp"
#include "phenom/occupancy.hpp"
#include "phenom/operators.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/rng.hpp"
#include "phenom/sampler.hpp"
#include "phenom/scalar.hpp"
