#pragma once

// MAP model selection for Gaussian linear regression: penalized least
// squares with prior-derived complexity penalties, stochastic model search,
// design diagnostics and a Monte Carlo risk bench.

#include "mapsel/combinatorics.hpp"
#include "mapsel/design.hpp"
#include "mapsel/diagnostics.hpp"
#include "mapsel/exhaustive.hpp"
#include "mapsel/io.hpp"
#include "mapsel/linalg.hpp"
#include "mapsel/model.hpp"
#include "mapsel/prior.hpp"
#include "mapsel/risk.hpp"
#include "mapsel/rng.hpp"
#include "mapsel/ssvs.hpp"
