#pragma once

#include "pmf.hpp"
#include "stein_core.hpp"
#include "rational.hpp"
#include "exact_laws.hpp"
#include "random.hpp"
#include "pair_models.hpp"
#include "bounds.hpp"
#include "multivariate.hpp"
#include "harness.hpp"
