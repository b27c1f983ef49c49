#pragma once

#include "trawl/error.hpp"
#include "trawl/quadrature.hpp"
#include "trawl/trawl_kernel.hpp"
#include "trawl/levy_model.hpp"
#include "trawl/exponent_oracle.hpp"
#include "trawl/random.hpp"
#include "trawl/parallel.hpp"
#include "trawl/pathsim.hpp"
#include "trawl/stats.hpp"
#include "trawl/ensemble_io.hpp"
