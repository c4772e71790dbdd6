#pragma once

#include "skewbound/error.hpp"
#include "skewbound/linalg.hpp"
#include "skewbound/derivatives.hpp"
#include "skewbound/skew_moments.hpp"
#include "skewbound/bound_ladder.hpp"
#include "skewbound/random.hpp"
#include "skewbound/oracle.hpp"
#include "skewbound/io.hpp"
#include "skewbound/verify.hpp"
