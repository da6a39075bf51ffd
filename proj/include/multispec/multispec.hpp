#pragma once

/**
 * @file multispec.hpp
 * @brief Umbrella header for the library (everything except the CLI).
 */

#include "combinatorics.hpp"
#include "continuation.hpp"
#include "derivatives.hpp"
#include "errors.hpp"
#include "monodromy.hpp"
#include "parallel.hpp"
#include "polymap.hpp"
#include "powerlattice.hpp"
#include "rank.hpp"
#include "report.hpp"
#include "tolerances.hpp"
#include "witness.hpp"
