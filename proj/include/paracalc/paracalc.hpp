#pragma once

// Umbrella header for the paracalc library.

#include "paracalc/errors.hpp"
#include "paracalc/freq_expr.hpp"
#include "paracalc/generators.hpp"
#include "paracalc/io.hpp"
#include "paracalc/littlewood_paley.hpp"
#include "paracalc/paracomposition.hpp"
#include "paracalc/paradiff.hpp"
#include "paracalc/spectral_grid.hpp"
#include "paracalc/symbols.hpp"
#include "paracalc/torus_map.hpp"

namespace paracalc {

inline constexpr const char* version = "0.1.0";

}  // namespace paracalc
