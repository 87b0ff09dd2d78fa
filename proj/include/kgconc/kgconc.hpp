#pragma once

// Umbrella header: the whole library in one include.

#include "kgconc/error.hpp"
#include "kgconc/nonlinearity.hpp"
#include "kgconc/rest_states.hpp"
#include "kgconc/field.hpp"
#include "kgconc/densities.hpp"
#include "kgconc/lorentz_boost.hpp"
#include "kgconc/trajectory.hpp"
#include "kgconc/scale.hpp"
#include "kgconc/characteristics.hpp"
#include "kgconc/assembly.hpp"
#include "kgconc/diagnostics.hpp"
