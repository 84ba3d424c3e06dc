#pragma once

#include "slores/bound_oracle.hpp"
#include "slores/bounds.hpp"
#include "slores/dataset.hpp"
#include "slores/dual.hpp"
#include "slores/geometry.hpp"
#include "slores/path.hpp"
#include "slores/precompute.hpp"
#include "slores/screening.hpp"
#include "slores/solver.hpp"
#include "slores/types.hpp"
