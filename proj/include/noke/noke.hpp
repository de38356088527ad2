#pragma once

#include "noke/core.hpp"
#include "noke/forest.hpp"
#include "noke/canonical.hpp"
#include "noke/enumerate.hpp"
#include "noke/linalg.hpp"
#include "noke/ring.hpp"
#include "noke/invariants.hpp"
#include "noke/serialization.hpp"
#include "noke/tables.hpp"
