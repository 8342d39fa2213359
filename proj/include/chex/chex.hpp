#pragma once

#include "chex/channels.hpp"
#include "chex/definetti.hpp"
#include "chex/linalg.hpp"
#include "chex/random.hpp"
#include "chex/serialization.hpp"
#include "chex/states.hpp"
#include "chex/tolerances.hpp"
#include "chex/tomography.hpp"
