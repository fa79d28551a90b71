#pragma once

#include "spats/criteria.hpp"
#include "spats/fock.hpp"
#include "spats/homodyne.hpp"
#include "spats/parallel.hpp"
#include "spats/phasespace.hpp"
#include "spats/regions.hpp"
#include "spats/rng.hpp"
#include "spats/states.hpp"
#include "spats/tomography.hpp"
