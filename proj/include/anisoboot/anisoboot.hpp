#pragma once

// Everything in one include.

#include "anisoboot/bounds.hpp"
#include "anisoboot/droplets.hpp"
#include "anisoboot/dynamics.hpp"
#include "anisoboot/enhancement.hpp"
#include "anisoboot/error.hpp"
#include "anisoboot/estimator.hpp"
#include "anisoboot/lattice.hpp"
#include "anisoboot/parallel.hpp"
#include "anisoboot/regions.hpp"
#include "anisoboot/rng.hpp"
#include "anisoboot/verify.hpp"
