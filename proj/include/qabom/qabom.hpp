// Umbrella header.
#pragma once

#include "qabom/bits.hpp"
#include "qabom/datagen.hpp"
#include "qabom/density.hpp"
#include "qabom/distribution.hpp"
#include "qabom/ising.hpp"
#include "qabom/metrics.hpp"
#include "qabom/nelder_mead.hpp"
#include "qabom/noise.hpp"
#include "qabom/rng.hpp"
#include "qabom/serialize.hpp"
#include "qabom/state.hpp"
#include "qabom/thermalize.hpp"
#include "qabom/train.hpp"
#include "qabom/version.hpp"
