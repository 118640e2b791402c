// Umbrella header.
#pragma once

#include "rpk/classical.hpp"
#include "rpk/config.hpp"
#include "rpk/fft.hpp"
#include "rpk/fit.hpp"
#include "rpk/grid.hpp"
#include "rpk/hagedorn.hpp"
#include "rpk/harness.hpp"
#include "rpk/io.hpp"
#include "rpk/linalg.hpp"
#include "rpk/packets.hpp"
#include "rpk/potential.hpp"
#include "rpk/rk4.hpp"
#include "rpk/rotation.hpp"
#include "rpk/spectral.hpp"
#include "rpk/version.hpp"
