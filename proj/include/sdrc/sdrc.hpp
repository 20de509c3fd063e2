#pragma once

#include "sdrc/error.hpp"
#include "sdrc/fft.hpp"
#include "sdrc/random.hpp"
#include "sdrc/spectral.hpp"
#include "sdrc/filters.hpp"
#include "sdrc/sdr.hpp"
#include "sdrc/info_geometry.hpp"
#include "sdrc/gen_model.hpp"
#include "sdrc/resampling.hpp"
#include "sdrc/invariance.hpp"
#include "sdrc/harness.hpp"
#include "sdrc/io.hpp"
