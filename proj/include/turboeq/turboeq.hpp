#pragma once

#include "turboeq/channel.hpp"
#include "turboeq/coding.hpp"
#include "turboeq/common.hpp"
#include "turboeq/constellation.hpp"
#include "turboeq/equalizer.hpp"
#include "turboeq/harness.hpp"
#include "turboeq/io.hpp"
#include "turboeq/lut_cache.hpp"
#include "turboeq/mapping.hpp"
#include "turboeq/mutual_info.hpp"
#include "turboeq/prediction.hpp"
