#pragma once

#include "pwdens/concentration.hpp"
#include "pwdens/error.hpp"
#include "pwdens/harness.hpp"
#include "pwdens/numeric.hpp"
#include "pwdens/pointset.hpp"
#include "pwdens/pwkernel.hpp"
#include "pwdens/spectrum.hpp"
#include "pwdens/width.hpp"
#include "pwdens/windows.hpp"
