#pragma once

#include "dstbm/decision.hpp"
#include "dstbm/engine.hpp"
#include "dstbm/error.hpp"
#include "dstbm/experiment.hpp"
#include "dstbm/sensing.hpp"
#include "dstbm/stochastic.hpp"
#include "dstbm/trace.hpp"
