#pragma once

/// Ternary locality sensitive hashing over a simulated ternary CAM:
/// signatures, tables, width planning, nearest-neighbor indexes, the
/// radius ladder for approximate search, synthetic benchmarks, and the
/// accuracy model.

#include "datagen.hpp"
#include "eval.hpp"
#include "hash.hpp"
#include "index.hpp"
#include "ladder.hpp"
#include "parallel.hpp"
#include "plan.hpp"
#include "points.hpp"
#include "prob.hpp"
#include "rng.hpp"
#include "tcam.hpp"
#include "ternary.hpp"
