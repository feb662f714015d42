#pragma once

#include "rimk/baselines.hpp"
#include "rimk/errors.hpp"
#include "rimk/harness/emit.hpp"
#include "rimk/harness/experiment.hpp"
#include "rimk/harness/matrix_market.hpp"
#include "rimk/harness/synthetic.hpp"
#include "rimk/is_krylov.hpp"
#include "rimk/linalg.hpp"
#include "rimk/random.hpp"
#include "rimk/rim_as.hpp"
#include "rimk/sketch.hpp"
#include "rimk/solver.hpp"
