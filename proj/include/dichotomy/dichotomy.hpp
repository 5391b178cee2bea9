#pragma once

#include "dichotomy/config.hpp"
#include "dichotomy/continuation.hpp"
#include "dichotomy/cross_solver.hpp"
#include "dichotomy/eigs.hpp"
#include "dichotomy/errors.hpp"
#include "dichotomy/grid.hpp"
#include "dichotomy/io.hpp"
#include "dichotomy/limit_harness.hpp"
#include "dichotomy/linstab.hpp"
#include "dichotomy/model.hpp"
#include "dichotomy/noise.hpp"
#include "dichotomy/pipeline.hpp"
#include "dichotomy/rd_solver.hpp"
#include "dichotomy/steady.hpp"
