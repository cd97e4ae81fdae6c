#pragma once

#include "polyvar/error.hpp"
#include "polyvar/io.hpp"
#include "polyvar/maxplus_solver.hpp"
#include "polyvar/mc_engine.hpp"
#include "polyvar/model_core.hpp"
#include "polyvar/periodic_env.hpp"
#include "polyvar/pf_solver.hpp"
#include "polyvar/solvable_oracles.hpp"
#include "polyvar/special_functions.hpp"
