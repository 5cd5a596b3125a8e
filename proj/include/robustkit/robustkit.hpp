#pragma once

#include "robustkit/cases.hpp"
#include "robustkit/chi_square.hpp"
#include "robustkit/error.hpp"
#include "robustkit/expr.hpp"
#include "robustkit/io.hpp"
#include "robustkit/lp/branch_and_bound.hpp"
#include "robustkit/lp/simplex.hpp"
#include "robustkit/lp/standard_lp.hpp"
#include "robustkit/lp/verify.hpp"
#include "robustkit/model.hpp"
#include "robustkit/solvers.hpp"
#include "robustkit/sweep.hpp"
#include "robustkit/transform.hpp"
#include "robustkit/uncset.hpp"
