#pragma once

#include "dle/analysis.hpp"
#include "dle/bdf.hpp"
#include "dle/dense.hpp"
#include "dle/errors.hpp"
#include "dle/krylov.hpp"
#include "dle/lowrank.hpp"
#include "dle/matrix_market.hpp"
#include "dle/problems.hpp"
#include "dle/quadrature.hpp"
#include "dle/rational.hpp"
#include "dle/solvers.hpp"
#include "dle/sparse.hpp"
