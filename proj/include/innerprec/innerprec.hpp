#pragma once

#include "innerprec/errors.hpp"
#include "innerprec/vector_ops.hpp"
#include "innerprec/sparse_matrix.hpp"
#include "innerprec/dense.hpp"
#include "innerprec/matrix_market.hpp"
#include "innerprec/splitting.hpp"
#include "innerprec/analysis.hpp"
#include "innerprec/krylov.hpp"
#include "innerprec/lsq.hpp"
