#pragma once

#include "magpl/cvec_ineq.hpp"
#include "magpl/quadrature.hpp"
#include "magpl/rate_fit.hpp"
#include "magpl/instanton.hpp"
#include "magpl/grid.hpp"
#include "magpl/field.hpp"
#include "magpl/mountain_pass.hpp"
#include "magpl/config.hpp"
#include "magpl/runner.hpp"
