#pragma once

// Robust portfolio game under a Hull-White short rate with power utility.

#include "robustgame/closedform.hpp"
#include "robustgame/curve.hpp"
#include "robustgame/errors.hpp"
#include "robustgame/gamma_set.hpp"
#include "robustgame/hjbi.hpp"
#include "robustgame/isaacs.hpp"
#include "robustgame/model.hpp"
#include "robustgame/montecarlo.hpp"
#include "robustgame/quadrature.hpp"
#include "robustgame/random.hpp"
#include "robustgame/restricted.hpp"
