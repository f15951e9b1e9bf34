#pragma once

#include "hybridsmooth/analysis.hpp"
#include "hybridsmooth/anomaly_basis.hpp"
#include "hybridsmooth/bhm.hpp"
#include "hybridsmooth/cycle_separation.hpp"
#include "hybridsmooth/detection.hpp"
#include "hybridsmooth/diagnostics.hpp"
#include "hybridsmooth/errors.hpp"
#include "hybridsmooth/hybrid_solver.hpp"
#include "hybridsmooth/json_format.hpp"
#include "hybridsmooth/linalg.hpp"
#include "hybridsmooth/penalty_select.hpp"
#include "hybridsmooth/random.hpp"
#include "hybridsmooth/simulation.hpp"
#include "hybridsmooth/spline_gp.hpp"
#include "hybridsmooth/timeseries.hpp"
