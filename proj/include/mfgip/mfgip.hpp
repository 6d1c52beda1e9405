#pragma once

#include "mfgip/error.hpp"
#include "mfgip/grid.hpp"
#include "mfgip/spectral_basis.hpp"
#include "mfgip/running_cost.hpp"
#include "mfgip/discrete_ops.hpp"
#include "mfgip/forward_solver.hpp"
#include "mfgip/modal_propagator.hpp"
#include "mfgip/linearized_solver.hpp"
#include "mfgip/probes.hpp"
#include "mfgip/identity_checker.hpp"
#include "mfgip/measurement.hpp"
#include "mfgip/inverse_reconstructor.hpp"
#include "mfgip/config.hpp"
#include "mfgip/report.hpp"
#include "mfgip/experiments.hpp"
#include "mfgip/acceptance.hpp"
