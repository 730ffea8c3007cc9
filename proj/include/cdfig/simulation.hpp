#pragma once

#include "cdfig/metrics.hpp"
#include "cdfig/plant.hpp"
#include "cdfig/scenario.hpp"
#include "cdfig/timeseries.hpp"

#include <stdexcept>

namespace cdfig {

// Runtime abort: non-finite state or a gate-constraint breach in switched mode.
class SimulationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RunResult
{
    TimeSeriesLog log;
    RunMetrics metrics;
    PlantState final_state;
};

// Closed loop wind -> aero -> MPPT/pitch -> SMC -> converter -> plant. The
// plant is integrated with RK4 at Scenario::plant_step(); the controller and
// pitch run every Ts_control with a zero-order hold. Identical scenarios give
// bit-identical logs.
RunResult run(const Scenario& scenario);

}  // namespace cdfig
