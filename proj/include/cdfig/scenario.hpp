#pragma once

#include "cdfig/aero.hpp"
#include "cdfig/plant.hpp"
#include "cdfig/smc.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cdfig {

// Load or validation failure; the message starts with the offending field path.
class ScenarioError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class ConverterMode { averaged, switched };
enum class ReferenceMode { mppt, explicit_schedule };
enum class SpeedMode { free, fixed };

// Piecewise-constant setpoint with optional linear transitions of length `ramp`.
struct StepSchedule
{
    struct Step
    {
        double t;
        double value;
    };

    std::vector<Step> steps;
    double ramp = 0.0;

    double value(double t) const;
    bool empty() const { return steps.empty(); }
};

struct ConverterConfig
{
    ConverterMode mode = ConverterMode::averaged;
    double Ts = 1e-4;          // switching period, s
    double sub_step = 1e-6;    // plant step in switched mode, s
    std::optional<double> v_in;  // input phase peak, defaults to machine.Vs
    std::string gate_dump;     // optional path for the gate stream
};

struct Scenario
{
    double duration = 1.0;
    double dt_plant = 1e-4;
    int log_decimation = 10;   // control periods per log row
    std::uint64_t seed = 1;
    std::string output_path;
    bool log_abc = true;
    std::optional<double> metrics_start;  // defaults to duration / 2

    ReferenceMode reference_mode = ReferenceMode::mppt;
    StepSchedule p_schedule;   // Ps1_ref, explicit mode only
    StepSchedule q_schedule;   // Qs1_ref, both modes (empty = 0)

    SpeedMode speed_mode = SpeedMode::free;
    double omega_r0 = 0.0;

    MachineParams machine;
    TurbineParams turbine;
    WindProfile wind = WindProfile::constant(0.0);
    SmcGains gains;
    ConverterConfig converter;

    double Ts_control() const { return gains.Ts_control; }
    double converter_input_voltage() const { return converter.v_in.value_or(machine.Vs); }
    double plant_step() const;
    double metrics_window_start() const { return metrics_start.value_or(0.5 * duration); }

    // Cross-section checks; throws ScenarioError.
    void validate() const;
};

using Override = std::pair<std::string, std::string>;

// Sections: run, machine, turbine, wind, gains, converter. Unknown keys are errors.
Scenario parse_scenario(const std::string& text, const std::vector<Override>& overrides = {});
Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<Override>& overrides = {});

}  // namespace cdfig
