#pragma once

#include "cdfig/frames.hpp"
#include "cdfig/plant.hpp"

#include <optional>
#include <string_view>

namespace cdfig {

enum class Smoothing { sign, saturation, tanh };

Smoothing parse_smoothing(std::string_view name);
std::string_view to_string(Smoothing s);

struct SmcGains
{
    double K1 = 4.0e5;   // A/s, q axis
    double K2 = 4.0e5;   // A/s, d axis
    double phi = 40.0;   // A, boundary-layer half-width
    Smoothing smoothing = Smoothing::saturation;
    double Ts_control = 1e-4;

    void validate() const;
};

struct PowerReferences
{
    double P = 0.0;      // Ps1_ref, W
    double Q = 0.0;      // Qs1_ref, var
    double dP = 0.0;     // W/s
    double dQ = 0.0;     // var/s
};

struct CurrentPair
{
    double q = 0.0;
    double d = 0.0;
};

// Exact inverse of stator1_powers. Throws std::invalid_argument if C Vs Lm1 == 0.
CurrentPair reference_currents(const PowerReferences& r, const MachineParams& p);
// d/dt of reference_currents (the map is affine in P and Q).
CurrentPair reference_current_rates(const PowerReferences& r, const MachineParams& p);

// S = reference - measurement.
CurrentPair surfaces(const CurrentPair& refs, const CurrentPair& meas);

// Control holding dS/dt = 0 on the nominal model.
Dq equivalent_control(const PlantState& x, const PowerReferences& r, const MachineParams& p);

double switching_shape(double s, Smoothing shape, double phi);
// K sigma shape(S), per axis.
Dq switching_control(const CurrentPair& S, const SmcGains& g, const MachineParams& p);

struct ControlOutput
{
    Dq v;
    bool limited = false;
};

// Equivalent plus switching part; with `limit`, the vector is scaled down to
// that magnitude keeping its direction.
ControlOutput control(const PlantState& x, const PowerReferences& r, const SmcGains& g,
                      const MachineParams& p, std::optional<double> limit = std::nullopt);

// Sampled regulator: estimates reference derivatives with a filtered backward
// difference (time constant 2 Ts_control) and evaluates `control` once per call.
class SlidingModeController
{
public:
    SlidingModeController(const SmcGains& g, const MachineParams& p,
                          std::optional<double> voltage_limit = std::nullopt);

    struct Sample
    {
        ControlOutput out;
        PowerReferences refs;
        CurrentPair i_ref;
        CurrentPair S;
    };

    Sample update(const PlantState& x, double p_ref, double q_ref);
    void reset();

private:
    SmcGains gains_;
    MachineParams machine_;
    std::optional<double> limit_;
    bool primed_ = false;
    double prev_p_ = 0.0;
    double prev_q_ = 0.0;
    double dp_ = 0.0;
    double dq_ = 0.0;
};

}  // namespace cdfig
