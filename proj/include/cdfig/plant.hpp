#pragma once

#include "cdfig/frames.hpp"

namespace cdfig {

// Three-phase power from amplitude-invariant d-q quantities: P = k (vd id + vq iq).
// Every power in the model (Ps1, Qs1, Ps2, Qs2) is scaled by this one constant.
inline constexpr double kPowerScale = 1.5;

// Defaults: a 1.5 MW, 690 V, 50 Hz cascade with two identical 2-pole-pair machines
// (3 pu magnetizing, 0.1 pu leakage, 0.01 pu stator-2 resistance).
struct MachineParams
{
    double Rs2 = 3.2e-3;   // ohm
    double Ls1 = 3.1e-3;   // H
    double Ls2 = 3.1e-3;
    double Lm1 = 3.0e-3;
    double Lm2 = 3.0e-3;
    double Lr1 = 3.1e-3;
    double Lr2 = 3.1e-3;
    int p1 = 2;
    int p2 = 2;
    double J = 1000.0;       // kg m^2, generator side
    double f_visc = 1.7;     // N m s
    double Vs = 563.38;      // V, grid phase peak
    double omega_s = 100.0 * kPi;  // rad/s

    // Throws std::invalid_argument naming "machine.<field>".
    void validate() const;
    int pole_pairs() const { return p1 + p2; }
    // Ls2 - C Lm2
    double sigma() const;
    double synchronous_speed() const { return omega_s / pole_pairs(); }
};

struct PlantState
{
    double i_ds2 = 0.0;    // A
    double i_qs2 = 0.0;    // A
    double omega_r = 0.0;  // rad/s, mechanical
    double theta_s = 0.0;  // rad, grid voltage angle
    double theta_2 = 0.0;  // rad, second-stator frame angle

    PlantState& operator+=(const PlantState& o);
    friend PlantState operator+(PlantState a, const PlantState& b) { return a += b; }
    friend PlantState operator*(double k, PlantState a);

    bool finite() const;
    void wrap_angles();
};

// C = Lm2 / (Lr1 + Lr2 - Lm1^2/Ls1)
double coupling_constant(const MachineParams& p);

// s = (omega_s - (p1 + p2) omega_r) / omega_s
double slip(double omega_r, const MachineParams& p);
double omega_r_at_slip(double s, const MachineParams& p);

// Back-EMF seen by the second stator q axis: s C Lm1 Vs / Ls1.
double stator2_emf(double s, const MachineParams& p);

// Reduced electrical model plus one-mass shaft. `shaft_torque` is the driving
// torque referred to the generator shaft. Throws std::runtime_error if the
// state or result is non-finite.
PlantState derivatives(const PlantState& x, double v_ds2, double v_qs2, double shaft_torque,
                       const MachineParams& p);

struct StatorPowers
{
    double P = 0.0;
    double Q = 0.0;
};

StatorPowers stator1_powers(const PlantState& x, const MachineParams& p);

// Stator-1 reactive power drawn with zero second-stator current.
double stator1_magnetizing_q(const MachineParams& p);

// T_em = -(p1 + p2) Ps1 / omega_s; positive (braking) when Ps1 < 0.
double electromagnetic_torque(double ps1, const MachineParams& p);

struct PowerFlow
{
    double Ps2 = 0.0;
    double Qs2 = 0.0;
    double Pgrid = 0.0;
    double Qgrid = 0.0;
};

PowerFlow secondary_and_grid_powers(const PlantState& x, double v_ds2, double v_qs2,
                                    const MachineParams& p);

double stator2_copper_loss(const PlantState& x, const MachineParams& p);

struct PhaseQuantities
{
    ThreePhase voltage;
    ThreePhase current;
};

// Stator 1: voltage on the q axis of the flux frame, which sits at theta_s - pi/2.
// Phase a voltage is Vs cos(theta_s).
PhaseQuantities reconstruct_stator1_abc(const PlantState& x, const MachineParams& p);

// Stator 2 quantities in its own slip-frequency frame (angle theta_2).
PhaseQuantities reconstruct_stator2_abc(const PlantState& x, double v_ds2, double v_qs2);

// Grid (converter input) phase voltages at angle theta_s.
ThreePhase grid_voltage(double theta_s, double magnitude);

}  // namespace cdfig
