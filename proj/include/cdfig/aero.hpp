#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace cdfig {

inline constexpr double kBetzLimit = 16.0 / 27.0;

// Cp = c1 (c2/li - c3 beta - c4) exp(-c5/li) + c6 lambda,
// 1/li = 1/(lambda + 0.08 beta) - 0.035/(beta^3 + 1)
struct CpCoefficients
{
    double c1 = 0.5176;
    double c2 = 116.0;
    double c3 = 0.4;
    double c4 = 5.0;
    double c5 = 21.0;
    double c6 = 0.0068;
};

struct TurbineParams
{
    double rotor_radius = 31.0;     // m
    double air_density = 1.225;     // kg/m^3
    double lambda_opt = 8.1;
    double cp_max = 0.48;
    double rated_power = 1.5e6;     // W
    double rated_wind = 11.9;       // m/s
    double gearbox_ratio = 30.0;    // generator speed / rotor speed
    double beta_max = 30.0;         // deg
    double beta_rate_limit = 5.0;   // deg/s
    double pitch_kp = 2e-6;         // deg/W
    double pitch_ki = 4e-6;         // deg/(W s)
    CpCoefficients cp;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
    double swept_area() const;
    // k_opt = 0.5 rho pi R^5 cp_max / lambda_opt^3
    double optimal_power_gain() const;
};

enum class WindKind { constant, piecewise, turbulent };

// Deterministic in (t, seed). Turbulence is a base profile scaled by
// (1 + intensity * sum_k a_k sin(2 pi f_k t + phi_k)), components drawn once
// from a seeded mt19937_64.
class WindProfile
{
public:
    struct Point
    {
        double t;
        double speed;
    };

    static WindProfile constant(double speed);
    static WindProfile piecewise(std::vector<Point> points);
    static WindProfile turbulent(std::vector<Point> base, double intensity, int components,
                                 double f_min, double f_max, std::uint64_t seed);

    double speed(double t) const;
    WindKind kind() const { return kind_; }

    void reseed(std::uint64_t seed);

private:
    struct Component
    {
        double amplitude;
        double frequency;
        double phase;
    };

    double base(double t) const;
    void draw_components();

    WindKind kind_ = WindKind::constant;
    std::vector<Point> points_;
    double intensity_ = 0.0;
    int n_components_ = 0;
    double f_min_ = 0.0;
    double f_max_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<Component> components_;
};

// Throws std::domain_error for lambda <= 0.
double power_coefficient(double lambda, double beta_deg, const CpCoefficients& c = {});

inline constexpr double kMinTurbineSpeed = 0.1;  // rad/s

double tip_speed_ratio(double v_wind, double omega_turbine, const TurbineParams& p);

// Rotor-side aerodynamic torque, faded linearly to zero below kMinTurbineSpeed.
double aero_torque(double v_wind, double omega_turbine, double beta_deg, const TurbineParams& p);

// Generator-sign power target: -min(k_opt w^3, rated) with w = omega_r / gearbox.
double mppt_power_reference(double omega_r, const TurbineParams& p);

// PI on (|p| - rated) with clamp, slew limit and a clamped integrator.
class PitchController
{
public:
    explicit PitchController(const TurbineParams& p) : params_(p) {}

    double step(double p_measured, double dt);
    double beta() const { return beta_; }
    void reset(double beta = 0.0);

private:
    TurbineParams params_;
    double integral_ = 0.0;
    double beta_ = 0.0;
};

}  // namespace cdfig
