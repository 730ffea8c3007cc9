#include "cdfig/aero.hpp"

#include "cdfig/frames.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace cdfig {

namespace {

void require(bool ok, const char* field, const char* reason)
{
    if (!ok)
        throw std::invalid_argument(std::string("turbine.") + field + ": " + reason);
}

// [0, 1) from the top 53 bits; avoids the implementation-defined
// std::uniform_real_distribution so profiles match across standard libraries.
double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void TurbineParams::validate() const
{
    require(std::isfinite(rotor_radius) && rotor_radius > 0.0, "rotor_radius", "must be > 0");
    require(std::isfinite(air_density) && air_density > 0.0, "air_density", "must be > 0");
    require(std::isfinite(lambda_opt) && lambda_opt > 0.0, "lambda_opt", "must be > 0");
    require(cp_max > 0.0 && cp_max < kBetzLimit, "cp_max", "must lie in (0, 16/27)");
    require(std::isfinite(rated_power) && rated_power > 0.0, "rated_power", "must be > 0");
    require(std::isfinite(rated_wind) && rated_wind > 0.0, "rated_wind", "must be > 0");
    require(std::isfinite(gearbox_ratio) && gearbox_ratio > 0.0, "gearbox_ratio", "must be > 0");
    require(std::isfinite(beta_max) && beta_max > 0.0, "beta_max", "must be > 0");
    require(std::isfinite(beta_rate_limit) && beta_rate_limit > 0.0, "beta_rate_limit",
            "must be > 0");
    require(std::isfinite(pitch_kp) && pitch_kp >= 0.0, "pitch_kp", "must be >= 0");
    require(std::isfinite(pitch_ki) && pitch_ki >= 0.0, "pitch_ki", "must be >= 0");
}

double TurbineParams::swept_area() const { return kPi * rotor_radius * rotor_radius; }

double TurbineParams::optimal_power_gain() const
{
    return 0.5 * air_density * kPi * std::pow(rotor_radius, 5) * cp_max /
           (lambda_opt * lambda_opt * lambda_opt);
}

WindProfile WindProfile::constant(double speed)
{
    WindProfile w;
    w.kind_ = WindKind::constant;
    w.points_ = {{0.0, speed}};
    return w;
}

WindProfile WindProfile::piecewise(std::vector<Point> points)
{
    if (points.empty())
        throw std::invalid_argument("wind.points: at least one point required");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i].t > points[i - 1].t))
            throw std::invalid_argument("wind.points: times must be strictly increasing");
    WindProfile w;
    w.kind_ = WindKind::piecewise;
    w.points_ = std::move(points);
    return w;
}

WindProfile WindProfile::turbulent(std::vector<Point> base, double intensity, int components,
                                   double f_min, double f_max, std::uint64_t seed)
{
    WindProfile w = piecewise(std::move(base));
    if (!(intensity >= 0.0))
        throw std::invalid_argument("wind.turbulence_intensity: must be >= 0");
    if (components < 1)
        throw std::invalid_argument("wind.components: must be >= 1");
    if (!(f_min > 0.0 && f_max >= f_min))
        throw std::invalid_argument("wind.f_min/f_max: need 0 < f_min <= f_max");
    w.kind_ = WindKind::turbulent;
    w.intensity_ = intensity;
    w.n_components_ = components;
    w.f_min_ = f_min;
    w.f_max_ = f_max;
    w.seed_ = seed;
    w.draw_components();
    return w;
}

void WindProfile::reseed(std::uint64_t seed)
{
    seed_ = seed;
    if (kind_ == WindKind::turbulent)
        draw_components();
}

void WindProfile::draw_components()
{
    std::mt19937_64 rng(seed_);
    components_.clear();
    // log-spaced frequencies, equal weights giving unit RMS
    const double amp = std::sqrt(2.0 / n_components_);
    const double log_lo = std::log(f_min_);
    const double log_hi = std::log(f_max_);
    for (int k = 0; k < n_components_; ++k) {
        const double f = std::exp(log_lo + (log_hi - log_lo) * unit_uniform(rng));
        const double phase = kTwoPi * unit_uniform(rng);
        components_.push_back({amp, f, phase});
    }
}

double WindProfile::base(double t) const
{
    if (points_.size() == 1 || t <= points_.front().t)
        return points_.front().speed;
    if (t >= points_.back().t)
        return points_.back().speed;
    auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double x, const Point& p) { return x < p.t; });
    auto lo = hi - 1;
    const double u = (t - lo->t) / (hi->t - lo->t);
    return lo->speed + u * (hi->speed - lo->speed);
}

double WindProfile::speed(double t) const
{
    double v = base(t);
    if (kind_ == WindKind::turbulent) {
        double sum = 0.0;
        for (const auto& c : components_)
            sum += c.amplitude * std::sin(kTwoPi * c.frequency * t + c.phase);
        v *= 1.0 + intensity_ * sum;
    }
    return std::max(v, 0.0);
}

double power_coefficient(double lambda, double beta_deg, const CpCoefficients& c)
{
    if (!(lambda > 0.0))
        throw std::domain_error("power_coefficient: tip-speed ratio must be > 0");
    const double inv_li =
        1.0 / (lambda + 0.08 * beta_deg) - 0.035 / (beta_deg * beta_deg * beta_deg + 1.0);
    // the fitted curve is meaningless for non-positive 1/li
    if (inv_li <= 0.0)
        return 0.0;
    const double cp = c.c1 * (c.c2 * inv_li - c.c3 * beta_deg - c.c4) * std::exp(-c.c5 * inv_li) +
                      c.c6 * lambda;
    return std::max(cp, 0.0);
}

double tip_speed_ratio(double v_wind, double omega_turbine, const TurbineParams& p)
{
    if (v_wind <= 0.0)
        return 0.0;
    return p.rotor_radius * omega_turbine / v_wind;
}

double aero_torque(double v_wind, double omega_turbine, double beta_deg, const TurbineParams& p)
{
    if (v_wind <= 0.0)
        return 0.0;
    const double w = std::max(omega_turbine, kMinTurbineSpeed);
    const double lambda = p.rotor_radius * w / v_wind;
    const double power =
        0.5 * p.air_density * p.swept_area() * v_wind * v_wind * v_wind *
        power_coefficient(lambda, beta_deg, p.cp);
    const double torque = power / w;
    if (omega_turbine < kMinTurbineSpeed)
        return torque * std::max(omega_turbine, 0.0) / kMinTurbineSpeed;
    return torque;
}

double mppt_power_reference(double omega_r, const TurbineParams& p)
{
    const double w = std::max(omega_r, 0.0) / p.gearbox_ratio;
    return -std::min(p.optimal_power_gain() * w * w * w, p.rated_power);
}

double PitchController::step(double p_measured, double dt)
{
    const double error = std::abs(p_measured) - params_.rated_power;
    integral_ = std::clamp(integral_ + params_.pitch_ki * error * dt, 0.0, params_.beta_max);
    const double target = std::clamp(params_.pitch_kp * error + integral_, 0.0, params_.beta_max);
    const double max_move = params_.beta_rate_limit * dt;
    beta_ += std::clamp(target - beta_, -max_move, max_move);
    beta_ = std::clamp(beta_, 0.0, params_.beta_max);
    return beta_;
}

void PitchController::reset(double beta)
{
    beta_ = std::clamp(beta, 0.0, params_.beta_max);
    integral_ = beta_;
}

}  // namespace cdfig
