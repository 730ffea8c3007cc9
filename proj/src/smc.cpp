#include "cdfig/smc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cdfig {

namespace {

double power_gain(const MachineParams& p)
{
    const double g = kPowerScale * coupling_constant(p) * p.Vs * p.Lm1 / p.Ls1;
    if (!(std::abs(g) > 0.0) || !std::isfinite(g))
        throw std::invalid_argument("machine: C Vs Lm1 must be nonzero to invert stator powers");
    return g;
}

}  // namespace

Smoothing parse_smoothing(std::string_view name)
{
    if (name == "sign")
        return Smoothing::sign;
    if (name == "saturation")
        return Smoothing::saturation;
    if (name == "tanh")
        return Smoothing::tanh;
    throw std::invalid_argument("gains.smoothing: expected sign, saturation or tanh, got '" +
                                std::string(name) + "'");
}

std::string_view to_string(Smoothing s)
{
    switch (s) {
    case Smoothing::sign: return "sign";
    case Smoothing::saturation: return "saturation";
    case Smoothing::tanh: return "tanh";
    }
    return "?";
}

void SmcGains::validate() const
{
    if (!(std::isfinite(K1) && K1 > 0.0))
        throw std::invalid_argument("gains.K1: must be > 0");
    if (!(std::isfinite(K2) && K2 > 0.0))
        throw std::invalid_argument("gains.K2: must be > 0");
    if (!(std::isfinite(phi) && phi >= 0.0))
        throw std::invalid_argument("gains.phi: must be >= 0");
    if (phi == 0.0 && smoothing != Smoothing::sign)
        throw std::invalid_argument("gains.phi: zero boundary layer requires smoothing = sign");
    if (!(std::isfinite(Ts_control) && Ts_control > 0.0))
        throw std::invalid_argument("gains.Ts_control: must be > 0");
}

CurrentPair reference_currents(const PowerReferences& r, const MachineParams& p)
{
    const double g = power_gain(p);
    return {-r.P / g, (stator1_magnetizing_q(p) - r.Q) / g};
}

CurrentPair reference_current_rates(const PowerReferences& r, const MachineParams& p)
{
    const double g = power_gain(p);
    return {-r.dP / g, -r.dQ / g};
}

CurrentPair surfaces(const CurrentPair& refs, const CurrentPair& meas)
{
    return {refs.q - meas.q, refs.d - meas.d};
}

Dq equivalent_control(const PlantState& x, const PowerReferences& r, const MachineParams& p)
{
    const double sigma = p.sigma();
    const double s = slip(x.omega_r, p);
    const double ws = s * p.omega_s;
    const CurrentPair rates = reference_current_rates(r, p);
    return {p.Rs2 * x.i_ds2 + sigma * rates.d - ws * sigma * x.i_qs2,
            p.Rs2 * x.i_qs2 + sigma * rates.q + ws * sigma * x.i_ds2 + stator2_emf(s, p)};
}

double switching_shape(double s, Smoothing shape, double phi)
{
    switch (shape) {
    case Smoothing::sign:
        return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
    case Smoothing::saturation:
        return std::clamp(s / phi, -1.0, 1.0);
    case Smoothing::tanh:
        return std::tanh(s / phi);
    }
    return 0.0;
}

Dq switching_control(const CurrentPair& S, const SmcGains& g, const MachineParams& p)
{
    const double sigma = p.sigma();
    return {g.K2 * sigma * switching_shape(S.d, g.smoothing, g.phi),
            g.K1 * sigma * switching_shape(S.q, g.smoothing, g.phi)};
}

ControlOutput control(const PlantState& x, const PowerReferences& r, const SmcGains& g,
                      const MachineParams& p, std::optional<double> limit)
{
    const CurrentPair S =
        surfaces(reference_currents(r, p), {x.i_qs2, x.i_ds2});
    const Dq eq = equivalent_control(x, r, p);
    const Dq sw = switching_control(S, g, p);
    ControlOutput out{{eq.d + sw.d, eq.q + sw.q}, false};
    if (limit) {
        const double mag = out.v.magnitude();
        if (mag > *limit) {
            const double k = *limit / mag;
            out.v.d *= k;
            out.v.q *= k;
            out.limited = true;
        }
    }
    return out;
}

SlidingModeController::SlidingModeController(const SmcGains& g, const MachineParams& p,
                                             std::optional<double> voltage_limit)
    : gains_(g), machine_(p), limit_(voltage_limit)
{
    gains_.validate();
}

void SlidingModeController::reset()
{
    primed_ = false;
    dp_ = dq_ = 0.0;
}

SlidingModeController::Sample SlidingModeController::update(const PlantState& x, double p_ref,
                                                            double q_ref)
{
    const double ts = gains_.Ts_control;
    if (!primed_) {
        prev_p_ = p_ref;
        prev_q_ = q_ref;
        primed_ = true;
    }
    const double alpha = 1.0 - std::exp(-ts / (2.0 * ts));
    dp_ += alpha * ((p_ref - prev_p_) / ts - dp_);
    dq_ += alpha * ((q_ref - prev_q_) / ts - dq_);
    prev_p_ = p_ref;
    prev_q_ = q_ref;

    Sample smp;
    smp.refs = {p_ref, q_ref, dp_, dq_};
    smp.i_ref = reference_currents(smp.refs, machine_);
    smp.S = surfaces(smp.i_ref, {x.i_qs2, x.i_ds2});
    smp.out = control(x, smp.refs, gains_, machine_, limit_);
    return smp;
}

}  // namespace cdfig
