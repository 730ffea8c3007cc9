#include "cdfig/mc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cdfig {

namespace {

constexpr double kSixty = kPi / 3.0;

// Output rail pattern for inverter vector k: true = positive rail.
// V1 = (P,N,N) at 0, V2 = (P,P,N) at 60 deg, ...
constexpr std::array<std::array<bool, 3>, 6> kInverterRails{{
    {true, false, false},
    {true, true, false},
    {false, true, false},
    {false, true, true},
    {false, false, true},
    {true, false, true},
}};

struct RailPair
{
    InputPhase p;
    InputPhase n;
};

// Rectifier vector k: positive rail on p, negative rail on n.
constexpr std::array<RailPair, 6> kRectifierRails{{
    {InputPhase::a, InputPhase::b},
    {InputPhase::a, InputPhase::c},
    {InputPhase::b, InputPhase::c},
    {InputPhase::b, InputPhase::a},
    {InputPhase::c, InputPhase::a},
    {InputPhase::c, InputPhase::b},
}};

int next_sector(int k) { return k % 6 + 1; }

SwitchMatrix state_gates(int inverter_k, int rectifier_k)
{
    const auto& rails = kInverterRails[inverter_k - 1];
    const RailPair pair = kRectifierRails[rectifier_k - 1];
    SwitchMatrix m;
    for (int out = 0; out < 3; ++out)
        m.connect(out, rails[out] ? pair.p : pair.n);
    return m;
}

// Input phase shared by the two rectifier vectors bounding a sector.
InputPhase common_phase(int rectifier_k)
{
    const RailPair g = kRectifierRails[rectifier_k - 1];
    const RailPair d = kRectifierRails[next_sector(rectifier_k) - 1];
    if (g.p == d.p)
        return g.p;
    return g.n;
}

double component(const ThreePhase& x, int idx)
{
    return idx == 0 ? x.a : (idx == 1 ? x.b : x.c);
}

double& component(ThreePhase& x, int idx)
{
    return idx == 0 ? x.a : (idx == 1 ? x.b : x.c);
}

}  // namespace

SwitchMatrix SwitchMatrix::all_on(InputPhase in)
{
    SwitchMatrix m;
    for (int out = 0; out < 3; ++out)
        m.connect(out, in);
    return m;
}

void SwitchMatrix::connect(int out, InputPhase in)
{
    for (int x = 0; x < 3; ++x)
        gate[x][out] = (x == static_cast<int>(in));
}

std::string_view to_string(GateCheck c)
{
    switch (c) {
    case GateCheck::ok: return "ok";
    case GateCheck::input_short: return "InputShort";
    case GateCheck::output_open: return "OutputOpen";
    }
    return "?";
}

GateCheck validate(const SwitchMatrix& m)
{
    for (int out = 0; out < 3; ++out) {
        int closed = 0;
        for (int in = 0; in < 3; ++in)
            closed += m.gate[in][out] ? 1 : 0;
        if (closed > 1)
            return GateCheck::input_short;
        if (closed == 0)
            return GateCheck::output_open;
    }
    return GateCheck::ok;
}

InverterDuty inverter_duties_at(double m_v, double theta_v, int sector_v)
{
    InverterDuty d;
    d.sector_v = sector_v;
    d.theta_v = theta_v;
    d.m_v = m_v;
    d.d_alpha = m_v * std::sin(kSixty - theta_v);
    d.d_beta = m_v * std::sin(theta_v);
    d.d_zero = 1.0 - (d.d_alpha + d.d_beta);
    // rounding at m_v = 1, theta_v = pi/6
    if (d.d_zero < 0.0)
        d.d_zero = 0.0;
    return d;
}

InverterDuty inverter_duties(const AlphaBeta& v_ref, double v_in_magnitude)
{
    if (!(v_in_magnitude > 0.0))
        throw std::invalid_argument("inverter_duties: input voltage magnitude must be > 0");
    double m = v_ref.magnitude() / (kMaxTransferRatio * v_in_magnitude);
    bool over = false;
    if (m > 1.0) {
        m = 1.0;
        over = true;
    }
    const SectorPosition pos = sector(v_ref.angle());
    InverterDuty d = inverter_duties_at(m, pos.in_sector, pos.index);
    d.overmodulation = over;
    return d;
}

RectifierDuty rectifier_duties(double i_ref_angle, double m_c)
{
    m_c = std::clamp(m_c, 0.0, 1.0);
    const SectorPosition pos = sector(i_ref_angle + kPi / 6.0);
    RectifierDuty d;
    d.sector_c = pos.index;
    d.theta_c = pos.in_sector;
    d.m_c = m_c;
    d.d_gamma = m_c * std::sin(kSixty - pos.in_sector);
    d.d_delta = m_c * std::sin(pos.in_sector);
    d.d_zero_c = std::max(0.0, 1.0 - (d.d_gamma + d.d_delta));
    return d;
}

AlphaBeta inverter_vector(int k, double v_dc)
{
    const double a = (k - 1) * kSixty;
    const double mag = (2.0 / 3.0) * v_dc;
    return {mag * std::cos(a), mag * std::sin(a)};
}

AlphaBeta rectifier_vector(int k)
{
    const double a = -kPi / 6.0 + (k - 1) * kSixty;
    const double mag = 2.0 / std::sqrt(3.0);
    return {mag * std::cos(a), mag * std::sin(a)};
}

ModulationCommand combine(const RectifierDuty& r, const InverterDuty& i)
{
    ModulationCommand cmd;
    cmd.rectifier = r;
    cmd.inverter = i;
    cmd.d_ag = i.d_alpha * r.d_gamma;
    cmd.d_ad = i.d_alpha * r.d_delta;
    cmd.d_bg = i.d_beta * r.d_gamma;
    cmd.d_bd = i.d_beta * r.d_delta;
    cmd.d_0 = std::max(0.0, 1.0 - (cmd.d_ag + cmd.d_ad + cmd.d_bg + cmd.d_bd));

    const int kv = i.sector_v;
    const int kc = r.sector_c;
    const SwitchMatrix ag = state_gates(kv, kc);
    const SwitchMatrix bg = state_gates(next_sector(kv), kc);
    const SwitchMatrix bd = state_gates(next_sector(kv), next_sector(kc));
    const SwitchMatrix ad = state_gates(kv, next_sector(kc));
    const SwitchMatrix zero = SwitchMatrix::all_on(common_phase(kc));

    cmd.sequence = {
        {zero, 0.25 * cmd.d_0},  {ag, 0.5 * cmd.d_ag}, {bg, 0.5 * cmd.d_bg},
        {bd, 0.5 * cmd.d_bd},    {ad, 0.5 * cmd.d_ad}, {zero, 0.5 * cmd.d_0},
        {ad, 0.5 * cmd.d_ad},    {bd, 0.5 * cmd.d_bd}, {bg, 0.5 * cmd.d_bg},
        {ag, 0.5 * cmd.d_ag},    {zero, 0.25 * cmd.d_0},
    };
    return cmd;
}

ModulationCommand modulate(const AlphaBeta& v_ref, const ThreePhase& v_in)
{
    const AlphaBeta vin = clarke(v_in);
    return combine(rectifier_duties(vin.angle(), 1.0), inverter_duties(v_ref, vin.magnitude()));
}

ThreePhase apply_gates(const SwitchMatrix& m, const ThreePhase& v_in)
{
    ThreePhase out;
    for (int o = 0; o < 3; ++o) {
        double v = 0.0;
        for (int x = 0; x < 3; ++x)
            if (m.gate[x][o])
                v = component(v_in, x);
        component(out, o) = v;
    }
    return out;
}

SwitchedSample switched_output(const ModulationCommand& cmd, const ThreePhase& v_in,
                               double t_in_period, double Ts)
{
    if (!(Ts > 0.0) || !(t_in_period >= 0.0) || !(t_in_period < Ts))
        throw std::runtime_error("switched_output: time outside the switching period");
    if (cmd.sequence.empty())
        throw std::runtime_error("switched_output: empty switching sequence");
    const double u = t_in_period / Ts;
    double edge = 0.0;
    const SequenceStep* active = &cmd.sequence.back();
    for (const auto& step : cmd.sequence) {
        if (step.dwell < 0.0)
            throw std::runtime_error("switched_output: negative dwell in sequence");
        edge += step.dwell;
        if (u < edge) {
            active = &step;
            break;
        }
    }
    const GateCheck check = validate(active->gates);
    if (check != GateCheck::ok) {
        std::ostringstream msg;
        msg << "switched_output: gate violation " << to_string(check) << " at t=" << t_in_period;
        throw std::runtime_error(msg.str());
    }
    return {active->gates, apply_gates(active->gates, v_in)};
}

AveragedOutput averaged_output(const Dq& v_ref, const ThreePhase& v_in)
{
    const double limit = kMaxTransferRatio * clarke(v_in).magnitude();
    const double mag = v_ref.magnitude();
    if (mag <= limit)
        return {v_ref, false};
    const double k = limit / mag;
    return {{v_ref.d * k, v_ref.q * k}, true};
}

ThreePhase input_current(const SwitchMatrix& m, const ThreePhase& i_out)
{
    ThreePhase in;
    for (int x = 0; x < 3; ++x) {
        double sum = 0.0;
        for (int o = 0; o < 3; ++o)
            if (m.gate[x][o])
                sum += component(i_out, o);
        component(in, x) = sum;
    }
    return in;
}

}  // namespace cdfig
