#include "cdfig/simulation.hpp"

#include "cdfig/aero.hpp"
#include "cdfig/mc.hpp"
#include "cdfig/rk4.hpp"
#include "cdfig/smc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cdfig {

namespace {

std::string describe(const PlantState& x)
{
    std::ostringstream out;
    out.precision(10);
    out << "i_ds2=" << x.i_ds2 << " i_qs2=" << x.i_qs2 << " omega_r=" << x.omega_r
        << " theta_s=" << x.theta_s << " theta_2=" << x.theta_2;
    return out.str();
}

// Plant right-hand side with the converter voltage held over a step.
struct ClosedLoopPlant
{
    const Scenario& sc;
    double v_ds2 = 0.0;
    double v_qs2 = 0.0;
    double beta = 0.0;

    PlantState operator()(double t, const PlantState& x) const
    {
        double shaft = 0.0;
        const bool fixed = sc.speed_mode == SpeedMode::fixed;
        if (!fixed) {
            const double g = sc.turbine.gearbox_ratio;
            shaft = aero_torque(sc.wind.speed(t), x.omega_r / g, beta, sc.turbine) / g;
        }
        PlantState dx = derivatives(x, v_ds2, v_qs2, shaft, sc.machine);
        if (fixed)
            dx.omega_r = 0.0;
        return dx;
    }
};

struct ReachingCounter
{
    double phi = 0.0;
    bool primed = false;
    CurrentPair prev;
    long outside = 0;
    long good = 0;

    void add(const CurrentPair& s)
    {
        if (primed) {
            for (auto [a, b] : {std::pair{prev.d, s.d}, std::pair{prev.q, s.q}}) {
                if (std::abs(a) <= phi)
                    continue;
                ++outside;
                if (a * (b - a) < 0.0)
                    ++good;
            }
        }
        prev = s;
        primed = true;
    }
};

void dump_gates(std::ofstream& out, double t0, double Ts, const ModulationCommand& cmd)
{
    double edge = 0.0;
    for (const auto& step : cmd.sequence) {
        out << t0 + edge * Ts << ',' << step.dwell * Ts;
        for (int in = 0; in < 3; ++in)
            for (int o = 0; o < 3; ++o)
                out << ',' << (step.gates.gate[in][o] ? 1 : 0);
        out << '\n';
        edge += step.dwell;
    }
}

}  // namespace

RunResult run(const Scenario& sc)
{
    sc.validate();
    const auto wall_start = std::chrono::steady_clock::now();

    const MachineParams& mp = sc.machine;
    const TurbineParams& tp = sc.turbine;
    const double Tc = sc.Ts_control();
    const long n_ctrl = std::max(1L, std::lround(sc.duration / Tc));
    const double h = sc.plant_step();
    const bool switched = sc.converter.mode == ConverterMode::switched;
    const double v_in = sc.converter_input_voltage();

    SlidingModeController smc(sc.gains, mp, kMaxTransferRatio * v_in);
    PitchController pitch(tp);
    ReachingCounter reaching;
    reaching.phi = sc.gains.phi;
    ClosedLoopPlant plant{sc};

    std::ofstream gate_out;
    if (switched && !sc.converter.gate_dump.empty()) {
        gate_out.open(sc.converter.gate_dump);
        if (!gate_out)
            throw SimulationError("cannot open gate dump '" + sc.converter.gate_dump + "'");
        gate_out.precision(17);
        gate_out << "t,dwell,aA,aB,aC,bA,bB,bC,cA,cB,cC\n";
    }

    std::vector<std::string> names = core_columns();
    if (sc.log_abc)
        names.insert(names.end(), abc_columns().begin(), abc_columns().end());
    TimeSeriesLog log(names);
    log.reserve(static_cast<std::size_t>(n_ctrl / sc.log_decimation + 1));
    std::vector<double> row;
    row.reserve(names.size());

    RunResult result;
    long violations = 0;
    long overmod_periods = 0;

    PlantState x;
    x.omega_r = sc.omega_r0;
    PlantState last_good = x;

    try {
        for (long n = 0; n < n_ctrl; ++n) {
            const double t = static_cast<double>(n) * Tc;
            const PlantState xn = x;

            // sample
            const double g = tp.gearbox_ratio;
            const double wind = sc.wind.speed(t);
            const double w_turb = xn.omega_r / g;
            const double p_aero = aero_torque(wind, w_turb, pitch.beta(), tp) * w_turb;
            const double s = slip(xn.omega_r, mp);

            double p_ref = 0.0;
            if (sc.reference_mode == ReferenceMode::mppt)
                p_ref = mppt_power_reference(xn.omega_r, tp) / std::max(1.0 - s, 0.1);
            else
                p_ref = sc.p_schedule.value(t);
            const double q_ref = sc.q_schedule.value(t);

            const auto ctl = smc.update(xn, p_ref, q_ref);
            reaching.add(ctl.S);
            plant.beta = pitch.step(p_aero, Tc);

            bool overmod = ctl.out.limited;
            Dq v_avg;
            double va_in = 0.0;
            double ia_in = 0.0;

            if (!switched) {
                const ThreePhase vin = grid_voltage(xn.theta_s, v_in);
                const AveragedOutput ao = averaged_output(ctl.out.v, vin);
                overmod = overmod || ao.overmodulation;
                plant.v_ds2 = ao.v.d;
                plant.v_qs2 = ao.v.q;
                const int subs = static_cast<int>(std::lround(Tc / h));
                for (int j = 0; j < subs; ++j) {
                    x = rk4_step(x, t + j * h, h, plant);
                    x.wrap_angles();
                    if (!x.finite())
                        throw std::runtime_error("non-finite state after integration step");
                    last_good = x;
                }
                v_avg = ao.v;
                va_in = vin.a;
                const double p_out = secondary_and_grid_powers(xn, v_avg.d, v_avg.q, mp).Ps2;
                ia_in = p_out / (kPowerScale * v_in * v_in) * vin.a;
            } else {
                const double Ts = sc.converter.Ts;
                const int periods = static_cast<int>(std::lround(Tc / Ts));
                const int subs = static_cast<int>(std::lround(Ts / h));
                double vd_acc = 0.0;
                double vq_acc = 0.0;
                double va_acc = 0.0;
                double ia_acc = 0.0;
                for (int k = 0; k < periods; ++k) {
                    const double tp0 = t + k * Ts;
                    const double ws = slip(x.omega_r, mp) * mp.omega_s;
                    const double theta_s0 = x.theta_s;
                    const AlphaBeta v_ref = inverse_park(ctl.out.v, x.theta_2 + 0.5 * ws * Ts);
                    const ModulationCommand cmd =
                        modulate(v_ref, grid_voltage(theta_s0 + 0.5 * mp.omega_s * Ts, v_in));
                    overmod = overmod || cmd.inverter.overmodulation;
                    for (const auto& step : cmd.sequence) {
                        const GateCheck check = validate(step.gates);
                        if (check != GateCheck::ok) {
                            ++violations;
                            throw SimulationError("gate constraint violated (" +
                                                  std::string(to_string(check)) +
                                                  ") at t=" + std::to_string(tp0));
                        }
                    }
                    if (gate_out.is_open())
                        dump_gates(gate_out, tp0, Ts, cmd);

                    // segment edges in seconds from the period start
                    std::array<double, 12> edges{};
                    for (std::size_t e = 0; e < cmd.sequence.size(); ++e)
                        edges[e + 1] = edges[e] + cmd.sequence[e].dwell * Ts;
                    edges[cmd.sequence.size()] = Ts;

                    for (int j = 0; j < subs; ++j) {
                        const double a = j * h;
                        const double b = a + h;
                        const ThreePhase i_out = inverse_clarke(
                            inverse_park({x.i_ds2, x.i_qs2}, x.theta_2));
                        ThreePhase v_out;
                        ThreePhase i_in;
                        for (std::size_t e = 0; e < cmd.sequence.size(); ++e) {
                            const double lo = std::max(a, edges[e]);
                            const double hi = std::min(b, edges[e + 1]);
                            if (hi <= lo)
                                continue;
                            const double frac = (hi - lo) / h;
                            const ThreePhase vin =
                                grid_voltage(theta_s0 + mp.omega_s * 0.5 * (lo + hi), v_in);
                            const ThreePhase vo = apply_gates(cmd.sequence[e].gates, vin);
                            const ThreePhase io = input_current(cmd.sequence[e].gates, i_out);
                            v_out.a += frac * vo.a;
                            v_out.b += frac * vo.b;
                            v_out.c += frac * vo.c;
                            i_in.a += frac * io.a;
                        }
                        const Dq vdq = park(clarke(v_out), x.theta_2 + 0.5 * ws * h);
                        plant.v_ds2 = vdq.d;
                        plant.v_qs2 = vdq.q;
                        vd_acc += vdq.d * h;
                        vq_acc += vdq.q * h;
                        va_acc += v_in * std::cos(theta_s0 + mp.omega_s * (a + 0.5 * h)) * h;
                        ia_acc += i_in.a * h;

                        x = rk4_step(x, tp0 + a, h, plant);
                        x.wrap_angles();
                        if (!x.finite())
                            throw std::runtime_error("non-finite state after integration step");
                        last_good = x;
                    }
                }
                v_avg = {vd_acc / Tc, vq_acc / Tc};
                va_in = va_acc / Tc;
                ia_in = ia_acc / Tc;
            }
            if (overmod)
                ++overmod_periods;

            if (n % sc.log_decimation == 0) {
                const double lambda = tip_speed_ratio(wind, w_turb, tp);
                const double cp = lambda > 0.0 ? power_coefficient(lambda, plant.beta, tp.cp) : 0.0;
                const StatorPowers s1 = stator1_powers(xn, mp);
                const PowerFlow pf = secondary_and_grid_powers(xn, v_avg.d, v_avg.q, mp);
                row.assign({t, wind, plant.beta, cp, lambda, xn.omega_r, s, s1.P, s1.Q,
                            ctl.refs.P, ctl.refs.Q, pf.Ps2, pf.Qs2, pf.Pgrid, pf.Qgrid,
                            xn.i_ds2, xn.i_qs2, v_avg.d, v_avg.q, ctl.S.d, ctl.S.q,
                            overmod ? 1.0 : 0.0});
                if (sc.log_abc) {
                    const PhaseQuantities st1 = reconstruct_stator1_abc(xn, mp);
                    const PhaseQuantities st2 = reconstruct_stator2_abc(xn, v_avg.d, v_avg.q);
                    row.insert(row.end(), {st1.voltage.a, st1.voltage.b, st1.voltage.c,
                                           st1.current.a, st1.current.b, st1.current.c,
                                           st2.voltage.a, st2.current.a, st2.current.b,
                                           st2.current.c, va_in, ia_in});
                }
                log.append(row);
            }
        }
    } catch (const SimulationError&) {
        throw;
    } catch (const std::exception& e) {
        throw SimulationError(std::string("simulation aborted: ") + e.what() +
                              "; last good state: " + describe(last_good));
    }

    result.final_state = x;
    result.metrics = compute_metrics(log, &sc);
    if (reaching.outside > 0)
        result.metrics.reaching_rate =
            static_cast<double>(reaching.good) / static_cast<double>(reaching.outside);
    result.metrics.constraint_violations = violations;
    result.metrics.overmodulation_samples = overmod_periods;
    result.metrics.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    result.log = std::move(log);
    return result;
}

}  // namespace cdfig
