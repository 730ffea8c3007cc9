#include "cdfig/plant.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cdfig {

namespace {

void require(bool ok, const char* field, const char* reason)
{
    if (!ok)
        throw std::invalid_argument(std::string("machine.") + field + ": " + reason);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void MachineParams::validate() const
{
    require(std::isfinite(Rs2) && Rs2 >= 0.0, "Rs2", "must be >= 0");
    require(positive(Ls1), "Ls1", "must be > 0");
    require(positive(Ls2), "Ls2", "must be > 0");
    require(positive(Lm1), "Lm1", "must be > 0");
    require(positive(Lm2), "Lm2", "must be > 0");
    require(positive(Lr1), "Lr1", "must be > 0");
    require(positive(Lr2), "Lr2", "must be > 0");
    require(p1 >= 1, "p1", "must be >= 1");
    require(p2 >= 1, "p2", "must be >= 1");
    require(positive(J), "J", "must be > 0");
    require(std::isfinite(f_visc) && f_visc >= 0.0, "f_visc", "must be >= 0");
    require(positive(Vs), "Vs", "must be > 0");
    require(positive(omega_s), "omega_s", "must be > 0");
    require(Lr1 + Lr2 - Lm1 * Lm1 / Ls1 > 0.0, "Lr1",
            "Lr1 + Lr2 - Lm1^2/Ls1 must be > 0 for a defined coupling constant");
    require(sigma() > 0.0, "Ls2", "Ls2 - C Lm2 must be > 0");
}

double MachineParams::sigma() const { return Ls2 - coupling_constant(*this) * Lm2; }

PlantState& PlantState::operator+=(const PlantState& o)
{
    i_ds2 += o.i_ds2;
    i_qs2 += o.i_qs2;
    omega_r += o.omega_r;
    theta_s += o.theta_s;
    theta_2 += o.theta_2;
    return *this;
}

PlantState operator*(double k, PlantState a)
{
    a.i_ds2 *= k;
    a.i_qs2 *= k;
    a.omega_r *= k;
    a.theta_s *= k;
    a.theta_2 *= k;
    return a;
}

bool PlantState::finite() const
{
    return std::isfinite(i_ds2) && std::isfinite(i_qs2) && std::isfinite(omega_r) &&
           std::isfinite(theta_s) && std::isfinite(theta_2);
}

void PlantState::wrap_angles()
{
    theta_s = wrap_angle(theta_s);
    theta_2 = wrap_angle(theta_2);
}

double coupling_constant(const MachineParams& p)
{
    return p.Lm2 / (p.Lr1 + p.Lr2 - p.Lm1 * p.Lm1 / p.Ls1);
}

double slip(double omega_r, const MachineParams& p)
{
    return (p.omega_s - p.pole_pairs() * omega_r) / p.omega_s;
}

double omega_r_at_slip(double s, const MachineParams& p)
{
    return (1.0 - s) * p.omega_s / p.pole_pairs();
}

double stator2_emf(double s, const MachineParams& p)
{
    return s * coupling_constant(p) * p.Lm1 * p.Vs / p.Ls1;
}

PlantState derivatives(const PlantState& x, double v_ds2, double v_qs2, double shaft_torque,
                       const MachineParams& p)
{
    if (!x.finite() || !std::isfinite(v_ds2) || !std::isfinite(v_qs2) ||
        !std::isfinite(shaft_torque)) {
        std::ostringstream msg;
        msg << "non-finite plant input: i_ds2=" << x.i_ds2 << " i_qs2=" << x.i_qs2
            << " omega_r=" << x.omega_r << " v_ds2=" << v_ds2 << " v_qs2=" << v_qs2
            << " torque=" << shaft_torque;
        throw std::runtime_error(msg.str());
    }
    const double sigma = p.sigma();
    const double s = slip(x.omega_r, p);
    const double ws = s * p.omega_s;
    const double t_em = electromagnetic_torque(stator1_powers(x, p).P, p);

    PlantState dx;
    dx.i_ds2 = (v_ds2 - p.Rs2 * x.i_ds2 + ws * sigma * x.i_qs2) / sigma;
    dx.i_qs2 = (v_qs2 - p.Rs2 * x.i_qs2 - ws * sigma * x.i_ds2 - stator2_emf(s, p)) / sigma;
    dx.omega_r = (shaft_torque - t_em - p.f_visc * x.omega_r) / p.J;
    dx.theta_s = p.omega_s;
    dx.theta_2 = ws;
    return dx;
}

StatorPowers stator1_powers(const PlantState& x, const MachineParams& p)
{
    const double gain = kPowerScale * coupling_constant(p) * p.Vs * p.Lm1 / p.Ls1;
    return {-gain * x.i_qs2, stator1_magnetizing_q(p) - gain * x.i_ds2};
}

double stator1_magnetizing_q(const MachineParams& p)
{
    const double c = coupling_constant(p);
    return kPowerScale * p.Vs * p.Vs / (p.omega_s * p.Ls1) *
           (1.0 + c * p.Lm1 * p.Lm1 / (p.Ls1 * p.Lm2));
}

double electromagnetic_torque(double ps1, const MachineParams& p)
{
    return -p.pole_pairs() * ps1 / p.omega_s;
}

PowerFlow secondary_and_grid_powers(const PlantState& x, double v_ds2, double v_qs2,
                                    const MachineParams& p)
{
    const StatorPowers s1 = stator1_powers(x, p);
    PowerFlow f;
    f.Ps2 = kPowerScale * (v_ds2 * x.i_ds2 + v_qs2 * x.i_qs2);
    f.Qs2 = kPowerScale * (v_qs2 * x.i_ds2 - v_ds2 * x.i_qs2);
    f.Pgrid = s1.P + f.Ps2;
    f.Qgrid = s1.Q + f.Qs2;
    return f;
}

double stator2_copper_loss(const PlantState& x, const MachineParams& p)
{
    return kPowerScale * p.Rs2 * (x.i_ds2 * x.i_ds2 + x.i_qs2 * x.i_qs2);
}

PhaseQuantities reconstruct_stator1_abc(const PlantState& x, const MachineParams& p)
{
    const StatorPowers s1 = stator1_powers(x, p);
    const double flux_angle = x.theta_s - 0.5 * kPi;
    const Dq v{0.0, p.Vs};
    const Dq i{s1.Q / (kPowerScale * p.Vs), s1.P / (kPowerScale * p.Vs)};
    return {inverse_clarke(inverse_park(v, flux_angle)),
            inverse_clarke(inverse_park(i, flux_angle))};
}

PhaseQuantities reconstruct_stator2_abc(const PlantState& x, double v_ds2, double v_qs2)
{
    return {inverse_clarke(inverse_park({v_ds2, v_qs2}, x.theta_2)),
            inverse_clarke(inverse_park({x.i_ds2, x.i_qs2}, x.theta_2))};
}

ThreePhase grid_voltage(double theta_s, double magnitude)
{
    return {magnitude * std::cos(theta_s), magnitude * std::cos(theta_s - kTwoPi / 3.0),
            magnitude * std::cos(theta_s + kTwoPi / 3.0)};
}

}  // namespace cdfig
