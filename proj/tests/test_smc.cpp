#include "cdfig/plant.hpp"
#include "cdfig/rk4.hpp"
#include "cdfig/smc.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cdfig;
using doctest::Approx;

namespace {

PlantState at_slip(double s, const MachineParams& m)
{
    PlantState x;
    x.omega_r = omega_r_at_slip(s, m);
    return x;
}

// Holds the shaft speed: the driving torque cancels T_em and friction.
double holding_torque(const PlantState& x, const MachineParams& m)
{
    return electromagnetic_torque(stator1_powers(x, m).P, m) + m.f_visc * x.omega_r;
}

}  // namespace

TEST_SUITE("smc")
{
    TEST_CASE("reference currents")
    {
        const MachineParams m;
        CHECK(reference_currents({0.0, 5e5, 0, 0}, m).q == 0.0);

        const double C = coupling_constant(m);
        const double magnetizing =
            m.Vs * (1.0 + C * m.Lm1 * m.Lm1 / (m.Ls1 * m.Lm2)) / (m.omega_s * C * m.Lm1);
        CHECK(reference_currents({-1e6, 0.0, 0, 0}, m).d == Approx(magnetizing).epsilon(1e-13));

        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> pw(-2e6, 2e6);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const PowerReferences r{pw(rng), pw(rng), 0, 0};
            const CurrentPair c = reference_currents(r, m);
            PlantState x;
            x.i_qs2 = c.q;
            x.i_ds2 = c.d;
            const StatorPowers s = stator1_powers(x, m);
            worst = std::max(worst, std::abs(s.P - r.P) / std::max(std::abs(r.P), 1.0));
            worst = std::max(worst, std::abs(s.Q - r.Q) / std::max(std::abs(r.Q), 1.0));
        }
        MESSAGE("worst round-trip deviation " << worst);
        CHECK(worst <= 1e-10);
    }

    TEST_CASE("surfaces")
    {
        CurrentPair S = surfaces({3.0, 4.0}, {3.0, 4.0});
        CHECK(S.q == 0.0);
        CHECK(S.d == 0.0);
        S = surfaces({1.0, 2.0}, {0.0, 0.0});
        CHECK(S.q == 1.0);
        CHECK(S.d == 2.0);
        CHECK(surfaces({1.0, 1.0}, {1.5, 1.0}).q < 0.0);
    }

    TEST_CASE("equivalent control examples")
    {
        const MachineParams m;
        for (double s : {-0.2, 0.0, 0.3}) {
            const Dq v = equivalent_control(at_slip(s, m), {}, m);
            CHECK(v.q == Approx(s * coupling_constant(m) * m.Lm1 * m.Vs / m.Ls1).scale(1.0));
            CHECK(v.d == 0.0);
        }
        PlantState x = at_slip(0.0, m);
        x.i_ds2 = 250.0;
        x.i_qs2 = -90.0;
        const Dq v = equivalent_control(x, {-4e5, 1e5, 0, 0}, m);
        CHECK(v.d == Approx(m.Rs2 * 250.0).epsilon(1e-12));
        CHECK(v.q == Approx(m.Rs2 * -90.0).epsilon(1e-9));
    }

    TEST_CASE("equivalent control alone keeps the state on the surface")
    {
        const MachineParams m;
        const PowerReferences r{-1.2e6, 2e5, 0, 0};
        const CurrentPair ref = reference_currents(r, m);
        PlantState x = at_slip(-0.15, m);
        x.i_qs2 = ref.q;
        x.i_ds2 = ref.d;
        auto f = [&](double, const PlantState& s) {
            const Dq v = equivalent_control(s, r, m);
            return derivatives(s, v.d, v.q, holding_torque(s, m), m);
        };
        double worst = 0.0;
        const double h = 1e-5;
        for (int n = 0; n < 100000; ++n) {
            x = rk4_step(x, n * h, h, f);
            const CurrentPair S = surfaces(ref, {x.i_qs2, x.i_ds2});
            worst = std::max({worst, std::abs(S.q), std::abs(S.d)});
        }
        MESSAGE("max |S| over 1 s: " << worst);
        CHECK(worst <= 1e-9);
    }

    TEST_CASE("switching control")
    {
        const MachineParams m;
        SmcGains g;
        const double ks = g.K1 * m.sigma();
        Dq v = switching_control({0.0, 0.0}, g, m);
        CHECK(v.d == 0.0);
        CHECK(v.q == 0.0);

        v = switching_control({g.phi / 2, -g.phi / 2}, g, m);
        CHECK(v.q == Approx(ks / 2));
        CHECK(v.d == Approx(-ks / 2));

        g.smoothing = Smoothing::sign;
        v = switching_control({-1e-9, 1e-9}, g, m);
        CHECK(v.q == -ks);
        CHECK(v.d == ks);

        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-1e4, 1e4);
        for (Smoothing sh : {Smoothing::sign, Smoothing::saturation, Smoothing::tanh}) {
            g.smoothing = sh;
            for (int i = 0; i < 10000; ++i) {
                const Dq n = switching_control({u(rng), u(rng)}, g, m);
                CHECK(std::abs(n.q) <= ks);
                CHECK(std::abs(n.d) <= ks);
            }
        }
    }

    TEST_CASE("saturation tends to sign as the layer shrinks")
    {
        for (double S : {-3.0, -1e-3, 2e-2, 7.0}) {
            double prev = 2.0;
            for (double phi = 1.0; phi > 1e-8; phi /= 10) {
                const double gap = std::abs(switching_shape(S, Smoothing::saturation, phi) -
                                            switching_shape(S, Smoothing::sign, 0.0));
                CHECK(gap <= prev);
                prev = gap;
            }
            CHECK(prev == 0.0);
        }
    }

    TEST_CASE("control sums both parts and clamps by magnitude")
    {
        const MachineParams m;
        const SmcGains g;
        PlantState x = at_slip(0.1, m);
        const PowerReferences r{-5e5, 0, 0, 0};
        const CurrentPair ref = reference_currents(r, m);
        x.i_qs2 = ref.q;
        x.i_ds2 = ref.d;
        ControlOutput out = control(x, r, g, m);
        const Dq eq = equivalent_control(x, r, m);
        CHECK(out.v.d == eq.d);
        CHECK(out.v.q == eq.q);
        CHECK_FALSE(out.limited);

        x.i_qs2 = ref.q - 5000.0;
        const ControlOutput free = control(x, r, g, m);
        out = control(x, r, g, m, 10.0);
        CHECK(out.limited);
        CHECK(out.v.magnitude() == Approx(10.0).epsilon(1e-14));
        CHECK(std::atan2(out.v.q, out.v.d) == Approx(std::atan2(free.v.q, free.v.d)).epsilon(1e-14));
    }

    TEST_CASE("reaching: sign mode drives S monotonically toward zero")
    {
        const MachineParams m;
        SmcGains g;
        g.smoothing = Smoothing::sign;
        g.phi = 0.0;
        SlidingModeController smc(g, m);
        const double pref = -1e6, qref = 0.0;
        const CurrentPair ref = reference_currents({pref, qref, 0, 0}, m);
        PlantState x = at_slip(0.2, m);
        x.i_qs2 = ref.q - 500.0;
        x.i_ds2 = ref.d + 300.0;
        const double ts = g.Ts_control;
        const double layer = g.K1 * ts;  // one sample of full authority
        int outside = 0, good = 0;
        for (int n = 0; n < 200; ++n) {
            const auto smp = smc.update(x, pref, qref);
            const PlantState d = derivatives(x, smp.out.v.d, smp.out.v.q, holding_torque(x, m), m);
            // constant references: dS/dt = -di/dt
            for (auto [S, dS] : {std::pair{smp.S.q, -d.i_qs2}, std::pair{smp.S.d, -d.i_ds2}}) {
                if (std::abs(S) > layer) {
                    ++outside;
                    good += S * dS < 0.0;
                }
            }
            const Dq v = smp.out.v;
            auto f = [&](double, const PlantState& s) {
                return derivatives(s, v.d, v.q, holding_torque(s, m), m);
            };
            for (int k = 0; k < 10; ++k)
                x = rk4_step(x, 0.0, ts / 10, f);
        }
        CHECK(outside > 10);
        CHECK(good == outside);
        CHECK(std::abs(x.i_qs2 - ref.q) <= layer);
        CHECK(std::abs(x.i_ds2 - ref.d) <= layer);
    }

    TEST_CASE("robust to +-20% plant resistance and leakage errors")
    {
        const MachineParams nominal;
        const SmcGains g;
        for (double kr : {0.8, 1.2}) {
            for (double ks : {0.8, 1.2}) {
                MachineParams plant = nominal;
                plant.Rs2 *= kr;
                // sigma = Ls2 - C Lm2 and C does not involve Ls2
                plant.Ls2 += (ks - 1.0) * nominal.sigma();
                REQUIRE(plant.sigma() == Approx(ks * nominal.sigma()).epsilon(1e-12));

                SlidingModeController smc(g, nominal, 0.866 * nominal.Vs);
                PlantState x = at_slip(-0.1, plant);
                double worst_tail = 0.0;
                const int periods = 3000;
                for (int n = 0; n < periods; ++n) {
                    const double pref = n * g.Ts_control < 0.1 ? -3e5 : -1.3e6;
                    const auto smp = smc.update(x, pref, 1e5);
                    if (n > periods - 500)
                        worst_tail = std::max({worst_tail, std::abs(smp.S.q), std::abs(smp.S.d)});
                    const Dq v = smp.out.v;
                    auto f = [&](double, const PlantState& s) {
                        return derivatives(s, v.d, v.q, holding_torque(s, plant), plant);
                    };
                    for (int k = 0; k < 10; ++k)
                        x = rk4_step(x, 0.0, g.Ts_control / 10, f);
                }
                MESSAGE("Rs2 x" << kr << ", sigma x" << ks << ": tail |S| " << worst_tail);
                CHECK(worst_tail <= g.phi);
            }
        }
    }

    TEST_CASE("reference derivative filter follows a ramp")
    {
        const MachineParams m;
        const SmcGains g;
        SlidingModeController smc(g, m);
        const PlantState x = at_slip(0.0, m);
        SlidingModeController::Sample smp;
        const double slope = -2e6;  // W/s
        for (int n = 0; n < 200; ++n)
            smp = smc.update(x, slope * n * g.Ts_control, 0.0);
        CHECK(smp.refs.dP == Approx(slope).epsilon(1e-9));
        CHECK(smp.refs.dQ == 0.0);

        smc.reset();
        smp = smc.update(x, 5e5, 0.0);
        CHECK(smp.refs.dP == 0.0);
    }

    TEST_CASE("gain validation")
    {
        SmcGains g;
        CHECK_NOTHROW(g.validate());
        g.phi = 0.0;
        CHECK_THROWS(g.validate());
        g.smoothing = Smoothing::sign;
        CHECK_NOTHROW(g.validate());
        g.K1 = 0.0;
        CHECK_THROWS_WITH(g.validate(), doctest::Contains("gains.K1"));
        CHECK(parse_smoothing("tanh") == Smoothing::tanh);
        CHECK_THROWS(parse_smoothing("sgn"));
    }
}
