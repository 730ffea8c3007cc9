#include "cdfig/frames.hpp"
#include "cdfig/plant.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

using namespace cdfig;
using doctest::Approx;

namespace {

struct Rates
{
    double did, diq, dw, dths, dth2;
};

// Second, deliberately plain transcription of the reduced model used to
// cross-check `derivatives`.
Rates model_oracle(double ids, double iqs, double wr, double vd, double vq, double torque,
                   const MachineParams& m)
{
    const double C = m.Lm2 / (m.Lr1 + m.Lr2 - m.Lm1 * m.Lm1 / m.Ls1);
    const double sig = m.Ls2 - C * m.Lm2;
    const double s = (m.omega_s - (m.p1 + m.p2) * wr) / m.omega_s;
    const double ps1 = -1.5 * C * m.Vs * (m.Lm1 / m.Ls1) * iqs;
    const double tem = -(m.p1 + m.p2) * ps1 / m.omega_s;
    Rates r;
    r.did = (vd - m.Rs2 * ids + s * m.omega_s * sig * iqs) / sig;
    r.diq = (vq - m.Rs2 * iqs - s * m.omega_s * sig * ids - s * C * m.Lm1 * m.Vs / m.Ls1) / sig;
    r.dw = (torque - tem - m.f_visc * wr) / m.J;
    r.dths = m.omega_s;
    r.dth2 = s * m.omega_s;
    return r;
}

bool rel_close(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300) || a == b;
}

}  // namespace

TEST_SUITE("plant")
{
    TEST_CASE("coupling constant")
    {
        MachineParams m;
        // Lm2 = 1, Lr1 = Lr2 = 0.6, Lm1^2/Ls1 = 0.2
        m.Lm2 = 1.0;
        m.Lr1 = m.Lr2 = 0.6;
        m.Lm1 = 0.2;
        m.Ls1 = 0.2;
        CHECK(coupling_constant(m) == Approx(1.0).epsilon(1e-15));

        m.Lm2 = 1e-12;
        CHECK(coupling_constant(m) < 1e-11);

        const MachineParams d;
        const double oracle = 3.0e-3 / (6.2e-3 - 9.0e-6 / 3.1e-3);
        CHECK(coupling_constant(d) == Approx(oracle).epsilon(1e-14));
        CHECK(d.sigma() == Approx(3.1e-3 - oracle * 3.0e-3).epsilon(1e-12));
    }

    TEST_CASE("slip")
    {
        MachineParams m;
        m.omega_s = 100 * kPi;
        CHECK(slip(25 * kPi, m) == Approx(0.0).epsilon(1e-15));
        CHECK(slip(0.0, m) == 1.0);
        CHECK(slip(1.2 * m.omega_s / 4, m) == Approx(-0.2).epsilon(1e-14));
        // affine with slope -(p1 + p2)/omega_s
        const double slope = (slip(50.0, m) - slip(10.0, m)) / 40.0;
        CHECK(slope == Approx(-4.0 / m.omega_s).epsilon(1e-12));
        CHECK(slip(omega_r_at_slip(0.13, m), m) == Approx(0.13).epsilon(1e-13));
    }

    TEST_CASE("derivative examples")
    {
        const MachineParams m;
        PlantState x;
        x.omega_r = m.synchronous_speed();
        x.i_ds2 = 120.0;
        x.i_qs2 = -340.0;
        const PlantState d = derivatives(x, m.Rs2 * x.i_ds2, m.Rs2 * x.i_qs2, 0.0, m);
        CHECK(d.i_ds2 == Approx(0.0).scale(1.0));
        CHECK(std::abs(d.i_qs2) < 1e-9);
        CHECK(d.theta_2 == Approx(0.0).scale(1.0));

        const PlantState z = derivatives(PlantState{}, 0.0, 0.0, 0.0, MachineParams{});
        // standstill is s = 1, so the slip EMF still drives the q axis
        CHECK(z.i_ds2 == 0.0);
        CHECK(z.i_qs2 == Approx(-stator2_emf(1.0, m) / m.sigma()).epsilon(1e-14));
        CHECK(z.theta_2 == m.omega_s);
        CHECK(z.omega_r == 0.0);
        CHECK(z.theta_s == m.omega_s);

        PlantState sync;
        sync.omega_r = m.synchronous_speed();
        const PlantState zs = derivatives(sync, 0.0, 0.0, m.f_visc * sync.omega_r, m);
        CHECK(zs.i_ds2 == 0.0);
        CHECK(std::abs(zs.i_qs2) < 1e-9);
        CHECK(std::abs(zs.omega_r) < 1e-15);
        CHECK(zs.theta_s == m.omega_s);
    }

    TEST_CASE("derivatives match an independent evaluator on 1000 random states")
    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> cur(-3000.0, 3000.0);
        std::uniform_real_distribution<double> spd(0.0, 130.0);
        std::uniform_real_distribution<double> volt(-500.0, 500.0);
        std::uniform_real_distribution<double> trq(-2e4, 2e4);
        std::uniform_real_distribution<double> scale(0.5, 1.5);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            MachineParams m;
            m.Rs2 *= scale(rng);
            // only stretch the self inductances so the leakage stays positive
            m.Ls2 *= 0.5 + scale(rng);
            m.Lr1 *= 0.5 + scale(rng);
            m.J *= scale(rng);
            if (i % 2)
                m.p2 = 3;
            REQUIRE_NOTHROW(m.validate());
            PlantState x;
            x.i_ds2 = cur(rng);
            x.i_qs2 = cur(rng);
            x.omega_r = spd(rng);
            x.theta_s = 6.0 * scale(rng);
            const double vd = volt(rng), vq = volt(rng), t = trq(rng);
            const PlantState d = derivatives(x, vd, vq, t, m);
            const Rates r = model_oracle(x.i_ds2, x.i_qs2, x.omega_r, vd, vq, t, m);
            const double pairs[5][2] = {{d.i_ds2, r.did}, {d.i_qs2, r.diq},
                                        {d.omega_r, r.dw},  {d.theta_s, r.dths},
                                        {d.theta_2, r.dth2}};
            for (const auto& pr : pairs) {
                const double scale_ref = std::max(std::abs(pr[1]), 1e-300);
                worst = std::max(worst, std::abs(pr[0] - pr[1]) / scale_ref);
            }
        }
        MESSAGE("worst relative deviation " << worst);
        CHECK(worst <= 1e-12);
    }

    TEST_CASE("non-finite input aborts")
    {
        PlantState x;
        x.i_qs2 = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(derivatives(x, 0, 0, 0, MachineParams{}), std::runtime_error);
        CHECK_THROWS_AS(derivatives(PlantState{}, INFINITY, 0, 0, MachineParams{}),
                        std::runtime_error);
    }

    TEST_CASE("stator-1 powers")
    {
        MachineParams m;
        PlantState x;
        x.i_ds2 = 77.0;
        CHECK(stator1_powers(x, m).P == 0.0);

        // C Vs Lm1/Ls1 = 2 V with the uniform 1.5 scale: Ps1 = 1.5 * 2 * 750 = 2250 W
        m.Vs = 2.0 / (coupling_constant(m) * m.Lm1 / m.Ls1);
        x.i_qs2 = -750.0;
        CHECK(stator1_powers(x, m).P == Approx(2250.0).epsilon(1e-13));

        const MachineParams d;
        const double C = coupling_constant(d);
        PlantState q0;
        q0.i_ds2 = d.Vs * (1.0 + C * d.Lm1 * d.Lm1 / (d.Ls1 * d.Lm2)) / (d.omega_s * C * d.Lm1);
        CHECK(std::abs(stator1_powers(q0, d).Q) < 1e-8 * stator1_magnetizing_q(d));
        CHECK(stator1_powers(PlantState{}, d).Q == stator1_magnetizing_q(d));
    }

    TEST_CASE("electromagnetic torque")
    {
        MachineParams m;
        CHECK(electromagnetic_torque(0.0, m) == 0.0);
        // 4 * 1.5e6 / (100 pi)
        CHECK(electromagnetic_torque(-1.5e6, m) == Approx(19098.593171).epsilon(1e-9));
        CHECK(electromagnetic_torque(-1.0, m) > 0.0);
    }

    TEST_CASE("secondary and grid powers")
    {
        const MachineParams m;
        PlantState x;
        x.i_ds2 = 300.0;
        x.i_qs2 = -500.0;
        PowerFlow f = secondary_and_grid_powers(x, 0.0, 0.0, m);
        CHECK(f.Ps2 == 0.0);
        CHECK(f.Qs2 == 0.0);

        f = secondary_and_grid_powers(PlantState{}, 40.0, -20.0, m);
        CHECK(f.Ps2 == 0.0);
        CHECK(f.Pgrid == stator1_powers(PlantState{}, m).P);

        f = secondary_and_grid_powers(x, 10.0, 20.0, m);
        CHECK(f.Ps2 == Approx(1.5 * (10.0 * 300.0 - 20.0 * 500.0)));
        CHECK(f.Qs2 == Approx(1.5 * (20.0 * 300.0 + 10.0 * 500.0)));
        CHECK(f.Pgrid == Approx(f.Ps2 + stator1_powers(x, m).P));
        CHECK(f.Qgrid == Approx(f.Qs2 + stator1_powers(x, m).Q));
    }

    TEST_CASE("steady generation: Ps2 exports above synchronism and power balance closes")
    {
        const MachineParams m;
        for (double s : {-0.2, -0.05, 0.1, 0.25}) {
            PlantState x;
            x.omega_r = omega_r_at_slip(s, m);
            x.i_ds2 = 400.0;
            x.i_qs2 = 900.0;  // Ps1 < 0, generating
            // voltages that hold the currents constant
            const double sig = m.sigma();
            const double vd = m.Rs2 * x.i_ds2 - s * m.omega_s * sig * x.i_qs2;
            const double vq = m.Rs2 * x.i_qs2 + s * m.omega_s * sig * x.i_ds2 + stator2_emf(s, m);
            const PlantState d = derivatives(x, vd, vq, 0.0, m);
            CHECK(std::abs(d.i_ds2) < 1e-6);
            CHECK(std::abs(d.i_qs2) < 1e-6);

            const PowerFlow f = secondary_and_grid_powers(x, vd, vq, m);
            const double ps1 = stator1_powers(x, m).P;
            REQUIRE(ps1 < 0.0);
            if (s < 0.0)
                CHECK(f.Ps2 < 0.0);
            // shaft power = grid export + copper loss
            const double shaft = electromagnetic_torque(ps1, m) * x.omega_r;
            CHECK(shaft == Approx(-f.Pgrid + stator2_copper_loss(x, m)).epsilon(1e-10));
        }
    }

    TEST_CASE("stator-1 reconstruction")
    {
        const MachineParams m;
        const auto angle = [](const ThreePhase& x) { return clarke(x).angle(); };
        const auto displacement = [&](const PhaseQuantities& q) {
            return std::remainder(angle(q.current) - angle(q.voltage), kTwoPi) * 180.0 / kPi;
        };

        PlantState x;
        x.theta_s = 0.9;
        PhaseQuantities q = reconstruct_stator1_abc(x, m);
        CHECK(q.voltage.a == Approx(m.Vs * std::cos(0.9)));
        // zero second-stator current: only the magnetizing (lagging) current remains
        CHECK(clarke(q.current).magnitude() ==
              Approx(stator1_magnetizing_q(m) / (1.5 * m.Vs)).epsilon(1e-12));
        CHECK(std::abs(displacement(q)) == Approx(90.0).epsilon(1e-9));

        // Qs1 = 0, Ps1 < 0
        const double C = coupling_constant(m);
        x.i_ds2 = m.Vs * (1.0 + C * m.Lm1 * m.Lm1 / (m.Ls1 * m.Lm2)) / (m.omega_s * C * m.Lm1);
        x.i_qs2 = 800.0;
        q = reconstruct_stator1_abc(x, m);
        CHECK(std::abs(displacement(q)) == Approx(180.0).epsilon(1e-9));

        // Ps1 = 0, Qs1 > 0
        x.i_qs2 = 0.0;
        x.i_ds2 = 100.0;
        q = reconstruct_stator1_abc(x, m);
        CHECK(std::abs(displacement(q)) == Approx(90.0).epsilon(1e-9));
    }

    TEST_CASE("machine validation names the field")
    {
        MachineParams m;
        m.J = -1.0;
        CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("machine.J"), std::invalid_argument);
        m = {};
        m.Lr1 = m.Lr2 = 1e-4;
        CHECK_THROWS_AS(m.validate(), std::invalid_argument);
        m = {};
        m.p1 = 0;
        CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("machine.p1"), std::invalid_argument);
    }
}
