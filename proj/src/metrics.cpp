#include "cdfig/metrics.hpp"

#include "cdfig/aero.hpp"
#include "cdfig/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace cdfig {

namespace {

constexpr double kDefaultGridHz = 50.0;

struct Window
{
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

Window window_from(std::span<const double> t, double t_start)
{
    const auto it = std::lower_bound(t.begin(), t.end(), t_start);
    return {static_cast<std::size_t>(it - t.begin()), t.size()};
}

double mean(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x)
        s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

std::span<const double> slice(std::span<const double> x, Window w)
{
    return x.subspan(w.begin, w.size());
}

std::optional<double> rms_difference(std::span<const double> a, std::span<const double> b)
{
    if (a.empty())
        return std::nullopt;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

void put(std::ostream& out, const char* key, const std::optional<double>& v)
{
    out << key << '=';
    if (v)
        out << std::setprecision(17) << *v;
    else
        out << "undefined";
    out << '\n';
}

}  // namespace

FrequencyEstimate estimate_frequency(std::span<const double> t, std::span<const double> x)
{
    FrequencyEstimate est;
    if (t.size() < 3 || t.size() != x.size())
        return est;
    const double span = t.back() - t.front();
    if (!(span > 0.0))
        return est;

    const double m = mean(x);
    double ripple = 0.0;
    double peak = 0.0;
    for (double v : x) {
        ripple += (v - m) * (v - m);
        peak = std::max(peak, std::abs(v));
    }
    ripple = std::sqrt(ripple / static_cast<double>(x.size()));

    // Crossings of zero with a small hysteresis band; times interpolated at the
    // sample pair that brackets zero.
    const double band = 0.01 * peak;
    int state = 0;
    std::vector<double> crossings;
    for (std::size_t i = 0; i < x.size(); ++i) {
        int now = x[i] > band ? 1 : (x[i] < -band ? -1 : 0);
        if (now == 0)
            continue;
        if (state != 0 && now != state) {
            std::size_t k = i;
            while (k > 0 && (x[k - 1] > 0.0) == (x[i] > 0.0))
                --k;
            double tc = t[k];
            if (k > 0 && x[k] != x[k - 1])
                tc = t[k - 1] + (t[k] - t[k - 1]) * (-x[k - 1]) / (x[k] - x[k - 1]);
            crossings.push_back(tc);
        }
        state = now;
    }

    const double crossing_rate = 0.5 * static_cast<double>(crossings.size()) / span;
    if (crossing_rate < 0.5 && ripple < 0.05 * std::abs(m)) {
        est.defined = true;
        est.dc = true;
        est.hz = 0.0;
        return est;
    }
    if (crossings.size() < 5)
        return est;
    est.defined = true;
    est.hz = 0.5 * static_cast<double>(crossings.size() - 1) / (crossings.back() - crossings.front());
    return est;
}

std::optional<std::complex<double>> fundamental_phasor(std::span<const double> t,
                                                       std::span<const double> x, double freq)
{
    if (t.size() < 3 || t.size() != x.size() || !(freq > 0.0))
        return std::nullopt;
    const double period = 1.0 / freq;
    const double span = t.back() - t.front();
    const double cycles = std::floor(span / period + 1e-9);
    if (cycles < 2.0)
        return std::nullopt;
    const double t0 = t.back() - cycles * period;
    const auto first = std::lower_bound(t.begin(), t.end(), t0 - 1e-12) - t.begin();
    const double w = kTwoPi * freq;
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = static_cast<std::size_t>(first) + 1; i < t.size(); ++i) {
        const double h = t[i] - t[i - 1];
        const std::complex<double> a = x[i - 1] * std::polar(1.0, -w * t[i - 1]);
        const std::complex<double> b = x[i] * std::polar(1.0, -w * t[i]);
        acc += 0.5 * h * (a + b);
    }
    const double covered = t.back() - t[static_cast<std::size_t>(first)];
    return 2.0 * acc / covered;
}

std::optional<double> displacement_deg(std::span<const double> t, std::span<const double> v,
                                       std::span<const double> i, double freq)
{
    const auto pv = fundamental_phasor(t, v, freq);
    const auto pi = fundamental_phasor(t, i, freq);
    if (!pv || !pi || std::abs(*pv) == 0.0 || std::abs(*pi) == 0.0)
        return std::nullopt;
    double d = (std::arg(*pi) - std::arg(*pv)) * 180.0 / kPi;
    while (d <= -180.0)
        d += 360.0;
    while (d > 180.0)
        d -= 360.0;
    return d;
}

RunMetrics compute_metrics(const TimeSeriesLog& log, const Scenario* sc)
{
    if (log.rows() == 0)
        throw std::invalid_argument("compute_metrics: empty log");
    RunMetrics m;
    const auto t = log.column("t");
    const double t_start =
        sc ? sc->metrics_window_start() : t.front() + 0.5 * (t.back() - t.front());
    const Window w = window_from(t, t_start);
    const auto tw = slice(t, w);
    const double f_grid = sc ? sc->machine.omega_s / kTwoPi : kDefaultGridHz;
    const double phi = sc ? sc->gains.phi : SmcGains{}.phi;

    m.p_tracking_rms = rms_difference(slice(log.column("ps1"), w), slice(log.column("ps1_ref"), w));
    m.q_tracking_rms = rms_difference(slice(log.column("qs1"), w), slice(log.column("qs1_ref"), w));
    if (w.size() > 0) {
        m.mean_slip = mean(slice(log.column("slip"), w));
        m.mean_lambda = mean(slice(log.column("lambda"), w));
    }

    // forward difference of the logged surfaces
    {
        long outside = 0;
        long good = 0;
        for (const char* name : {"s_d", "s_q"}) {
            const auto s = log.column(name);
            for (std::size_t i = 0; i + 1 < s.size(); ++i) {
                if (std::abs(s[i]) <= phi)
                    continue;
                ++outside;
                if (s[i] * (s[i + 1] - s[i]) < 0.0)
                    ++good;
            }
        }
        if (outside > 0)
            m.reaching_rate = static_cast<double>(good) / static_cast<double>(outside);
    }

    for (double cp : log.column("cp"))
        if (!(cp < kBetzLimit))
            ++m.betz_violations;
    for (double f : log.column("overmod"))
        if (f != 0.0)
            ++m.overmodulation_samples;

    if (log.has("ia2")) {
        const FrequencyEstimate f = estimate_frequency(tw, slice(log.column("ia2"), w));
        if (f.defined) {
            m.stator2_frequency_hz = f.hz;
            m.stator2_dc = f.dc;
        }
    }
    if (log.has("va_in") && log.has("ia_in")) {
        const auto d = displacement_deg(tw, slice(log.column("va_in"), w),
                                        slice(log.column("ia_in"), w), f_grid);
        if (d)
            m.input_power_factor = std::abs(std::cos(*d * kPi / 180.0));
    }
    if (log.has("va1") && log.has("ia1"))
        m.stator1_displacement_deg =
            displacement_deg(tw, slice(log.column("va1"), w), slice(log.column("ia1"), w), f_grid);

    if (sc && sc->reference_mode == ReferenceMode::explicit_schedule) {
        const auto& steps = sc->p_schedule.steps;
        const auto qs1 = log.column("qs1");
        std::optional<double> worst;
        for (std::size_t k = 1; k < steps.size(); ++k) {
            const double dp = std::abs(steps[k].value - steps[k - 1].value);
            if (dp == 0.0)
                continue;
            const double ts = steps[k].t;
            const double te = ts + sc->p_schedule.ramp + 0.1;
            const auto it = std::lower_bound(t.begin(), t.end(), ts);
            if (it == t.begin() || it == t.end())
                continue;
            const std::size_t i0 = static_cast<std::size_t>(it - t.begin());
            const double q0 = qs1[i0 - 1];
            double dev = 0.0;
            for (std::size_t i = i0; i < t.size() && t[i] <= te; ++i)
                dev = std::max(dev, std::abs(qs1[i] - q0));
            worst = std::max(worst.value_or(0.0), dev / dp);
        }
        m.decoupling_index = worst;
    }

    if (sc && w.size() > 0) {
        const MachineParams& mp = sc->machine;
        const TurbineParams& tp = sc->turbine;
        const auto omega = slice(log.column("omega_r"), w);
        const auto ps1 = slice(log.column("ps1"), w);
        const auto pgrid = slice(log.column("pgrid"), w);
        const auto id = slice(log.column("i_ds2"), w);
        const auto iq = slice(log.column("i_qs2"), w);
        const auto cp = slice(log.column("cp"), w);
        const auto wind = slice(log.column("wind"), w);
        double p_in = 0.0;
        double p_out = 0.0;
        double p_grid = 0.0;
        for (std::size_t i = 0; i < omega.size(); ++i) {
            const double friction = mp.f_visc * omega[i] * omega[i];
            if (sc->speed_mode == SpeedMode::free)
                p_in += 0.5 * tp.air_density * tp.swept_area() * wind[i] * wind[i] * wind[i] * cp[i];
            else
                p_in += electromagnetic_torque(ps1[i], mp) * omega[i] + friction;
            const double cu = kPowerScale * mp.Rs2 * (id[i] * id[i] + iq[i] * iq[i]);
            p_out += std::abs(pgrid[i]) + cu + friction;
            p_grid += std::abs(pgrid[i]);
        }
        if (p_grid > 0.0)
            m.energy_balance_residual = std::abs(p_in - p_out) / p_grid;
    }
    return m;
}

void RunMetrics::write(std::ostream& out) const
{
    put(out, "p_tracking_rms", p_tracking_rms);
    put(out, "q_tracking_rms", q_tracking_rms);
    put(out, "decoupling_index", decoupling_index);
    put(out, "reaching_rate", reaching_rate);
    put(out, "stator2_frequency_hz", stator2_frequency_hz);
    out << "stator2_dc=" << (stator2_dc ? 1 : 0) << '\n';
    put(out, "input_power_factor", input_power_factor);
    put(out, "stator1_displacement_deg", stator1_displacement_deg);
    put(out, "energy_balance_residual", energy_balance_residual);
    put(out, "mean_slip", mean_slip);
    put(out, "mean_lambda", mean_lambda);
    out << "betz_violations=" << betz_violations << '\n';
    out << "constraint_violations=" << constraint_violations << '\n';
    out << "overmodulation_samples=" << overmodulation_samples << '\n';
    out << "wall_clock_s=" << std::setprecision(6) << wall_clock_s << '\n';
}

void RunMetrics::write(const std::filesystem::path& path) const
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write metrics '" + path.string() + "'");
    write(out);
}

}  // namespace cdfig
