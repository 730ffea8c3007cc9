#pragma once

#include "cdfig/timeseries.hpp"

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>

namespace cdfig {

struct Scenario;

// Undefined metrics stay empty rather than being filled with a guess.
struct RunMetrics
{
    std::optional<double> p_tracking_rms;      // W
    std::optional<double> q_tracking_rms;      // var
    std::optional<double> decoupling_index;    // max |dQs1| / |dP| over P steps
    std::optional<double> reaching_rate;       // fraction of samples outside the layer with S dS < 0
    std::optional<double> stator2_frequency_hz;
    bool stator2_dc = false;
    std::optional<double> input_power_factor;  // displacement, |cos|
    std::optional<double> stator1_displacement_deg;
    std::optional<double> energy_balance_residual;  // relative to |Pgrid|
    std::optional<double> mean_slip;
    std::optional<double> mean_lambda;
    long betz_violations = 0;
    long constraint_violations = 0;
    long overmodulation_samples = 0;
    double wall_clock_s = 0.0;

    void write(std::ostream& out) const;
    void write(const std::filesystem::path& path) const;
};

struct FrequencyEstimate
{
    bool defined = false;
    bool dc = false;
    double hz = 0.0;
};

// Zero crossings of x itself (1% hysteresis). DC when the crossing rate is
// below 0.5 Hz and the ripple RMS is under 5% of |mean|; AC needs two full cycles.
FrequencyEstimate estimate_frequency(std::span<const double> t, std::span<const double> x);

// Complex amplitude of the component at `freq` over the longest whole number
// of cycles ending at the last sample; empty for fewer than two cycles.
std::optional<std::complex<double>> fundamental_phasor(std::span<const double> t,
                                                       std::span<const double> x, double freq);

// arg(I) - arg(V) in degrees, wrapped to (-180, 180].
std::optional<double> displacement_deg(std::span<const double> t, std::span<const double> v,
                                       std::span<const double> i, double freq);

// `scenario` may be null for offline logs; scenario-dependent metrics are then undefined.
RunMetrics compute_metrics(const TimeSeriesLog& log, const Scenario* scenario);

}  // namespace cdfig
