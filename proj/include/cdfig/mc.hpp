#pragma once

#include "cdfig/frames.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace cdfig {

enum class InputPhase { a = 0, b = 1, c = 2 };

// gate[input][output]; closed = true.
struct SwitchMatrix
{
    std::array<std::array<bool, 3>, 3> gate{};

    // Every output on the same input phase.
    static SwitchMatrix all_on(InputPhase in);
    // Connects output `out` to input `in`, opening the other two gates of that column.
    void connect(int out, InputPhase in);
    friend bool operator==(const SwitchMatrix&, const SwitchMatrix&) = default;
};

enum class GateCheck { ok, input_short, output_open };

std::string_view to_string(GateCheck c);

// ok iff each output column has exactly one closed gate.
GateCheck validate(const SwitchMatrix& m);

struct InverterDuty
{
    int sector_v = 1;
    double theta_v = 0.0;
    double d_alpha = 0.0;
    double d_beta = 0.0;
    double d_zero = 1.0;
    double m_v = 0.0;
    bool overmodulation = false;
};

struct RectifierDuty
{
    int sector_c = 1;
    double theta_c = 0.0;
    double d_gamma = 0.0;
    double d_delta = 0.0;
    double d_zero_c = 1.0;
    double m_c = 0.0;
};

// Largest output/input voltage ratio in linear modulation.
inline constexpr double kMaxTransferRatio = 0.86602540378443864676;

// d1 = m sin(pi/3 - theta), d2 = m sin(theta), d0 = 1 - d1 - d2
InverterDuty inverter_duties_at(double m_v, double theta_v, int sector_v = 1);

// m_v is the requested ratio |v_ref| / v_in_magnitude normalized by
// kMaxTransferRatio; ratios beyond the ceiling are clamped and flagged.
// Throws std::invalid_argument if v_in_magnitude <= 0.
InverterDuty inverter_duties(const AlphaBeta& v_ref, double v_in_magnitude);

// Current-vector hexagon starts at -pi/6 (a+, b-); m_c is clamped to [0, 1].
RectifierDuty rectifier_duties(double i_ref_angle, double m_c);

// Inverter active vector k (1..6) for link voltage v_dc: (2/3) v_dc at (k-1) pi/3.
AlphaBeta inverter_vector(int k, double v_dc);
// Rectifier active vector k (1..6) for unit link current: 2/sqrt(3) at -pi/6 + (k-1) pi/3.
AlphaBeta rectifier_vector(int k);

struct SequenceStep
{
    SwitchMatrix gates;
    double dwell = 0.0;  // fraction of Ts
};

struct ModulationCommand
{
    RectifierDuty rectifier;
    InverterDuty inverter;
    double d_ag = 0.0;
    double d_ad = 0.0;
    double d_bg = 0.0;
    double d_bd = 0.0;
    double d_0 = 1.0;
    std::vector<SequenceStep> sequence;
};

// Products of the two stages and a symmetric double-sided sequence:
// Z/4 ag bg bd ad Z/2 ad bd bg ag Z/4 (halves of each active product).
ModulationCommand combine(const RectifierDuty& r, const InverterDuty& i);

// Inverter duties against the virtual link of a unity-m_c rectifier locked to
// the input-voltage angle.
ModulationCommand modulate(const AlphaBeta& v_ref, const ThreePhase& v_in);

struct SwitchedSample
{
    SwitchMatrix gates;
    ThreePhase v_out;
};

// Throws std::runtime_error on a malformed command or t outside [0, Ts).
SwitchedSample switched_output(const ModulationCommand& cmd, const ThreePhase& v_in,
                               double t_in_period, double Ts);

ThreePhase apply_gates(const SwitchMatrix& m, const ThreePhase& v_in);

struct AveragedOutput
{
    Dq v;
    bool overmodulation = false;
};

// Ideal modulator: the reference, clamped to kMaxTransferRatio |v_in|.
AveragedOutput averaged_output(const Dq& v_ref, const ThreePhase& v_in);

// I_in[x] = sum_j gate[x][j] I_out[j]
ThreePhase input_current(const SwitchMatrix& m, const ThreePhase& i_out);

}  // namespace cdfig
