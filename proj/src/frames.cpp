#include "cdfig/frames.hpp"

#include <algorithm>
#include <cmath>

namespace cdfig {

namespace {
constexpr double kInvSqrt3 = 0.57735026918962576451;
constexpr double kSqrt3Over2 = 0.86602540378443864676;
}  // namespace

double AlphaBeta::magnitude() const { return std::hypot(alpha, beta); }

double AlphaBeta::angle() const { return std::atan2(beta, alpha); }

double Dq::magnitude() const { return std::hypot(d, q); }

AlphaBeta clarke(const ThreePhase& x)
{
    return {(2.0 / 3.0) * (x.a - 0.5 * x.b - 0.5 * x.c), kInvSqrt3 * (x.b - x.c)};
}

ThreePhase inverse_clarke(const AlphaBeta& v)
{
    return {v.alpha,
            -0.5 * v.alpha + kSqrt3Over2 * v.beta,
            -0.5 * v.alpha - kSqrt3Over2 * v.beta};
}

Dq park(const AlphaBeta& v, double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {v.alpha * c + v.beta * s, -v.alpha * s + v.beta * c};
}

AlphaBeta inverse_park(const Dq& v, double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {v.d * c - v.q * s, v.d * s + v.q * c};
}

double wrap_angle(double angle)
{
    double w = std::fmod(angle, kTwoPi);
    if (w < 0.0)
        w += kTwoPi;
    // fmod of a tiny negative number can round up to exactly 2pi
    if (w >= kTwoPi)
        w = 0.0;
    return w;
}

SectorPosition sector(double angle, int n)
{
    const double width = kTwoPi / n;
    const double w = wrap_angle(angle);
    int k = static_cast<int>(std::floor(w / width));
    k = std::clamp(k, 0, n - 1);
    double rest = w - k * width;
    if (rest < 0.0)
        rest = 0.0;
    if (rest >= width) {
        // rounding at an upper edge belongs to the next cell
        k = (k + 1) % n;
        rest = 0.0;
    }
    return {k + 1, rest};
}

}  // namespace cdfig
