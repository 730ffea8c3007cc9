#pragma once

#include <numbers>

namespace cdfig {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ThreePhase
{
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

struct AlphaBeta
{
    double alpha = 0.0;
    double beta = 0.0;

    double magnitude() const;
    double angle() const;
};

struct Dq
{
    double d = 0.0;
    double q = 0.0;

    double magnitude() const;
};

// Amplitude-invariant (2/3) transform: a balanced set of amplitude A maps to a
// vector of length A.
AlphaBeta clarke(const ThreePhase& x);
// Zero-sequence-free inverse of clarke.
ThreePhase inverse_clarke(const AlphaBeta& v);

// d = a cos(theta) + b sin(theta), q = -a sin(theta) + b cos(theta)
Dq park(const AlphaBeta& v, double theta);
AlphaBeta inverse_park(const Dq& v, double theta);

// Wraps to [0, 2pi).
double wrap_angle(double angle);

struct SectorPosition
{
    int index = 1;           // 1..n
    double in_sector = 0.0;  // [0, 2pi/n)
};

// Sector k covers [(k-1)*2pi/n, k*2pi/n), lower edge inclusive.
SectorPosition sector(double angle, int n = 6);

}  // namespace cdfig
