#pragma once

namespace cdfig {

// Classical fixed-step Runge-Kutta. State needs `State + State` and
// `double * State`; f(t, x) returns dx/dt.
template <typename State, typename Deriv>
State rk4_step(const State& x, double t, double h, Deriv&& f)
{
    const State k1 = f(t, x);
    const State k2 = f(t + 0.5 * h, x + (0.5 * h) * k1);
    const State k3 = f(t + 0.5 * h, x + (0.5 * h) * k2);
    const State k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace cdfig
