#pragma once

#include "forwardstep/types.hpp"

namespace fstep {

/// Classical four-stage Runge-Kutta step of x' = f(t, x). The callback also receives the
/// step start time so that grid-aligned discontinuities can be frozen for the whole step.
template <class F>
Vec rk4_step(F&& f, double t, const Vec& x, double h) {
    const Vec k1 = f(t, x, t);
    const Vec k2 = f(t + 0.5 * h, x + 0.5 * h * k1, t);
    const Vec k3 = f(t + 0.5 * h, x + 0.5 * h * k2, t);
    const Vec k4 = f(t + h, x + h * k3, t);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Same step with the first stage already evaluated.
template <class F>
Vec rk4_step(F&& f, double t, const Vec& x, double h, const Vec& k1) {
    const Vec k2 = f(t + 0.5 * h, x + 0.5 * h * k1, t);
    const Vec k3 = f(t + 0.5 * h, x + 0.5 * h * k2, t);
    const Vec k4 = f(t + h, x + h * k3, t);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace fstep
