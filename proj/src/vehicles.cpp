#include "forwardstep/vehicles.hpp"

namespace fstep {

TpvDerivative tpv_derivative(const TpvParams& p, const TpvState& s, double sigma,
                             const Vec3& omega_body) {
    TpvDerivative d;
    d.x_dot = s.v;
    d.v_dot = -sigma * (s.r * e3()) / p.mass + p.gravity * e3();
    d.r_dot = s.r * skew(omega_body);
    return d;
}

SpacecraftDerivative spacecraft_derivative(const SpacecraftParams& p, const SpacecraftState& s,
                                           const Vec3& tau) {
    SpacecraftDerivative d;
    const Vec3 h = body_momentum(p, s.attitude.rotation());
    d.omega_dot = p.inertia.ldlt().solve(skew(h) * s.omega + tau);
    d.attitude_dot = euler_rate_body(s.attitude, s.omega);
    return d;
}

}  // namespace fstep
