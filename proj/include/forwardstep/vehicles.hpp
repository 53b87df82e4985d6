#pragma once

#include "forwardstep/so3.hpp"
#include "forwardstep/types.hpp"

namespace fstep {

/// Thrust-propelled vehicle, z axis pointing down: m x'' = -sigma R e3 + m g e3, R' = R S(w).
struct TpvParams {
    double mass = 1.0;
    double gravity = 9.81;
};

struct TpvState {
    Vec3 x = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Mat3 r = Mat3::Identity();
    double sigma = 0.0;
};

struct TpvDerivative {
    Vec3 x_dot;
    Vec3 v_dot;
    Mat3 r_dot;
};

TpvDerivative tpv_derivative(const TpvParams& p, const TpvState& s, double sigma,
                             const Vec3& omega_body);

/// Rigid spacecraft with reaction wheels: M w' - S(h) w = tau, h = R^T h_I.
struct SpacecraftParams {
    Mat3 inertia = Mat3::Identity();
    Vec3 h_inertial = Vec3::Zero();
};

struct SpacecraftState {
    EulerParam attitude;
    Vec3 omega = Vec3::Zero();   // body frame
};

struct SpacecraftDerivative {
    Vec4 attitude_dot;   // (qv', qo')
    Vec3 omega_dot;
};

/// Body-frame total angular momentum.
inline Vec3 body_momentum(const SpacecraftParams& p, const Mat3& r) {
    return r.transpose() * p.h_inertial;
}

SpacecraftDerivative spacecraft_derivative(const SpacecraftParams& p, const SpacecraftState& s,
                                           const Vec3& tau);

}  // namespace fstep
