#pragma once

#include "forwardstep/types.hpp"

namespace fstep {

/// Skew-symmetric matrix with skew(b) * c == b x c.
Mat3 skew(const Vec3& b);
/// Inverse of skew() on the skew-symmetric part of m.
Vec3 unskew(const Mat3& m);

/// Euler parameters (unit quaternion) with vector part qv and scalar part qo.
struct EulerParam {
    Vec3 qv = Vec3::Zero();
    double qo = 1.0;

    static EulerParam identity() { return {}; }
    static EulerParam from_vec4(const Vec4& v) { return {v.head<3>(), v(3)}; }
    /// Rotation of `angle` radians about the unit axis `axis`.
    static EulerParam from_axis_angle(const Vec3& axis, double angle);
    static EulerParam from_rotation(const Mat3& r);

    Vec4 as_vec4() const { return {qv(0), qv(1), qv(2), qo}; }
    double norm() const { return std::sqrt(qv.squaredNorm() + qo * qo); }
    EulerParam normalized() const;
    /// Body-to-inertial rotation matrix.
    Mat3 rotation() const;
};

/// Error quaternion between q and q_z, i.e. the parameters of R_z^T R.
EulerParam euler_error(const EulerParam& q, const EulerParam& q_z);

/// 4x3 kinematic matrix with d/dt(dq) = D(dq) * w_rel for a body-frame relative rate w_rel.
Eigen::Matrix<double, 4, 3> d_matrix(const EulerParam& dq);

/// Euler-parameter rate for a body-frame angular velocity.
Vec4 euler_rate_body(const EulerParam& q, const Vec3& omega_body);
/// Euler-parameter rate for an inertial-frame angular velocity.
Vec4 euler_rate_inertial(const EulerParam& q, const Vec3& omega_inertial);

/// Nearest rotation matrix (polar factor) of m.
Mat3 orthonormalize(const Mat3& m);

/// Sinusoidal desired attitude. Single-axis: rotation of amplitude*sin(2*pi*t/period)
/// about `axis`. Two-axis: Rz(phi1(t)) * Ry(phi2(t)) with two independent sinusoids.
struct AttitudeProfile {
    enum class Kind { Constant, SingleAxis, TwoAxis };
    Kind kind = Kind::Constant;
    Vec3 axis = Vec3::UnitZ();
    double amplitude = 0.0;
    double period = 1.0;
    double amplitude2 = 0.0;
    double period2 = 1.0;
};

struct DesiredAttitude {
    Mat3 r = Mat3::Identity();
    Mat3 r_dot = Mat3::Zero();
    Mat3 r_ddot = Mat3::Zero();
    Vec3 omega_inertial = Vec3::Zero();      // S(w) = R_d' R_d^T
    Vec3 omega_dot_inertial = Vec3::Zero();
};

DesiredAttitude desired_attitude(const AttitudeProfile& p, double t);

}  // namespace fstep
