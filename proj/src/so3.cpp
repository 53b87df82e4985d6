#include "forwardstep/so3.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace fstep {

Mat3 skew(const Vec3& b) {
    Mat3 s;
    s << 0.0, -b(2), b(1),
         b(2), 0.0, -b(0),
         -b(1), b(0), 0.0;
    return s;
}

Vec3 unskew(const Mat3& m) {
    return {0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)), 0.5 * (m(1, 0) - m(0, 1))};
}

EulerParam EulerParam::from_axis_angle(const Vec3& axis, double angle) {
    const Vec3 a = axis.normalized();
    return {std::sin(0.5 * angle) * a, std::cos(0.5 * angle)};
}

EulerParam EulerParam::from_rotation(const Mat3& r) {
    // Shepperd: pick the largest of the four squared components for conditioning.
    const double tr = r.trace();
    const Vec4 diag(r(0, 0), r(1, 1), r(2, 2), tr);
    int k = 0;
    diag.maxCoeff(&k);
    EulerParam q;
    if (k == 3) {
        const double s = std::sqrt(1.0 + tr) * 2.0;
        q.qo = 0.25 * s;
        q.qv = Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)) / s;
    } else {
        const int i = k;
        const int j = (i + 1) % 3;
        const int l = (i + 2) % 3;
        const double s = std::sqrt(1.0 + r(i, i) - r(j, j) - r(l, l)) * 2.0;
        q.qv(i) = 0.25 * s;
        q.qv(j) = (r(j, i) + r(i, j)) / s;
        q.qv(l) = (r(l, i) + r(i, l)) / s;
        q.qo = (r(l, j) - r(j, l)) / s;
    }
    if (q.qo < 0.0) {
        q.qv = -q.qv;
        q.qo = -q.qo;
    }
    return q;
}

EulerParam EulerParam::normalized() const {
    const double n = norm();
    return {qv / n, qo / n};
}

Mat3 EulerParam::rotation() const {
    return (qo * qo - qv.squaredNorm()) * Mat3::Identity() + 2.0 * qv * qv.transpose() +
           2.0 * qo * skew(qv);
}

EulerParam euler_error(const EulerParam& q, const EulerParam& q_z) {
    EulerParam dq;
    dq.qv = q_z.qo * q.qv - q.qo * q_z.qv + skew(q.qv) * q_z.qv;
    dq.qo = q.qo * q_z.qo + q.qv.dot(q_z.qv);
    return dq;
}

Eigen::Matrix<double, 4, 3> d_matrix(const EulerParam& dq) {
    Eigen::Matrix<double, 4, 3> d;
    d.topRows<3>() = 0.5 * (dq.qo * Mat3::Identity() + skew(dq.qv));
    d.bottomRows<1>() = -0.5 * dq.qv.transpose();
    return d;
}

Vec4 euler_rate_body(const EulerParam& q, const Vec3& omega_body) {
    Vec4 r;
    r.head<3>() = 0.5 * (q.qo * Mat3::Identity() + skew(q.qv)) * omega_body;
    r(3) = -0.5 * q.qv.dot(omega_body);
    return r;
}

Vec4 euler_rate_inertial(const EulerParam& q, const Vec3& omega_inertial) {
    Vec4 r;
    r.head<3>() = 0.5 * (q.qo * Mat3::Identity() - skew(q.qv)) * omega_inertial;
    r(3) = -0.5 * q.qv.dot(omega_inertial);
    return r;
}

Mat3 orthonormalize(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 u = svd.matrixU();
        u.col(2) = -u.col(2);
        r = u * svd.matrixV().transpose();
    }
    return r;
}

namespace {

struct Angle {
    double value;
    double rate;
    double accel;
};

Angle sinusoid(double amplitude, double period, double t) {
    const double w = 2.0 * std::numbers::pi / period;
    return {amplitude * std::sin(w * t), amplitude * w * std::cos(w * t),
            -amplitude * w * w * std::sin(w * t)};
}

Mat3 axis_rotation(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace

DesiredAttitude desired_attitude(const AttitudeProfile& p, double t) {
    DesiredAttitude d;
    switch (p.kind) {
        case AttitudeProfile::Kind::Constant:
            d.r = axis_rotation(p.axis, p.amplitude);
            break;
        case AttitudeProfile::Kind::SingleAxis: {
            const Vec3 a = p.axis.normalized();
            const Angle phi = sinusoid(p.amplitude, p.period, t);
            d.r = axis_rotation(a, phi.value);
            d.omega_inertial = a * phi.rate;
            d.omega_dot_inertial = a * phi.accel;
            break;
        }
        case AttitudeProfile::Kind::TwoAxis: {
            const Angle phi1 = sinusoid(p.amplitude, p.period, t);
            const Angle phi2 = sinusoid(p.amplitude2, p.period2, t);
            const Mat3 rz = axis_rotation(Vec3::UnitZ(), phi1.value);
            const Mat3 ry = axis_rotation(Vec3::UnitY(), phi2.value);
            const Vec3 w1 = Vec3::UnitZ() * phi1.rate;
            const Vec3 y_axis = rz * Vec3::UnitY();
            d.r = rz * ry;
            d.omega_inertial = w1 + y_axis * phi2.rate;
            d.omega_dot_inertial = Vec3::UnitZ() * phi1.accel + y_axis * phi2.accel +
                                   w1.cross(y_axis) * phi2.rate;
            break;
        }
    }
    const Mat3 sw = skew(d.omega_inertial);
    d.r_dot = sw * d.r;
    d.r_ddot = skew(d.omega_dot_inertial) * d.r + sw * sw * d.r;
    return d;
}

}  // namespace fstep
