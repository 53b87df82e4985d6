#include "forwardstep/lagrangian.hpp"

#include <cmath>

namespace fstep {

Vec lagrangian_accel(const LagrangianModel& model, const Vec& q, const Vec& qd, const Vec& tau) {
    const Vec rhs = tau - model.coriolis(q, qd) * qd - model.gravity(q);
    Eigen::LLT<Mat> llt(model.inertia(q));
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("inertia matrix is not positive definite");
    }
    return llt.solve(rhs);
}

TwoLinkArm::TwoLinkArm(Physical p) : phys_(p), params_(5) {
    if (!(p.m1 > 0 && p.m2 > 0 && p.l1 > 0 && p.l2 > 0 && p.lc1 > 0 && p.lc2 > 0 && p.i1 > 0 &&
          p.i2 > 0 && p.gravity >= 0)) {
        throw ConfigError("two-link arm constants must be positive");
    }
    params_ << p.m1 * p.lc1 * p.lc1 + p.m2 * p.l1 * p.l1 + p.i1,
               p.m2 * p.lc2 * p.lc2 + p.i2,
               p.m2 * p.l1 * p.lc2,
               (p.m1 * p.lc1 + p.m2 * p.l1) * p.gravity,
               p.m2 * p.lc2 * p.gravity;
}

Mat TwoLinkArm::inertia(const Vec& q) const {
    const double c2 = std::cos(q(1));
    const auto& a = params_;
    Mat m(2, 2);
    m(0, 0) = a(0) + a(1) + 2.0 * a(2) * c2;
    m(0, 1) = a(1) + a(2) * c2;
    m(1, 0) = m(0, 1);
    m(1, 1) = a(1);
    return m;
}

Mat TwoLinkArm::coriolis(const Vec& q, const Vec& qd) const {
    const double h = -params_(2) * std::sin(q(1));
    Mat c(2, 2);
    c(0, 0) = h * qd(1);
    c(0, 1) = h * (qd(0) + qd(1));
    c(1, 0) = -h * qd(0);
    c(1, 1) = 0.0;
    return c;
}

Vec TwoLinkArm::gravity(const Vec& q) const {
    const double c1 = std::cos(q(0));
    const double c12 = std::cos(q(0) + q(1));
    return Eigen::Vector2d(params_(3) * c1 + params_(4) * c12, params_(4) * c12);
}

Mat TwoLinkArm::regressor(const Vec& q, const Vec& qd, const Vec& zeta, const Vec& zeta_d) const {
    const double c1 = std::cos(q(0));
    const double c2 = std::cos(q(1));
    const double s2 = std::sin(q(1));
    const double c12 = std::cos(q(0) + q(1));
    Mat y = Mat::Zero(2, 5);
    y(0, 0) = zeta_d(0);
    y(0, 1) = zeta_d(0) + zeta_d(1);
    y(0, 2) = c2 * (2.0 * zeta_d(0) + zeta_d(1)) - s2 * qd(1) * zeta(0) -
              s2 * (qd(0) + qd(1)) * zeta(1);
    y(0, 3) = c1;
    y(0, 4) = c12;
    y(1, 1) = zeta_d(0) + zeta_d(1);
    y(1, 2) = c2 * zeta_d(0) + s2 * qd(0) * zeta(0);
    y(1, 4) = c12;
    return y;
}

Vec TwoLinkArm::forward_kinematics(const Vec& q) const {
    const double q12 = q(0) + q(1);
    return Eigen::Vector2d(phys_.l1 * std::cos(q(0)) + phys_.l2 * std::cos(q12),
                           phys_.l1 * std::sin(q(0)) + phys_.l2 * std::sin(q12));
}

Mat TwoLinkArm::jacobian(const Vec& q, const Vec& lengths) {
    const double s1 = std::sin(q(0));
    const double c1 = std::cos(q(0));
    const double s12 = std::sin(q(0) + q(1));
    const double c12 = std::cos(q(0) + q(1));
    const double l1 = lengths(0);
    const double l2 = lengths(1);
    Mat j(2, 2);
    j << -l1 * s1 - l2 * s12, -l2 * s12,
          l1 * c1 + l2 * c12,  l2 * c12;
    return j;
}

Mat TwoLinkArm::jacobian_rate(const Vec& q, const Vec& qd, const Vec& lengths,
                              const Vec& lengths_dot) {
    const double s1 = std::sin(q(0));
    const double c1 = std::cos(q(0));
    const double s12 = std::sin(q(0) + q(1));
    const double c12 = std::cos(q(0) + q(1));
    const double w1 = qd(0);
    const double w12 = qd(0) + qd(1);
    const double l1 = lengths(0);
    const double l2 = lengths(1);
    const double l1d = lengths_dot(0);
    const double l2d = lengths_dot(1);
    // J = l1 [-s1 0; c1 0] + l2 [-s12 -s12; c12 c12]
    Mat jd(2, 2);
    const double a00 = -l1d * s1 - l1 * c1 * w1;
    const double a10 = l1d * c1 - l1 * s1 * w1;
    const double b0 = -l2d * s12 - l2 * c12 * w12;
    const double b1 = l2d * c12 - l2 * s12 * w12;
    jd << a00 + b0, b0,
          a10 + b1, b1;
    return jd;
}

Mat TwoLinkArm::kinematic_regressor(const Vec& q, const Vec& xi) {
    const double s1 = std::sin(q(0));
    const double c1 = std::cos(q(0));
    const double s12 = std::sin(q(0) + q(1));
    const double c12 = std::cos(q(0) + q(1));
    const double x12 = xi(0) + xi(1);
    Mat z(2, 2);
    z << -s1 * xi(0), -s12 * x12,
          c1 * xi(0),  c12 * x12;
    return z;
}

PointMass::PointMass(double mass, int dim) : dim_(dim), params_(1) {
    if (!(mass > 0.0) || dim < 1) {
        throw ConfigError("point mass needs positive mass and dimension");
    }
    params_(0) = mass;
}

Mat PointMass::inertia(const Vec&) const { return params_(0) * Mat::Identity(dim_, dim_); }

Mat PointMass::coriolis(const Vec&, const Vec&) const { return Mat::Zero(dim_, dim_); }

Vec PointMass::gravity(const Vec&) const { return Vec::Zero(dim_); }

Mat PointMass::regressor(const Vec&, const Vec&, const Vec&, const Vec& zeta_d) const {
    return zeta_d;
}

}  // namespace fstep
