#pragma once

#include "forwardstep/types.hpp"

namespace fstep {

/// Plant of the form M(q) q'' + C(q, q') q' + g(q) = tau whose dynamics are linear in a
/// constant parameter vector: M(q) zeta' + C(q, q') zeta + g(q) = Y(q, q', zeta, zeta') * theta.
class LagrangianModel {
public:
    virtual ~LagrangianModel() = default;

    virtual int dof() const = 0;
    virtual int param_count() const = 0;
    virtual const Vec& true_params() const = 0;

    virtual Mat inertia(const Vec& q) const = 0;
    /// Christoffel-form Coriolis/centrifugal matrix; M' - 2C is skew-symmetric.
    virtual Mat coriolis(const Vec& q, const Vec& qd) const = 0;
    virtual Vec gravity(const Vec& q) const = 0;
    virtual Mat regressor(const Vec& q, const Vec& qd, const Vec& zeta, const Vec& zeta_d) const = 0;
};

/// q'' = M(q)^-1 (tau - C(q, q') q' - g(q)).
Vec lagrangian_accel(const LagrangianModel& model, const Vec& q, const Vec& qd, const Vec& tau);

/// Planar two-link revolute arm in a vertical plane. Joint angles are measured from the
/// horizontal x axis (q1) and relative to link 1 (q2); gravity acts along -y.
///
/// Dynamic parameters:
///   theta = [m1 lc1^2 + m2 l1^2 + I1,  m2 lc2^2 + I2,  m2 l1 lc2,
///            (m1 lc1 + m2 l1) g,  m2 lc2 g]
/// Kinematic parameters: [l1, l2].
class TwoLinkArm final : public LagrangianModel {
public:
    struct Physical {
        double m1 = 1.0;
        double m2 = 0.8;
        double l1 = 0.5;
        double l2 = 0.4;
        double lc1 = 0.25;   // center of mass distance along link 1
        double lc2 = 0.2;
        double i1 = 1.0 * 0.5 * 0.5 / 12.0;   // centroidal inertia, uniform rod
        double i2 = 0.8 * 0.4 * 0.4 / 12.0;
        double gravity = 9.81;
    };

    TwoLinkArm() : TwoLinkArm(Physical{}) {}
    explicit TwoLinkArm(Physical p);

    int dof() const override { return 2; }
    int param_count() const override { return 5; }
    const Vec& true_params() const override { return params_; }
    const Physical& physical() const { return phys_; }

    Mat inertia(const Vec& q) const override;
    Mat coriolis(const Vec& q, const Vec& qd) const override;
    Vec gravity(const Vec& q) const override;
    Mat regressor(const Vec& q, const Vec& qd, const Vec& zeta, const Vec& zeta_d) const override;

    Vec kinematic_params() const { return Eigen::Vector2d(phys_.l1, phys_.l2); }

    /// End-effector position.
    Vec forward_kinematics(const Vec& q) const;
    Mat jacobian(const Vec& q) const { return jacobian(q, kinematic_params()); }

    /// Jacobian built from a kinematic parameter vector (true or estimated link lengths).
    static Mat jacobian(const Vec& q, const Vec& lengths);
    /// Time derivative of jacobian(q, lengths) along (qd, lengths_dot).
    static Mat jacobian_rate(const Vec& q, const Vec& qd, const Vec& lengths,
                             const Vec& lengths_dot);
    /// Kinematic regressor: jacobian(q, lengths) * xi == kinematic_regressor(q, xi) * lengths.
    static Mat kinematic_regressor(const Vec& q, const Vec& xi);

private:
    Physical phys_;
    Vec params_;
};

/// m x'' = u in `dim` dimensions. One parameter: the mass.
class PointMass final : public LagrangianModel {
public:
    PointMass(double mass, int dim);

    int dof() const override { return dim_; }
    int param_count() const override { return 1; }
    const Vec& true_params() const override { return params_; }
    double mass() const { return params_(0); }

    Mat inertia(const Vec& q) const override;
    Mat coriolis(const Vec& q, const Vec& qd) const override;
    Vec gravity(const Vec& q) const override;
    Mat regressor(const Vec& q, const Vec& qd, const Vec& zeta, const Vec& zeta_d) const override;

private:
    int dim_;
    Vec params_;
};

}  // namespace fstep
