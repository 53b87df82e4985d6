#include "forwardstep/control.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace fstep;
using fstep::testing::Gen;
using fstep::testing::rel_err;

TEST(SlotineLi, CertaintyEquivalencePoint) {
    const TwoLinkArm arm;
    Gen gen(41);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec q = gen.vec(2, -3, 3), z = gen.vec(2), zd = gen.vec(2);
        const Mat gamma = gen.spd(5), k = gen.spd(2);
        const auto out = slotine_li_torque(arm, q, z, z, zd, arm.true_params(), gamma, k);
        const Vec expected = arm.inertia(q) * zd + arm.coriolis(q, z) * z + arm.gravity(q);
        EXPECT_LE(rel_err(out.tau, expected), 1e-12);
        EXPECT_EQ(out.theta_hat_dot, Vec::Zero(5));
        const auto frozen = slotine_li_torque(arm, q, z, z, zd, gen.vec(5), gamma, k);
        EXPECT_EQ(frozen.theta_hat_dot, Vec::Zero(5));
    }
}

TEST(SlotineLi, OracleOnRandomInputs) {
    const TwoLinkArm arm;
    Gen gen(42);
    for (int trial = 0; trial < 500; ++trial) {
        const Vec q = gen.vec(2, -3, 3), qd = gen.vec(2), z = gen.vec(2), zd = gen.vec(2), th = gen.vec(5);
        const Mat gamma = gen.spd(5), k = gen.spd(2);
        const Mat y = arm.regressor(q, qd, z, zd);
        const auto out = slotine_li_torque(arm, q, qd, z, zd, th, gamma, k);
        EXPECT_LE(rel_err(out.tau, -k * (qd - z) + y * th), 1e-12);
        EXPECT_LE(rel_err(out.theta_hat_dot, -gamma * y.transpose() * (qd - z)), 1e-12);
    }
}

TEST(Baseline, NoNeighborsReducesToDamping) {
    const TwoLinkArm arm;
    Gen gen(43);
    const Vec q = gen.vec(2), qd = gen.vec(2), th = gen.vec(5);
    const Mat k = gen.spd(2), gamma = gen.spd(5);
    const auto ref = baseline_reference(q, qd, {}, Vec::Zero(2), 1e6);
    EXPECT_EQ(ref.qr_dot, Vec::Zero(2));
    EXPECT_EQ(ref.qr_ddot, Vec::Zero(2));
    const auto out = backstepping_baseline_torque(arm, q, qd, ref, th, gamma, k);
    const Vec expected = -k * qd + arm.regressor(q, qd, Vec::Zero(2), Vec::Zero(2)) * th;
    EXPECT_LE(rel_err(out.tau, expected), 1e-12);
}

TEST(Baseline, StaticNeighborsConstantDelay) {
    Gen gen(44);
    const Vec q = gen.vec(2), qd = gen.vec(2);
    // Neighbors at rest under a constant delay contribute only -sum w q_i'.
    const std::vector<BaselineNeighbor> nb{{0.5, gen.vec(2), Vec::Zero(2), 0.0},
                                           {1.5, gen.vec(2), Vec::Zero(2), 0.0}};
    EXPECT_LE((baseline_qr_ddot_smooth(qd, nb) + 2.0 * qd).norm(), 1e-15);
    const std::vector<BaselineNeighbor> moving{{2.0, gen.vec(2), Vec::Ones(2), 0.25}};
    EXPECT_LE((baseline_qr_ddot_smooth(qd, moving) + 2.0 * (qd - 0.75 * Vec::Ones(2))).norm(), 1e-15);
}

TEST(Baseline, ClampRecordsRawValue) {
    const Vec impulse = Eigen::Vector2d(5e6, -2.0);
    const auto ref = baseline_reference(Vec::Zero(2), Vec::Zero(2), {}, impulse, 1e6);
    EXPECT_TRUE(ref.clamped);
    EXPECT_EQ(ref.qr_ddot_raw, impulse);
    EXPECT_EQ(ref.qr_ddot, Eigen::Vector2d(1e6, -2.0));
}

TEST(PointMassControl, PerfectTrackingPoint) {
    const double m = 2.0;
    const Vec x = Vec::Constant(1, 0.3);
    const PointMassFilter f{Vec::Zero(1), x};   // y = lf (x - 0 - x) = 0
    const Vec z = Vec::Constant(1, 0.4), acc = Vec::Constant(1, -0.7);
    const auto c = pointmass_control(x, z, acc, f, m, 5.0, 3.0);
    EXPECT_EQ(c.y, Vec::Zero(1));
    EXPECT_EQ(c.u, m * acc);
    EXPECT_EQ(c.zeta_dot, z);
}

TEST(PointMassControl, MassEstimateFrozenWithoutReferenceAcceleration) {
    // With z' = 0 the closed form reduces to m_hat0 + g* (z^T z / 2 - z0^T z0 / 2) + g* int x^T z''.
    // Along z' == 0, z is constant and z'' = 0, so the estimate stays at m_hat0.
    const Vec z = Vec::Constant(1, 0.4), zero = Vec::Zero(1);
    EXPECT_DOUBLE_EQ(pointmass_mhat(0.5, 2.0, Vec::Constant(1, 3.0), z, zero, Vec::Constant(1, -1.0), z,
                                    zero, 0.0),
                     0.5);
}

TEST(TpvFbl, ExampleAndRoundTrip) {
    const auto cmd = tpv_fbl_extract(Vec3(0, 0, -2), Mat3::Identity(), 1.0, 1.0, 0.1);
    EXPECT_EQ(cmd.omega, Vec3::Zero());
    EXPECT_DOUBLE_EQ(cmd.sigma_dot, 1.0);
    const auto zero = tpv_fbl_extract(Vec3::Zero(), Mat3::Identity(), 2.0, 0.5, 0.1);
    EXPECT_EQ(zero.omega, Vec3::Zero());
    EXPECT_DOUBLE_EQ(zero.sigma_dot, -1.0);
    Gen gen(45);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 u = gen.vec3(-20, 20);
        const Mat3 r = gen.quaternion().rotation();
        const double sigma = gen.uniform(1, 20), c = gen.uniform(0.1, 10);
        const auto out = tpv_fbl_extract(u, r, sigma, c, 0.5);
        EXPECT_EQ(out.omega(2), 0.0);
        EXPECT_LE((tpv_fbl_assemble(out, r, sigma, c) - u).norm(), 1e-12 * std::max(1.0, u.norm()));
    }
}

TEST(TpvFbl, ThrustFloorAborts) {
    try {
        tpv_fbl_extract(Vec3::Zero(), Mat3::Identity(), 0.05, 1.0, 0.1);
        FAIL();
    } catch (const AbortError& e) {
        EXPECT_EQ(e.kind(), "thrust-floor");
    }
}

TEST(TpvCommands, Continuous) {
    const double m = 1.2, g = 9.81, a = 1.0, b = 2.0;
    const std::vector<TpvNeighbor> nb{{0.5, Vec3::Zero()}, {1.5, Vec3::Zero()}};
    const auto rest = tpv_continuous_command(Vec3::Zero(), Vec3::Zero(), nb, m, g, a, b);
    EXPECT_DOUBLE_EQ(rest.c, 5.0);
    EXPECT_LE((rest.u + 5.0 * m * g * e3()).norm(), 1e-12);
    Gen gen(46);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 x = gen.vec3(), xd = gen.vec3();
        const std::vector<TpvNeighbor> nbr{{gen.uniform(0.1, 2), gen.vec3()}, {gen.uniform(0.1, 2), gen.vec3()}};
        Vec3 psi = -a * b * xd;
        double ws = 0;
        for (const auto& n : nbr) {
            psi -= n.w * ((a + b) * xd + a * b * x - a * b * n.x);
            ws += n.w;
        }
        const auto out = tpv_continuous_command(x, xd, nbr, m, g, a, b);
        EXPECT_LE(rel_err(out.u, m * psi - (a + b + ws) * m * g * e3()), 1e-12);
        // Consensus at hover: psi vanishes.
        const std::vector<TpvNeighbor> agree{{1.0, x}};
        EXPECT_LE((tpv_continuous_command(x, Vec3::Zero(), agree, m, g, a, b).u +
                   (a + b + 1.0) * m * g * e3()).norm(), 1e-12);
    }
}

TEST(TpvCommands, DifferentiableAndAdaptive) {
    const double m = 1.5, g = 9.81, k = 3.0, as = 2.0;
    EXPECT_LE((tpv_differentiable_command(Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), m, g, k, as) +
               as * m * g * e3()).norm(), 1e-12);
    Gen gen(47);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 zdd = gen.vec3(), zd = gen.vec3(), s = gen.vec3(), sd = gen.vec3();
        const Vec3 expected = m * (zdd + as * zd) - k * s - as * m * g * e3();
        EXPECT_LE(rel_err(tpv_differentiable_command(zdd, zd, s, m, g, k, as), expected), 1e-12);
        const auto ad = tpv_adaptive_command(zdd, zd, sd, m, 0.7, g, as);
        EXPECT_LE(rel_err(ad.u, tpv_differentiable_command(zdd, zd, Vec3::Zero(), m, g, 0.0, as)), 1e-12);
        const Vec3 a = zdd + as * zd - as * g * e3();
        EXPECT_NEAR(ad.m_hat_dot, -0.7 * a.dot(sd), 1e-12 * std::max(1.0, std::abs(ad.m_hat_dot)));
    }
    // a = 0 freezes the estimate.
    const Vec3 zd(0.1, -0.2, 0.3);
    const Vec3 zdd = -as * zd + as * g * e3();
    EXPECT_NEAR(tpv_adaptive_command(zdd, zd, Vec3(1, 2, 3), m, 0.7, g, as).m_hat_dot, 0.0, 1e-12);
}

TEST(Taskspace, FrozenAdaptation) {
    const TwoLinkArm arm;
    Gen gen(48);
    const Vec q = gen.vec(2), z = gen.vec(2), zd = gen.vec(2);
    const Mat jh = TwoLinkArm::jacobian(q, gen.vec(2, 0.3, 0.6));
    const auto out = taskspace_control(arm, q, z, z, zd, jh, Vec::Zero(2), arm.true_params(),
                                       gen.spd(5), gen.spd(2), gen.spd(2), 2.0);
    const Vec expected = arm.inertia(q) * zd + arm.coriolis(q, z) * z + arm.gravity(q);
    EXPECT_LE(rel_err(out.tau, expected), 1e-12);
    EXPECT_EQ(out.theta_hat_dot, Vec::Zero(5));
    EXPECT_EQ(taskspace_kinematic_update(q, z, Vec::Zero(2), gen.spd(2), gen.spd(2)), Vec::Zero(2));
    EXPECT_EQ(taskspace_kinematic_update(q, Vec::Zero(2), gen.vec(2), gen.spd(2), gen.spd(2)), Vec::Zero(2));
}

TEST(Spacecraft, ZeroCommandAtRest) {
    const Mat k = Mat::Identity(4, 4) * 2.0, lf = Mat::Identity(4, 4) * 3.0;
    const EulerParam id = EulerParam::identity();
    // y chosen so that y' = K dq* - Lf y = 0 at the identity error.
    const Vec4 y = lf.inverse() * k * id.as_vec4();
    const auto out = spacecraft_control(Vec3(1, 2, 3).asDiagonal(), Vec3(0.1, 0.2, 0.3), Vec3::Zero(),
                                        Vec3::Zero(), id, y, k, lf, id, Mat3::Identity());
    EXPECT_LE(out.tau.norm(), 1e-15);
    EXPECT_LE(out.y_rate.norm(), 1e-15);
    EXPECT_LE(out.shadow_dot.norm(), 1e-15);
}

TEST(Spacecraft, OracleOnRandomInputs) {
    Gen gen(49);
    for (int trial = 0; trial < 1000; ++trial) {
        const Mat3 m = gen.spd(3);
        const Vec3 h = gen.vec3(), z = gen.vec3(), zd = gen.vec3();
        const EulerParam dq = gen.quaternion();
        const Vec4 y = gen.vec(4);
        const Mat k = gen.spd(4), lf = gen.spd(4);
        const auto out = spacecraft_control(m, h, z, zd, dq, y, k, lf, gen.quaternion(), Mat3::Identity());
        const Vec4 ydot = k * dq.as_vec4() - lf * y;
        Eigen::Matrix<double, 4, 3> d;
        d.topRows<3>() = 0.5 * (dq.qo * Mat3::Identity() + skew(dq.qv));
        d.row(3) = -0.5 * dq.qv.transpose();
        const Vec3 expected = m * zd - skew(h) * z - d.transpose() * k * ydot;
        EXPECT_LE(rel_err(out.tau, expected), 1e-12);
    }
}
