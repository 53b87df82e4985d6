#include "forwardstep/control.hpp"

#include <sstream>

namespace fstep {

AdaptiveTorque slotine_li_torque(const LagrangianModel& model, const Vec& q, const Vec& qd,
                                 const Vec& z, const Vec& z_dot, const Vec& theta_hat,
                                 const Mat& gamma, const Mat& k) {
    const Mat y = model.regressor(q, qd, z, z_dot);
    AdaptiveTorque out;
    out.s = qd - z;
    out.tau = -k * out.s + y * theta_hat;
    out.theta_hat_dot = -gamma * (y.transpose() * out.s);
    return out;
}

Vec baseline_qr_dot(const Vec& q, const std::vector<BaselineNeighbor>& nb) {
    Vec out = Vec::Zero(q.size());
    for (const auto& n : nb) {
        out -= n.w * (q - n.q);
    }
    return out;
}

Vec baseline_qr_ddot_smooth(const Vec& qd, const std::vector<BaselineNeighbor>& nb) {
    Vec out = Vec::Zero(qd.size());
    for (const auto& n : nb) {
        out -= n.w * (qd - (1.0 - n.delay_rate) * n.qd);
    }
    return out;
}

BaselineReference baseline_reference(const Vec& q, const Vec& qd,
                                     const std::vector<BaselineNeighbor>& nb, const Vec& impulse,
                                     double clamp) {
    BaselineReference ref;
    ref.qr_dot = baseline_qr_dot(q, nb);
    ref.qr_ddot_raw = baseline_qr_ddot_smooth(qd, nb) + impulse;
    ref.qr_ddot = ref.qr_ddot_raw.cwiseMax(-clamp).cwiseMin(clamp);
    ref.clamped = (ref.qr_ddot.array() != ref.qr_ddot_raw.array()).any();
    return ref;
}

AdaptiveTorque backstepping_baseline_torque(const LagrangianModel& model, const Vec& q,
                                            const Vec& qd, const BaselineReference& ref,
                                            const Vec& theta_hat, const Mat& gamma, const Mat& k) {
    return slotine_li_torque(model, q, qd, ref.qr_dot, ref.qr_ddot, theta_hat, gamma, k);
}

PointMassCommand pointmass_control(const Vec& x, const Vec& z, const Vec& z_dot,
                                   const PointMassFilter& f, double m_hat, double k,
                                   double lambda_f) {
    PointMassCommand c;
    c.y = lambda_f * (x - f.zeta - f.eta);
    c.u = m_hat * z_dot - k * c.y;
    c.zeta_dot = z;
    c.eta_dot = c.y;
    return c;
}

double pointmass_mhat(double m_hat0, double gamma_star, const Vec& x, const Vec& z,
                      const Vec& z_dot, const Vec& x0, const Vec& z0, const Vec& z_dot0,
                      double accumulated) {
    const double boundary = (z_dot.dot(x) - 0.5 * z.squaredNorm()) -
                            (z_dot0.dot(x0) - 0.5 * z0.squaredNorm());
    return m_hat0 - gamma_star * boundary + gamma_star * accumulated;
}

double pointmass_mhat_integrand(const Vec& x, const Vec& z_ddot) { return x.dot(z_ddot); }

FblCommand tpv_fbl_extract(const Vec3& u, const Mat3& r, double sigma, double c,
                           double sigma_min) {
    if (!(sigma >= sigma_min)) {
        std::ostringstream os;
        os << "thrust " << sigma << " fell below the floor " << sigma_min;
        throw AbortError("thrust-floor", os.str());
    }
    const Vec3 v = -r.transpose() * u;
    FblCommand cmd;
    cmd.omega = Vec3(-v(1) / sigma, v(0) / sigma, 0.0);
    cmd.sigma_dot = v(2) - c * sigma;
    return cmd;
}

Vec3 tpv_fbl_assemble(const FblCommand& cmd, const Mat3& r, double sigma, double c) {
    return -r * Vec3(sigma * cmd.omega(1), -sigma * cmd.omega(0), cmd.sigma_dot + c * sigma);
}

TpvContinuous tpv_continuous_command(const Vec3& x, const Vec3& xd,
                                     const std::vector<TpvNeighbor>& nb, double mass,
                                     double gravity, double alpha, double beta) {
    const double ab = alpha * beta;
    Vec3 psi = -ab * xd;
    double wsum = 0.0;
    for (const auto& n : nb) {
        psi -= n.w * ((alpha + beta) * xd + ab * x - ab * n.x);
        wsum += n.w;
    }
    TpvContinuous out;
    out.c = alpha + beta + wsum;
    out.u = mass * psi - out.c * mass * gravity * e3();
    return out;
}

Vec3 tpv_differentiable_command(const Vec3& z_ddot, const Vec3& z_dot, const Vec3& s_star,
                                double mass, double gravity, double k, double alpha_star) {
    return mass * (z_ddot + alpha_star * z_dot) - k * s_star - alpha_star * mass * gravity * e3();
}

Vec3 tpv_adaptation_signal(const Vec3& z_ddot, const Vec3& z_dot, double gravity,
                           double alpha_star) {
    return z_ddot + alpha_star * z_dot - alpha_star * gravity * e3();
}

TpvAdaptive tpv_adaptive_command(const Vec3& z_ddot, const Vec3& z_dot, const Vec3& s_star_dot,
                                 double m_hat, double gamma_star, double gravity,
                                 double alpha_star) {
    const Vec3 a = tpv_adaptation_signal(z_ddot, z_dot, gravity, alpha_star);
    TpvAdaptive out;
    out.u = m_hat * a;
    out.m_hat_dot = -gamma_star * a.dot(s_star_dot);
    return out;
}

double tpv_mhat(double m_hat0, double gamma_star, const Vec3& a, const Vec3& xd, const Vec3& a0,
                const Vec3& xd0, double accumulated) {
    return m_hat0 - gamma_star * (a.dot(xd) - a0.dot(xd0)) + gamma_star * accumulated;
}

double tpv_mhat_integrand(const Vec3& a, const Vec3& z_dot, const Vec3& z_dddot,
                          const Vec3& z_ddot, const Vec3& xd, double alpha_star) {
    return a.dot(z_dot) + (z_dddot + alpha_star * z_ddot).dot(xd);
}

Vec taskspace_kinematic_update(const Vec& q, const Vec& qd, const Vec& dx, const Mat& lambda,
                               const Mat& k_star) {
    return lambda * (TwoLinkArm::kinematic_regressor(q, qd).transpose() * (k_star * dx));
}

TaskspaceCommand taskspace_control(const LagrangianModel& model, const Vec& q, const Vec& qd,
                                   const Vec& z, const Vec& z_dot, const Mat& j_hat,
                                   const Vec& dx, const Vec& theta_hat, const Mat& gamma,
                                   const Mat& k, const Mat& k_star, double kappa) {
    const Mat y = model.regressor(q, qd, z, z_dot);
    TaskspaceCommand out;
    out.s = qd - z;
    out.tau = -k * out.s - kappa * j_hat.transpose() * (k_star * dx) + y * theta_hat;
    out.theta_hat_dot = -gamma * (y.transpose() * out.s);
    return out;
}

SpacecraftCommand spacecraft_control(const Mat3& inertia, const Vec3& h_body, const Vec3& z,
                                     const Vec3& z_dot, const EulerParam& dq_star, const Vec4& y,
                                     const Mat& k, const Mat& lambda_f,
                                     const EulerParam& shadow, const Mat3& r) {
    SpacecraftCommand out;
    out.y_rate = k * dq_star.as_vec4() - lambda_f * y;
    out.tau = inertia * z_dot - h_body.cross(z) - d_matrix(dq_star).transpose() * (k * out.y_rate);
    out.shadow_dot = euler_rate_inertial(shadow, r * z);
    return out;
}

}  // namespace fstep
