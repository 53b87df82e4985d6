#pragma once

#include "forwardstep/lagrangian.hpp"
#include "forwardstep/so3.hpp"
#include "forwardstep/types.hpp"

#include <vector>

namespace fstep {

struct AdaptiveTorque {
    Vec tau;
    Vec theta_hat_dot;
    Vec s;   // q' - z
};

/// tau = -K s + Y(q, q', z, z') theta_hat,  theta_hat' = -Gamma Y^T s,  s = q' - z.
AdaptiveTorque slotine_li_torque(const LagrangianModel& model, const Vec& q, const Vec& qd,
                                 const Vec& z, const Vec& z_dot, const Vec& theta_hat,
                                 const Mat& gamma, const Mat& k);

/// Backstepping baseline. Neighbor data are sampled at t - T_ij; delay_rate is T_ij'(t).
struct BaselineNeighbor {
    double w = 0.0;
    Vec q;
    Vec qd;
    double delay_rate = 0.0;
};

/// Desired virtual control q_r' = -sum w (q_i - q_j(t - T_ij)).
Vec baseline_qr_dot(const Vec& q, const std::vector<BaselineNeighbor>& nb);
/// Its derivative away from switches and delay jumps: -sum w (q_i' - (1 - T') q_j'(t - T)).
Vec baseline_qr_ddot_smooth(const Vec& qd, const std::vector<BaselineNeighbor>& nb);

struct BaselineReference {
    Vec qr_dot;
    Vec qr_ddot_raw;   // before clamping
    Vec qr_ddot;       // clamped componentwise to +-clamp
    bool clamped = false;
};

/// `impulse` is the discrete derivative of a jump of q_r' at a switch or delay jump
/// ((new - old) / h), zero elsewhere.
BaselineReference baseline_reference(const Vec& q, const Vec& qd,
                                     const std::vector<BaselineNeighbor>& nb, const Vec& impulse,
                                     double clamp);

/// Slotine-Li law with (z, z') replaced by (q_r', q_r'').
AdaptiveTorque backstepping_baseline_torque(const LagrangianModel& model, const Vec& q,
                                            const Vec& qd, const BaselineReference& ref,
                                            const Vec& theta_hat, const Mat& gamma, const Mat& k);

/// Point-mass output feedback. The passive filter y' + lf y = lf (x' - z) is realized from
/// positions only as y = lf (x - zeta - eta) with zeta' = z, eta' = y.
struct PointMassFilter {
    Vec zeta;
    Vec eta;
};

struct PointMassCommand {
    Vec u;
    Vec y;
    Vec zeta_dot;
    Vec eta_dot;
};

/// u = m_hat z' - k y.
PointMassCommand pointmass_control(const Vec& x, const Vec& z, const Vec& z_dot,
                                   const PointMassFilter& f, double m_hat, double k,
                                   double lambda_f);

/// Closed-form mass estimate:
///   m_hat = m_hat0 - g* [z'^T x - z^T z / 2]_0^t + g* int x^T z'' dt.
/// `accumulated` is the running integral, advanced with integrand pointmass_mhat_integrand.
double pointmass_mhat(double m_hat0, double gamma_star, const Vec& x, const Vec& z,
                      const Vec& z_dot, const Vec& x0, const Vec& z0, const Vec& z_dot0,
                      double accumulated);
double pointmass_mhat_integrand(const Vec& x, const Vec& z_ddot);

/// TPV dynamic feedback linearization. With v = -R^T u:
///   w2 = v1 / sigma, w1 = -v2 / sigma, sigma' = v3 - c sigma, w3 = 0.
struct FblCommand {
    double sigma_dot = 0.0;
    Vec3 omega = Vec3::Zero();   // (w1, w2, 0) body rates
};

/// Throws AbortError("thrust-floor") when sigma < sigma_min.
FblCommand tpv_fbl_extract(const Vec3& u, const Mat3& r, double sigma, double c,
                           double sigma_min);
/// Inverse map: -R [sigma w2, -sigma w1, sigma' + c sigma]^T.
Vec3 tpv_fbl_assemble(const FblCommand& cmd, const Mat3& r, double sigma, double c);

/// Neighbor position sampled at t - T_ij.
struct TpvNeighbor {
    double w = 0.0;
    Vec3 x;
};

struct TpvContinuous {
    Vec3 u;
    double c = 0.0;   // alpha + beta + sum w, the linearization constant
};

/// u = m psi - c m g e3 with psi = -ab x' - sum w [(a + b) x' + ab x - ab x_j(t - T)].
TpvContinuous tpv_continuous_command(const Vec3& x, const Vec3& xd,
                                     const std::vector<TpvNeighbor>& nb, double mass,
                                     double gravity, double alpha, double beta);

/// u* = m (z'' + a* z') - k s* - a* m g e3.
Vec3 tpv_differentiable_command(const Vec3& z_ddot, const Vec3& z_dot, const Vec3& s_star,
                                double mass, double gravity, double k, double alpha_star);

struct TpvAdaptive {
    Vec3 u;
    double m_hat_dot = 0.0;   // -g* a^T s*', with a = z'' + a* z' - a* g e3
};

/// u* = m_hat (z'' + a* z') - a* m_hat g e3. `s_star_dot` only feeds the returned derivative,
/// which the closed loop uses as an independent check of the accumulator form.
TpvAdaptive tpv_adaptive_command(const Vec3& z_ddot, const Vec3& z_dot, const Vec3& s_star_dot,
                                 double m_hat, double gamma_star, double gravity,
                                 double alpha_star);

/// a = z'' + a* z' - a* g e3.
Vec3 tpv_adaptation_signal(const Vec3& z_ddot, const Vec3& z_dot, double gravity,
                           double alpha_star);
/// m_hat = m_hat0 - g* [a^T x']_0^t + g* accumulated.
double tpv_mhat(double m_hat0, double gamma_star, const Vec3& a, const Vec3& xd, const Vec3& a0,
                const Vec3& xd0, double accumulated);
/// Integrand a^T z' + (z''' + a* z'')^T x'.
double tpv_mhat_integrand(const Vec3& a, const Vec3& z_dot, const Vec3& z_dddot,
                          const Vec3& z_ddot, const Vec3& xd, double alpha_star);

/// Task-space kinematic adaptation theta_hat' = Lambda Z(q, q')^T K* dx.
Vec taskspace_kinematic_update(const Vec& q, const Vec& qd, const Vec& dx, const Mat& lambda,
                               const Mat& k_star);

struct TaskspaceCommand {
    Vec tau;
    Vec theta_hat_dot;
    Vec s;
};

/// tau = -K s - kappa Jh^T K* dx + Y(q, q', z, z') theta_hat, theta_hat' = -Gamma Y^T s.
TaskspaceCommand taskspace_control(const LagrangianModel& model, const Vec& q, const Vec& qd,
                                   const Vec& z, const Vec& z_dot, const Mat& j_hat,
                                   const Vec& dx, const Vec& theta_hat, const Mat& gamma,
                                   const Mat& k, const Mat& k_star, double kappa);

/// Spacecraft output feedback. Inputs are attitude-level only.
struct SpacecraftCommand {
    Vec3 tau;
    Vec4 y_rate;      // y' = K dq* - Lf y
    Vec4 shadow_dot;  // (qv_z', qo_z') driven by the inertial rate R z
};

/// tau = M z' - S(h) z - D(dq*)^T K y'.
SpacecraftCommand spacecraft_control(const Mat3& inertia, const Vec3& h_body, const Vec3& z,
                                     const Vec3& z_dot, const EulerParam& dq_star, const Vec4& y,
                                     const Mat& k, const Mat& lambda_f,
                                     const EulerParam& shadow, const Mat3& r);

}  // namespace fstep
