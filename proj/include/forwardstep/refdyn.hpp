#pragma once

#include "forwardstep/types.hpp"

#include <vector>

namespace fstep {

/// Real-rooted Hurwitz polynomial prod_r (s + kappa_r) = s^l + a_{l-1} s^{l-1} + ... + a_0.
struct HurwitzSpec {
    std::vector<double> roots;    // ascending, all > 0
    std::vector<double> coeffs;   // a_0 .. a_{l-1}

    int order() const { return static_cast<int>(roots.size()); }
    /// a_r for r in [0, l]; a_l = 1 (monic).
    double alpha(int r) const { return r == order() ? 1.0 : coeffs.at(static_cast<std::size_t>(r)); }
    double min_root() const { return roots.front(); }
};

/// Sorts the roots ascending and expands the product. Throws ConfigError on a root <= 0.
HurwitzSpec hurwitz_from_roots(std::vector<double> roots);

/// Reference-dynamics variants for leaderless consensus.
///   FirstOrder:           z'  from the l = 1 law (one root: alpha)
///   SecondOrderFixed:     z'' consuming own acceleration; fixed topology only (roots alpha <= beta)
///   SecondOrderSwitching: z'' with the acceleration replaced by z' (roots alpha <= beta)
///   GeneralVelocity:      d^l z with relative position and velocity, l >= 2
///   GeneralPosition:      d^l z with relative position only, l >= 2
enum class ConsensusVariant { FirstOrder, SecondOrderFixed, SecondOrderSwitching, GeneralVelocity, GeneralPosition };

/// Number of stacked z-derivatives the generator integrates (z, z', ..., d^{l-1} z).
int stack_order(ConsensusVariant v, const HurwitzSpec& spec);
bool supports_switching(ConsensusVariant v);
/// Throws ConfigError if the root count does not fit the variant.
void check_variant(ConsensusVariant v, const HurwitzSpec& spec, bool switching);

/// Neighbor j as seen by agent i: edge weight and (q_j, q_j') sampled at t - T_ij.
struct DelayedNeighbor {
    double w = 0.0;
    Vec q;
    Vec qd;
};

/// Highest z-derivative of the selected variant. `stack` holds z, z', ..., d^{l-1} z.
/// `qdd` is read by SecondOrderFixed only and may be null otherwise.
Vec consensus_ref_deriv(ConsensusVariant v, const HurwitzSpec& spec, const std::vector<Vec>& stack,
                        const Vec& q, const Vec& qd, const Vec* qdd,
                        const std::vector<DelayedNeighbor>& neighbors);

/// SecondOrderFixed plus lambda_m (q' - z).
Vec consensus_ref_deriv_manip(const HurwitzSpec& spec, const std::vector<Vec>& stack, const Vec& q,
                              const Vec& qd, const Vec& qdd,
                              const std::vector<DelayedNeighbor>& neighbors, double lambda_m);

/// TPV generator: third derivative of z from (z, z', z''), own position/velocity and delayed
/// neighbor positions (the qd member of each neighbor is ignored).
Vec tpv_ref_deriv(const std::vector<Vec>& stack, const Vec& x, const Vec& xd,
                  const std::vector<DelayedNeighbor>& neighbors, double alpha, double beta,
                  double gamma);

/// Task-space reference: z_r = Jh^-1 xd', z_r' = Jh^-1 (xd'' - Jh' z_r),
/// z' = z_r' - alpha (z - z_r) - Jh^T K* dx.
struct TaskspaceRef {
    Vec z_r;
    Vec z_r_dot;
    Vec z_dot;
    double condition = 0.0;
};

struct TaskspaceRefInput {
    Vec z;
    Mat j_hat;        // Jacobian estimate at q
    Mat j_hat_dot;    // its time derivative along (q', theta_hat')
    Vec dx;           // x - x_d
    Vec xd_dot;
    Vec xd_ddot;
    double alpha = 1.0;
    Mat k_star;
    double condition_cap = 1e6;
};

/// Throws AbortError("singularity") when cond(Jh) exceeds the cap.
TaskspaceRef taskspace_ref_deriv(const TaskspaceRefInput& in);

/// Spacecraft generator: z' = R^T wd_I' - S(z) R^T wd_I - alpha2 (z - w_d) - alpha1 dq_v,
/// w_d = R^T wd_I.
Vec3 spacecraft_ref_deriv(const Vec3& z, const Mat3& r, const Vec3& omega_d_inertial,
                          const Vec3& omega_d_inertial_dot, const Vec3& dq_v, double alpha1,
                          double alpha2);

/// Participant in distributed tracking as seen by follower i (the leader is one of these).
/// Undelayed. qdd is used by the order-3 generator, zd by the acceleration-free one.
struct TrackingNeighbor {
    double w = 0.0;
    Vec q;
    Vec qd;
    Vec qdd;
    Vec zd;
};

/// z' = -alpha q' - e - gamma sgn(e), e = sum w (xi_i - xi_j), xi = q' + alpha q.
Vec tracking_ref_first(const Vec& q, const Vec& qd, const std::vector<TrackingNeighbor>& nb,
                       double alpha, double gamma);

/// z'' = -beta q'' - alpha q' - e - gamma sgn(e), e = sum w (xi*_i - xi*_j),
/// xi* = q'' + beta q' + alpha q.
Vec tracking_ref_second(const Vec& q, const Vec& qd, const Vec& qdd,
                        const std::vector<TrackingNeighbor>& nb, double alpha, double beta,
                        double gamma);

/// Acceleration-free form: z' is algebraic in (q, q', i1, i2) with
///   i1 = int sum w (beta q_i' + alpha q_i - beta q_j' - alpha q_j),
///   i2 = int sgn(sum w (xi**_i - xi**_j)),  xi** = z' + beta q' + alpha q.
/// The additive constant is zero: both integrals start at zero.
Vec tracking_ref_noaccel_zdot(const Vec& q, const Vec& qd, const Vec& i1, const Vec& i2,
                              const std::vector<TrackingNeighbor>& nb, double alpha, double beta,
                              double gamma);

struct TrackingIntegrands {
    Vec i1_dot;
    Vec i2_dot;
};

TrackingIntegrands tracking_ref_noaccel_integrands(const Vec& q, const Vec& qd, const Vec& zd,
                                                   const std::vector<TrackingNeighbor>& nb,
                                                   double alpha, double beta);

/// sup_t |d/dt (q0' + alpha q0)|_inf for q0 = A sin(w t) per component.
double leader_xi_dot_sup(double amplitude, double freq, double alpha);
/// sup_t |d/dt (q0'' + beta q0' + alpha q0)|_inf for the same leader.
double leader_xi_star_dot_sup(double amplitude, double freq, double alpha, double beta);

/// Point-mass generator: z'' = xd''' - a2 (z' - xd'') - a1 (z - xd') - a0 (x - xd).
Vec pointmass_ref_deriv(const Vec& z, const Vec& z_dot, const Vec& x, const Vec& x_d,
                        const Vec& xd_dot, const Vec& xd_ddot, const Vec& xd_dddot, double a0,
                        double a1, double a2);

}  // namespace fstep
