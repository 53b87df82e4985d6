#include "forwardstep/refdyn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fstep {

HurwitzSpec hurwitz_from_roots(std::vector<double> roots) {
    if (roots.empty()) {
        throw ConfigError("at least one Hurwitz root is required");
    }
    for (double r : roots) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            std::ostringstream os;
            os << "Hurwitz roots must be positive (got " << r << ")";
            throw ConfigError(os.str());
        }
    }
    std::sort(roots.begin(), roots.end());
    // Multiply out (s + k_0)(s + k_1)... in ascending coefficient order.
    std::vector<double> c{1.0};
    for (double k : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += k * c[i];
            next[i + 1] += c[i];
        }
        c = std::move(next);
    }
    c.pop_back();
    return {std::move(roots), std::move(c)};
}

int stack_order(ConsensusVariant v, const HurwitzSpec& spec) {
    switch (v) {
        case ConsensusVariant::FirstOrder:
            return 1;
        case ConsensusVariant::SecondOrderFixed:
        case ConsensusVariant::SecondOrderSwitching:
            return 2;
        case ConsensusVariant::GeneralVelocity:
        case ConsensusVariant::GeneralPosition:
            return spec.order();
    }
    return 0;
}

bool supports_switching(ConsensusVariant v) { return v != ConsensusVariant::SecondOrderFixed; }

void check_variant(ConsensusVariant v, const HurwitzSpec& spec, bool switching) {
    const int l = spec.order();
    switch (v) {
        case ConsensusVariant::FirstOrder:
            if (l != 1) throw ConfigError("first-order reference dynamics take exactly one root");
            break;
        case ConsensusVariant::SecondOrderFixed:
        case ConsensusVariant::SecondOrderSwitching:
            if (l != 2) throw ConfigError("second-order reference dynamics take exactly two roots");
            break;
        case ConsensusVariant::GeneralVelocity:
        case ConsensusVariant::GeneralPosition:
            if (l < 2) throw ConfigError("general reference dynamics need order >= 2");
            break;
    }
    if (switching && !supports_switching(v)) {
        throw ConfigError(
            "second-order-fixed reference dynamics consume the acceleration and cannot be used "
            "with a switching topology; use second-order-switching");
    }
}

namespace {

Vec first_order(const HurwitzSpec& spec, const Vec& q, const Vec& qd,
                const std::vector<DelayedNeighbor>& nb) {
    const double a = spec.roots[0];
    const Vec xi = qd + a * q;
    Vec out = -a * qd;
    for (const auto& n : nb) {
        out -= n.w * (xi - (n.qd + a * n.q));
    }
    return out;
}

Vec second_order_fixed(const HurwitzSpec& spec, const Vec& q, const Vec& qd, const Vec& qdd,
                       const std::vector<DelayedNeighbor>& nb) {
    const double a = spec.roots[0];
    const double b = spec.roots[1];
    const Vec xi = qd + a * q;
    const Vec xi_dot = qdd + a * qd;
    Vec out = -(a + b) * qdd - a * b * qd;
    for (const auto& n : nb) {
        out -= n.w * (xi_dot + b * xi - b * (n.qd + a * n.q));
    }
    return out;
}

Vec second_order_switching(const HurwitzSpec& spec, const std::vector<Vec>& stack, const Vec& q,
                           const Vec& qd, const std::vector<DelayedNeighbor>& nb) {
    const double a = spec.roots[0];
    const double b = spec.roots[1];
    const Vec& zd = stack[1];
    const Vec xi = qd + a * q;
    Vec out = -(a + b) * zd - a * b * qd;
    for (const auto& n : nb) {
        out -= n.w * (zd + a * qd + b * xi - b * (n.qd + a * n.q));
    }
    return out;
}

Vec general(const HurwitzSpec& spec, const std::vector<Vec>& stack, const Vec& q, const Vec& qd,
            const std::vector<DelayedNeighbor>& nb, bool relative_velocity) {
    const int l = spec.order();
    Vec out = -spec.alpha(0) * qd;
    for (int r = 1; r < l; ++r) {
        out -= spec.alpha(r) * stack[static_cast<std::size_t>(r)];
    }
    if (nb.empty()) {
        return out;
    }
    // Own part of the bracket, shared by every neighbor.
    Vec own = spec.alpha(1) * qd + spec.alpha(0) * q;
    for (int r = 1; r < l; ++r) {
        own += spec.alpha(r + 1) * stack[static_cast<std::size_t>(r)];
    }
    const double vel_gain = spec.alpha(0) / spec.min_root();
    for (const auto& n : nb) {
        Vec term = own - spec.alpha(0) * n.q;
        if (relative_velocity) {
            term -= vel_gain * n.qd;
        }
        out -= n.w * term;
    }
    return out;
}

}  // namespace

Vec consensus_ref_deriv(ConsensusVariant v, const HurwitzSpec& spec, const std::vector<Vec>& stack,
                        const Vec& q, const Vec& qd, const Vec* qdd,
                        const std::vector<DelayedNeighbor>& neighbors) {
    switch (v) {
        case ConsensusVariant::FirstOrder:
            return first_order(spec, q, qd, neighbors);
        case ConsensusVariant::SecondOrderFixed:
            if (qdd == nullptr) {
                throw UsageError("second-order-fixed reference dynamics need the acceleration");
            }
            return second_order_fixed(spec, q, qd, *qdd, neighbors);
        case ConsensusVariant::SecondOrderSwitching:
            return second_order_switching(spec, stack, q, qd, neighbors);
        case ConsensusVariant::GeneralVelocity:
            return general(spec, stack, q, qd, neighbors, true);
        case ConsensusVariant::GeneralPosition:
            return general(spec, stack, q, qd, neighbors, false);
    }
    return {};
}

Vec consensus_ref_deriv_manip(const HurwitzSpec& spec, const std::vector<Vec>& stack, const Vec& q,
                              const Vec& qd, const Vec& qdd,
                              const std::vector<DelayedNeighbor>& neighbors, double lambda_m) {
    Vec out = second_order_fixed(spec, q, qd, qdd, neighbors);
    if (lambda_m != 0.0) {
        out += lambda_m * (qd - stack[0]);
    }
    return out;
}

Vec tpv_ref_deriv(const std::vector<Vec>& stack, const Vec& x, const Vec& xd,
                  const std::vector<DelayedNeighbor>& neighbors, double alpha, double beta,
                  double gamma) {
    const double c2 = alpha + beta + gamma;
    const double c1 = alpha * beta + alpha * gamma + beta * gamma;
    const double c0 = alpha * beta * gamma;
    const Vec& zd = stack[1];
    const Vec& zdd = stack[2];
    Vec out = -c2 * zdd - c1 * zd - c0 * xd;
    const Vec own = zdd + c2 * zd + c1 * xd + c0 * x;
    for (const auto& n : neighbors) {
        out -= n.w * (own - c0 * n.q);
    }
    return out;
}

TaskspaceRef taskspace_ref_deriv(const TaskspaceRefInput& in) {
    Eigen::JacobiSVD<Mat> svd(in.j_hat);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    TaskspaceRef out;
    out.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (!(out.condition <= in.condition_cap)) {
        std::ostringstream os;
        os << "Jacobian estimate condition number " << out.condition << " exceeds cap "
           << in.condition_cap;
        throw AbortError("singularity", os.str());
    }
    const auto lu = in.j_hat.partialPivLu();
    out.z_r = lu.solve(in.xd_dot);
    out.z_r_dot = lu.solve(in.xd_ddot - in.j_hat_dot * out.z_r);
    out.z_dot = out.z_r_dot - in.alpha * (in.z - out.z_r) - in.j_hat.transpose() * in.k_star * in.dx;
    return out;
}

Vec3 spacecraft_ref_deriv(const Vec3& z, const Mat3& r, const Vec3& omega_d_inertial,
                          const Vec3& omega_d_inertial_dot, const Vec3& dq_v, double alpha1,
                          double alpha2) {
    const Vec3 omega_d = r.transpose() * omega_d_inertial;
    return r.transpose() * omega_d_inertial_dot - z.cross(omega_d) - alpha2 * (z - omega_d) -
           alpha1 * dq_v;
}

Vec tracking_ref_first(const Vec& q, const Vec& qd, const std::vector<TrackingNeighbor>& nb,
                       double alpha, double gamma) {
    const Vec xi = qd + alpha * q;
    Vec e = Vec::Zero(q.size());
    for (const auto& n : nb) {
        e += n.w * (xi - (n.qd + alpha * n.q));
    }
    return -alpha * qd - e - gamma * sgn(e);
}

Vec tracking_ref_second(const Vec& q, const Vec& qd, const Vec& qdd,
                        const std::vector<TrackingNeighbor>& nb, double alpha, double beta,
                        double gamma) {
    const Vec xi = qdd + beta * qd + alpha * q;
    Vec e = Vec::Zero(q.size());
    for (const auto& n : nb) {
        e += n.w * (xi - (n.qdd + beta * n.qd + alpha * n.q));
    }
    return -beta * qdd - alpha * qd - e - gamma * sgn(e);
}

Vec tracking_ref_noaccel_zdot(const Vec& q, const Vec& qd, const Vec& i1, const Vec& i2,
                              const std::vector<TrackingNeighbor>& nb, double alpha, double beta,
                              double gamma) {
    Vec out = -beta * qd - alpha * q - i1 - gamma * i2;
    for (const auto& n : nb) {
        out -= n.w * (qd - n.qd);
    }
    return out;
}

TrackingIntegrands tracking_ref_noaccel_integrands(const Vec& q, const Vec& qd, const Vec& zd,
                                                   const std::vector<TrackingNeighbor>& nb,
                                                   double alpha, double beta) {
    const Vec xi = zd + beta * qd + alpha * q;
    TrackingIntegrands out{Vec::Zero(q.size()), Vec::Zero(q.size())};
    Vec e = Vec::Zero(q.size());
    for (const auto& n : nb) {
        out.i1_dot += n.w * (beta * (qd - n.qd) + alpha * (q - n.q));
        e += n.w * (xi - (n.zd + beta * n.qd + alpha * n.q));
    }
    out.i2_dot = sgn(e);
    return out;
}

double leader_xi_dot_sup(double amplitude, double freq, double alpha) {
    return std::abs(amplitude) * freq * std::hypot(freq, alpha);
}

double leader_xi_star_dot_sup(double amplitude, double freq, double alpha, double beta) {
    return std::abs(amplitude) * freq * std::hypot(alpha - freq * freq, beta * freq);
}

Vec pointmass_ref_deriv(const Vec& z, const Vec& z_dot, const Vec& x, const Vec& x_d,
                        const Vec& xd_dot, const Vec& xd_ddot, const Vec& xd_dddot, double a0,
                        double a1, double a2) {
    return xd_dddot - a2 * (z_dot - xd_ddot) - a1 * (z - xd_dot) - a0 * (x - x_d);
}

}  // namespace fstep
