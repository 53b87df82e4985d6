#include "forwardstep/control.hpp"
#include "forwardstep/lagrangian.hpp"
#include "forwardstep/refdyn.hpp"
#include "sim_internal.hpp"

#include <cmath>
#include <numbers>

namespace fstep::detail {

namespace {

// Point mass tracking x_d = A sin(w t) per component from position measurements.
// Block: x, v, z, z', zeta, eta, then the scalar accumulator and the two directly
// integrated duals (filter output and mass estimate) kept for comparison.
class PointmassTracking : public ClosedLoop {
public:
    PointmassTracking(const ScenarioConfig& c, ExecPolicy policy) : ClosedLoop(policy), cfg_(c) {
        d_ = c.plant.dim;
        mass_ = c.plant.mass;
        spec_ = hurwitz_from_roots(c.refdyn.roots);
        m_hat0_ = (1.0 + c.control.mass_error) * mass_;
        x0_ = initial_rows(c, c.agents.q0, d_, 0.3, false, 31)[0];
        v0_ = initial_rows(c, c.agents.qd0, d_, 0.0, false, 32)[0];
        audit_ = SignalAudit(1, PlantVelocity);
    }

    bool leader_present() const override { return true; }

    Vec initial_state() override {
        Vec x = Vec::Zero(8 * d_ + 2);
        x.segment(0, d_) = x0_;
        x.segment(d_, d_) = v0_;
        x.segment(2 * d_, d_) = v0_;
        x.segment(4 * d_, d_) = x0_;
        x(6 * d_ + 1 + d_) = m_hat0_;
        return x;
    }

    Vec derivative(double t, const Vec& s, double, Frame* capture) override {
        const int d = d_;
        const double a = cfg_.reference.amplitude, w = cfg_.reference.frequency;
        const Vec xd = Vec::Constant(d, a * std::sin(w * t));
        const Vec xd1 = Vec::Constant(d, a * w * std::cos(w * t));
        const Vec xd2 = Vec::Constant(d, -a * w * w * std::sin(w * t));
        const Vec xd3 = Vec::Constant(d, -a * w * w * w * std::cos(w * t));
        const Vec x = s.segment(0, d), v = s.segment(d, d);
        const Vec z = s.segment(2 * d, d), zd = s.segment(3 * d, d);
        PointMassFilter f{s.segment(4 * d, d), s.segment(5 * d, d)};
        const double acc = s(6 * d);
        const Vec y_dual = s.segment(6 * d + 1, d);
        const double m_dual = s(7 * d + 1);

        const Vec zdd = pointmass_ref_deriv(z, zd, x, xd, xd1, xd2, xd3, spec_.alpha(0), spec_.alpha(1),
                                            spec_.alpha(2));
        const Vec z0 = v0_, zd0 = Vec::Zero(d);
        const double m_hat = pointmass_mhat(m_hat0_, cfg_.control.gamma_star, x, z, zd, x0_, z0, zd0, acc);
        const auto cmd = pointmass_control(x, z, zd, f, m_hat, cfg_.control.gain, cfg_.control.filter);

        Vec dx(s.size());
        dx.segment(0, d) = v;
        dx.segment(d, d) = cmd.u / mass_;
        dx.segment(2 * d, d) = zd;
        dx.segment(3 * d, d) = zdd;
        dx.segment(4 * d, d) = cmd.zeta_dot;
        dx.segment(5 * d, d) = cmd.eta_dot;
        dx(6 * d) = pointmass_mhat_integrand(x, zdd);
        // Duals read plant velocity on the monitor path.
        const double lf = cfg_.control.filter, gs = cfg_.control.gamma_star;
        dx.segment(6 * d + 1, d) = -lf * y_dual + lf * (v - z);
        dx(7 * d + 1) = -gs * zd.dot(v - z);

        if (capture) {
            const Vec sv = v - z;
            const double dm = m_hat - mass_;
            filter_gap_ = std::max(filter_gap_, (cmd.y - y_dual).lpNorm<Eigen::Infinity>());
            mhat_gap_ = std::max(mhat_gap_, std::abs(m_hat - m_dual));
            mhat_max_ = std::max(mhat_max_, std::abs(m_hat));
            AgentFrame fr;
            fr.y = x;
            fr.ydot = v;
            fr.tau = cmd.u;
            fr.lyapunov = 0.5 * mass_ * sv.squaredNorm() + cfg_.control.gain / (2.0 * lf) * cmd.y.squaredNorm() +
                          dm * dm / (2.0 * gs);
            fr.extra = {m_hat, m_dual};
            capture->agents = {fr};
            capture->y0 = xd;
            capture->y0dot = xd1;
        }
        return dx;
    }

    std::vector<std::string> agent_extra_names() const override { return {"m_hat", "m_hat_direct"}; }

    void finish(std::vector<std::pair<std::string, double>>& metrics) const override {
        metrics.emplace_back("filter_dual_max", filter_gap_);
        metrics.emplace_back("mhat_dual_max", mhat_gap_);
        metrics.emplace_back("mhat_abs_max", mhat_max_);
    }

private:
    ScenarioConfig cfg_;
    int d_ = 1;
    double mass_ = 1.0, m_hat0_ = 1.0;
    HurwitzSpec spec_;
    Vec x0_, v0_;
    double filter_gap_ = 0.0, mhat_gap_ = 0.0, mhat_max_ = 0.0;
};

// Two-link arm tracking a task-space circle with uncertain kinematics and dynamics.
// Block: q, q', z, link-length estimate, dynamic estimate.
class TaskspaceTracking : public ClosedLoop {
public:
    TaskspaceTracking(const ScenarioConfig& c, ExecPolicy policy) : ClosedLoop(policy), cfg_(c) {
        k_ = as_matrix(c.control.k);
        gamma_ = as_matrix(c.control.gamma);
        k_star_ = as_matrix(c.control.k_star);
        lambda_ = as_matrix(c.control.lambda);
        adapt_ = !gamma_.isZero(0.0);
        if (adapt_) gamma_inv_ = gamma_.inverse();
        lambda_inv_ = lambda_.inverse();
        if (!c.agents.q0.empty()) {
            q0_ = as_vector(c.agents.q0[0]);
        } else {
            q0_ = Eigen::Vector2d(-0.3, 1.4);   // near the start of the default circle
        }
        qd0_ = c.agents.qd0.empty() ? Vec(Vec::Zero(2)) : as_vector(c.agents.qd0[0]);
        audit_ = SignalAudit(1, TaskVelocity);
    }

    bool leader_present() const override { return true; }

    Vec initial_state() override {
        Vec x(13);
        x << q0_, qd0_, qd0_, (1.0 - cfg_.control.kin_error) * arm_.kinematic_params(),
            (1.0 - cfg_.control.param_error) * arm_.true_params();
        return x;
    }

    Vec derivative(double t, const Vec& s, double, Frame* capture) override {
        const Vec q = s.segment(0, 2), qd = s.segment(2, 2), z = s.segment(4, 2);
        const Vec l_hat = s.segment(6, 2), th_hat = s.segment(8, 5);
        const auto& r = cfg_.reference;
        const double w = 2.0 * std::numbers::pi / r.period;
        const Eigen::Vector2d c(r.center[0], r.center[1]);
        const Vec xd = c + r.radius * Eigen::Vector2d(std::cos(w * t), std::sin(w * t));
        const Vec xd1 = r.radius * w * Eigen::Vector2d(-std::sin(w * t), std::cos(w * t));
        const Vec xd2 = -w * w * (xd - c);

        const Vec x = arm_.forward_kinematics(q);
        const Vec dx = x - xd;
        const Mat j_hat = TwoLinkArm::jacobian(q, l_hat);
        const Vec l_hat_dot = taskspace_kinematic_update(q, qd, dx, lambda_, k_star_);
        TaskspaceRefInput in;
        in.z = z;
        in.j_hat = j_hat;
        in.j_hat_dot = TwoLinkArm::jacobian_rate(q, qd, l_hat, l_hat_dot);
        in.dx = dx;
        in.xd_dot = xd1;
        in.xd_ddot = xd2;
        in.alpha = cfg_.refdyn.alpha;
        in.k_star = k_star_;
        in.condition_cap = cfg_.control.condition_cap;
        const auto ref = taskspace_ref_deriv(in);
        const auto cmd = taskspace_control(arm_, q, qd, z, ref.z_dot, j_hat, dx, th_hat, gamma_, k_,
                                           k_star_, cfg_.control.kappa);

        Vec out(13);
        out << qd, lagrangian_accel(arm_, q, qd, cmd.tau), ref.z_dot, l_hat_dot,
            adapt_ ? cmd.theta_hat_dot : Vec(Vec::Zero(5));

        if (capture) {
            // Monitor path: true task velocity and plant-truth Lyapunov function.
            const Vec xdot = arm_.jacobian(q) * qd;
            const double kappa = cfg_.control.kappa;
            const Vec dl = l_hat - arm_.kinematic_params();
            const Vec ez = z - ref.z_r;
            double v = 0.5 * kappa * (ez.squaredNorm() + dx.dot(k_star_ * dx) + dl.dot(lambda_inv_ * dl)) +
                       0.5 * cmd.s.dot(arm_.inertia(q) * cmd.s);
            if (adapt_) {
                const Vec dth = th_hat - arm_.true_params();
                v += 0.5 * dth.dot(gamma_inv_ * dth);
            }
            AgentFrame f;
            f.y = x;
            f.ydot = xdot;
            f.tau = cmd.tau;
            f.lyapunov = v;
            f.extra = {ref.condition, dl.norm()};
            capture->agents = {f};
            capture->y0 = xd;
            capture->y0dot = xd1;
        }
        return out;
    }

    std::vector<std::string> agent_extra_names() const override { return {"condition", "length_error"}; }

private:
    ScenarioConfig cfg_;
    TwoLinkArm arm_;
    Mat k_, gamma_, gamma_inv_, k_star_, lambda_, lambda_inv_;
    bool adapt_ = false;
    Vec q0_, qd0_;
};

}  // namespace

std::unique_ptr<ClosedLoop> make_pointmass(const ScenarioConfig& c, ExecPolicy p) {
    return std::make_unique<PointmassTracking>(c, p);
}
std::unique_ptr<ClosedLoop> make_taskspace(const ScenarioConfig& c, ExecPolicy p) {
    return std::make_unique<TaskspaceTracking>(c, p);
}

}  // namespace fstep::detail
