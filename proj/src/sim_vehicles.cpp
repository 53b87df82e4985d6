#include "forwardstep/control.hpp"
#include "forwardstep/refdyn.hpp"
#include "forwardstep/so3.hpp"
#include "forwardstep/vehicles.hpp"
#include "sim_internal.hpp"

#include <cmath>
#include <limits>

namespace fstep::detail {

namespace {

// Thrust-propelled vehicles under dynamic feedback linearization. Agent block: x, v, R
// (column-major), sigma, then for the exact/adaptive laws the stack (z, z', z'') and for
// the adaptive law the directly integrated mass estimate and the accumulator integral.
class TpvConsensus : public ClosedLoop {
public:
    TpvConsensus(const ScenarioConfig& c, ExecPolicy policy) : ClosedLoop(policy), cfg_(c) {
        n_ = c.agents.count;
        par_ = {c.plant.mass, c.plant.gravity};
        law_ = c.control.law;
        stacked_ = law_ != "continuous";
        adaptive_ = law_ == "adaptive";
        block_ = 16 + (stacked_ ? 9 : 0) + (adaptive_ ? 2 : 0);
        sigma_min_ = c.control.sigma_min_ratio * par_.mass * par_.gravity;
        m_hat0_ = (1.0 + c.control.mass_error) * par_.mass;
        x0_ = initial_rows(c, c.agents.q0, 3, 0.0, true, 21);
        v0_ = initial_rows(c, c.agents.qd0, 3, 0.0, false, 22);
        std::vector<Vec> sig;
        for (int i = 0; i < n_; ++i) {
            Vec s(6);
            s << x0_[i], v0_[i];
            sig.push_back(s);
        }
        net_ = DelayNetwork(build_schedule(c), build_delays(c), sig, c.integrator.step);
        audit_ = SignalAudit(n_, 0u);
        sigma_low_.assign(n_, std::numeric_limits<double>::infinity());
        fbl_err_.assign(n_, 0.0);
        mhat_gap_.assign(n_, 0.0);
        mhat_max_.assign(n_, 0.0);
    }

    Vec initial_state() override {
        Vec x = Vec::Zero(n_ * block_);
        const Mat3 eye = Mat3::Identity();
        for (int i = 0; i < n_; ++i) {
            auto b = x.segment(i * block_, block_);
            b.segment(0, 3) = x0_[i];
            b.segment(3, 3) = v0_[i];
            b.segment(6, 9) = Eigen::Map<const Vec>(eye.data(), 9);
            b(15) = par_.mass * par_.gravity;
            if (stacked_) b.segment(16, 3) = v0_[i];
            if (adaptive_) b(25) = m_hat0_;
        }
        return x;
    }

    void begin_step(double t0, const Vec&, double h, std::vector<Event>& events) override {
        net_.grid_events(t0, h, events);
    }

    Vec derivative(double t, const Vec& x, double t0, Frame* capture) override {
        const auto& g = net_.graph(t0);
        const auto& roots = cfg_.refdyn.roots;
        const double as = cfg_.control.alpha_star, gs = cfg_.control.gamma_star;
        const double m = par_.mass, grav = par_.gravity;
        Vec dx(x.size());
        if (capture) capture->agents.assign(n_, AgentFrame{});
        for_agents(n_, policy_, [&](int i) {
            const Vec b = x.segment(i * block_, block_);
            const Vec3 p = b.segment(0, 3);
            const Vec3 v = audit_.read(i, PlantVelocity, Vec3(b.segment(3, 3)));
            const Mat3 r = Eigen::Map<const Mat3>(b.data() + 6);
            const double sigma = b(15);
            std::vector<DelayedNeighbor> nb;
            for (int j = 0; j < n_; ++j) {
                const double w = g.weight(i, j);
                if (w <= 0.0) continue;
                const double d = net_.delay(i, j, t, t0);
                const Vec sj = net_.lookup(j, t - d, t, x.segment(j * block_, 6));
                nb.push_back({w, sj.head(3), Vec()});
            }
            auto d = dx.segment(i * block_, block_);
            Vec3 u;
            double c = 0.0;
            double lyap = 0.0, m_hat = m, m_direct = m;
            if (!stacked_) {
                std::vector<TpvNeighbor> tn;
                for (const auto& e : nb) tn.push_back({e.w, e.q});
                const auto cmd = tpv_continuous_command(p, v, tn, m, grav, roots[0], roots[1]);
                u = cmd.u;
                c = cmd.c;
            } else {
                const std::vector<Vec> stack{b.segment(16, 3), b.segment(19, 3), b.segment(22, 3)};
                const Vec3 zd = stack[1], zdd = stack[2];
                const Vec3 zddd = tpv_ref_deriv(stack, p, v, nb, roots[0], roots[1], roots[2]);
                d.segment(16, 3) = zd;
                d.segment(19, 3) = zdd;
                d.segment(22, 3) = zddd;
                const Vec3 s = v - Vec3(stack[0]);
                // Plant-truth acceleration: monitor and direct-estimate check only.
                const Vec3 acc = -sigma * r * e3() / m + grav * e3();
                const Vec3 sdot = acc - zd;
                c = as;
                if (!adaptive_) {
                    u = tpv_differentiable_command(zdd, zd, s, m, grav, cfg_.control.gain, as);
                    lyap = 0.5 * m * sdot.squaredNorm() + 0.5 * cfg_.control.gain * s.squaredNorm();
                } else {
                    const Vec3 a = tpv_adaptation_signal(zdd, zd, grav, as);
                    const Vec3 a0 = tpv_adaptation_signal(Vec3::Zero(), Vec3::Zero(), grav, as);
                    m_hat = tpv_mhat(m_hat0_, gs, a, v, a0, v0_[i], b(26));
                    m_direct = b(25);
                    const auto ad = tpv_adaptive_command(zdd, zd, sdot, m_hat, gs, grav, as);
                    u = ad.u;
                    d(25) = ad.m_hat_dot;
                    d(26) = tpv_mhat_integrand(a, zd, zddd, zdd, v, as);
                    lyap = 0.5 * m * sdot.squaredNorm() + (m_hat - m) * (m_hat - m) / (2.0 * gs);
                }
            }
            const auto fbl = tpv_fbl_extract(u, r, sigma, c, sigma_min_);
            TpvState st;
            st.x = p;
            st.v = v;
            st.r = r;
            st.sigma = sigma;
            const auto pd = tpv_derivative(par_, st, sigma, fbl.omega);
            d.segment(0, 3) = pd.x_dot;
            d.segment(3, 3) = pd.v_dot;
            d.segment(6, 9) = Eigen::Map<const Vec>(pd.r_dot.data(), 9);
            d(15) = fbl.sigma_dot;
            if (capture) {
                const Vec3 back = tpv_fbl_assemble(fbl, r, sigma, c);
                fbl_err_[i] = std::max(fbl_err_[i], (back - u).norm() / std::max(1.0, u.norm()));
                sigma_low_[i] = std::min(sigma_low_[i], sigma);
                mhat_gap_[i] = std::max(mhat_gap_[i], std::abs(m_hat - m_direct));
                mhat_max_[i] = std::max(mhat_max_[i], std::abs(m_hat));
                auto& f = capture->agents[i];
                f.y = p;
                f.ydot = v;
                f.tau = u;
                f.lyapunov = lyap;
                f.extra = {sigma, m_hat};
            }
        });
        return dx;
    }

    void post_step(Vec& x) override {
        for (int i = 0; i < n_; ++i) {
            Eigen::Map<Mat3> r(x.data() + i * block_ + 6);
            r = orthonormalize(r);
        }
    }

    void record_history(double t, const Vec& x) override {
        std::vector<Vec> sig;
        for (int j = 0; j < n_; ++j) sig.push_back(x.segment(j * block_, 6));
        net_.record(t, sig);
    }

    std::vector<std::string> agent_extra_names() const override { return {"sigma", "m_hat"}; }

    void finish(std::vector<std::pair<std::string, double>>& metrics) const override {
        double low = std::numeric_limits<double>::infinity(), fbl = 0.0, gap = 0.0, mx = 0.0;
        for (int i = 0; i < n_; ++i) {
            low = std::min(low, sigma_low_[i]);
            fbl = std::max(fbl, fbl_err_[i]);
            gap = std::max(gap, mhat_gap_[i]);
            mx = std::max(mx, mhat_max_[i]);
        }
        metrics.emplace_back("sigma_min_ratio", low / sigma_min_);
        metrics.emplace_back("fbl_roundtrip_max", fbl);
        if (adaptive_) {
            metrics.emplace_back("mhat_dual_max", gap);
            metrics.emplace_back("mhat_abs_max", mx);
        }
    }

private:
    ScenarioConfig cfg_;
    TpvParams par_;
    std::string law_;
    bool stacked_ = false, adaptive_ = false;
    int n_ = 0, block_ = 0;
    double sigma_min_ = 0.0, m_hat0_ = 0.0;
    std::vector<Vec> x0_, v0_;
    DelayNetwork net_;
    std::vector<double> sigma_low_, fbl_err_, mhat_gap_, mhat_max_;
};

AttitudeProfile attitude_profile(const ReferenceConfig& r) {
    AttitudeProfile p;
    p.kind = r.profile == "constant"     ? AttitudeProfile::Kind::Constant
             : r.profile == "two_axis"   ? AttitudeProfile::Kind::TwoAxis
                                         : AttitudeProfile::Kind::SingleAxis;
    p.axis = Vec3(r.axis[0], r.axis[1], r.axis[2]).normalized();
    p.amplitude = r.amplitude;
    p.period = r.period;
    p.amplitude2 = r.amplitude2;
    p.period2 = r.period2;
    return p;
}

EulerParam positive(EulerParam q) {
    if (q.qo < 0.0) {
        q.qv = -q.qv;
        q.qo = -q.qo;
    }
    return q;
}

// Spacecraft attitude tracking without angular velocity. Block: q (qv, qo), w, z, y,
// shadow quaternion.
class SpacecraftTracking : public ClosedLoop {
public:
    SpacecraftTracking(const ScenarioConfig& c, ExecPolicy policy) : ClosedLoop(policy), cfg_(c) {
        par_.inertia = as_matrix(c.plant.inertia);
        par_.h_inertial = as_vector(c.plant.momentum);
        profile_ = attitude_profile(c.reference);
        k_ = as_matrix(c.control.k);
        lf_ = as_matrix(c.control.lambda_f);
        audit_ = SignalAudit(1, AngularVelocity);
        if (!c.agents.q0.empty()) {
            q0_ = EulerParam::from_vec4(Vec4(as_vector(c.agents.q0[0]))).normalized();
        } else {
            q0_ = EulerParam::from_axis_angle(Vec3(1.0, -1.0, 0.5).normalized(), c.agents.spread);
        }
        w0_ = c.agents.qd0.empty() ? Vec3(0.1, -0.1, 0.05) : Vec3(as_vector(c.agents.qd0[0]));
    }

    bool leader_present() const override { return true; }

    Vec initial_state() override {
        Vec x = Vec::Zero(18);
        x.segment(0, 4) = q0_.as_vec4();
        x.segment(4, 3) = w0_;
        x.segment(10, 4) = lf_.inverse() * k_ * EulerParam::identity().as_vec4();
        x.segment(14, 4) = q0_.as_vec4();
        return x;
    }

    Vec derivative(double t, const Vec& x, double, Frame* capture) override {
        const EulerParam q = EulerParam::from_vec4(x.segment(0, 4));
        const Vec3 w = x.segment(4, 3);
        const Vec3 z = x.segment(7, 3);
        const Vec4 y = x.segment(10, 4);
        const EulerParam qz = EulerParam::from_vec4(x.segment(14, 4));
        const Mat3 r = q.rotation();
        const auto des = desired_attitude(profile_, t);
        const EulerParam qd = positive(EulerParam::from_rotation(des.r));
        const EulerParam dq = euler_error(q, qd);
        const Vec3 h = body_momentum(par_, r);
        const Vec3 zd = spacecraft_ref_deriv(z, r, des.omega_inertial, des.omega_dot_inertial, dq.qv,
                                             cfg_.refdyn.alpha1, cfg_.refdyn.alpha2);
        const EulerParam dq_star = euler_error(q, qz);
        const auto cmd = spacecraft_control(par_.inertia, h, z, zd, dq_star, y, k_, lf_, qz, r);
        SpacecraftState st;
        st.attitude = q;
        st.omega = w;
        const auto pd = spacecraft_derivative(par_, st, cmd.tau);
        Vec dx(18);
        dx.segment(0, 4) = pd.attitude_dot;
        dx.segment(4, 3) = pd.omega_dot;
        dx.segment(7, 3) = zd;
        dx.segment(10, 4) = cmd.y_rate;
        dx.segment(14, 4) = cmd.shadow_dot;
        if (capture) {
            const Vec3 wd = r.transpose() * des.omega_inertial;
            AgentFrame f;
            f.y = dq.qv;
            f.ydot = w - wd;
            f.tau = cmd.tau;
            f.lyapunov = 0.5 * (w - z).dot(par_.inertia * (w - z)) + 0.5 * cmd.y_rate.squaredNorm();
            f.extra = {(w - z).norm()};
            capture->agents = {f};
            capture->y0 = Vec::Zero(3);
            capture->y0dot = Vec::Zero(3);
        }
        return dx;
    }

    void post_step(Vec& x) override {
        for (int off : {0, 14}) {
            const double n = x.segment(off, 4).norm();
            drift_ = std::max(drift_, std::abs(n - 1.0));
            x.segment(off, 4) /= n;
        }
        const Mat3 r = EulerParam::from_vec4(x.segment(0, 4)).rotation();
        ortho_ = std::max(ortho_, (r.transpose() * r - Mat3::Identity()).norm());
    }

    std::vector<std::string> agent_extra_names() const override { return {"w_minus_z"}; }

    void finish(std::vector<std::pair<std::string, double>>& metrics) const override {
        metrics.emplace_back("quaternion_norm_drift", drift_);
        metrics.emplace_back("rotation_orthonormality", ortho_);
    }

private:
    ScenarioConfig cfg_;
    SpacecraftParams par_;
    AttitudeProfile profile_;
    Mat k_, lf_;
    EulerParam q0_;
    Vec3 w0_;
    double drift_ = 0.0, ortho_ = 0.0;
};

}  // namespace

std::unique_ptr<ClosedLoop> make_tpv_consensus(const ScenarioConfig& c, ExecPolicy p) {
    return std::make_unique<TpvConsensus>(c, p);
}
std::unique_ptr<ClosedLoop> make_spacecraft(const ScenarioConfig& c, ExecPolicy p) {
    return std::make_unique<SpacecraftTracking>(c, p);
}

}  // namespace fstep::detail
