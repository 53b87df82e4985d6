#include "forwardstep/control.hpp"
#include "forwardstep/lagrangian.hpp"
#include "forwardstep/refdyn.hpp"
#include "sim_internal.hpp"

#include <cmath>
#include <map>

namespace fstep::detail {

namespace {

std::unique_ptr<LagrangianModel> make_model(const ScenarioConfig& c) {
    if (c.plant.model == "point_mass") return std::make_unique<PointMass>(c.plant.mass, c.plant.dim);
    return std::make_unique<TwoLinkArm>();
}

ConsensusVariant consensus_variant(const std::string& s) {
    static const std::map<std::string, ConsensusVariant> v{
        {"first_order", ConsensusVariant::FirstOrder},
        {"second_order_fixed", ConsensusVariant::SecondOrderFixed},
        {"second_order_switching", ConsensusVariant::SecondOrderSwitching},
        {"general_velocity", ConsensusVariant::GeneralVelocity},
        {"general_position", ConsensusVariant::GeneralPosition},
    };
    return v.at(s);
}

/// Shared pieces of the adaptive Lagrangian agents: plant, gains and the Lyapunov function
/// V = s^T M s / 2 + dth^T Gamma^-1 dth / 2 evaluated with plant truth.
struct AdaptiveArm {
    std::unique_ptr<LagrangianModel> model;
    Mat k;
    Mat gamma;
    Mat gamma_inv;
    bool adapt = false;
    Vec theta0;

    explicit AdaptiveArm(const ScenarioConfig& c) : model(make_model(c)) {
        k = as_matrix(c.control.k);
        gamma = as_matrix(c.control.gamma);
        adapt = !gamma.isZero(0.0);
        if (adapt) gamma_inv = gamma.inverse();
        theta0 = (1.0 - c.control.param_error) * model->true_params();
    }

    double lyapunov(const Vec& q, const Vec& s, const Vec& theta_hat) const {
        double v = 0.5 * s.dot(model->inertia(q) * s);
        if (adapt) {
            const Vec d = theta_hat - model->true_params();
            v += 0.5 * d.dot(gamma_inv * d);
        }
        return v;
    }
};

std::vector<Vec> signals_of(const Vec& x, int n, int block, int len) {
    std::vector<Vec> out;
    for (int j = 0; j < n; ++j) out.push_back(x.segment(j * block, len));
    return out;
}

// Leaderless consensus of adaptive Lagrangian agents driven by the selected generator.
// Agent block: q, q', z-stack (l entries), theta_hat.
class LagrangianConsensus : public ClosedLoop {
public:
    LagrangianConsensus(const ScenarioConfig& c, ExecPolicy policy)
        : ClosedLoop(policy), cfg_(c), arm_(c) {
        n_ = c.agents.count;
        m_ = arm_.model->dof();
        p_ = arm_.model->param_count();
        variant_ = consensus_variant(c.refdyn.variant);
        spec_ = hurwitz_from_roots(c.refdyn.roots);
        l_ = stack_order(variant_, spec_);
        block_ = 2 * m_ + l_ * m_ + p_;
        q0_ = initial_rows(c, c.agents.q0, m_, 0.0, true, 11);
        qd0_ = initial_rows(c, c.agents.qd0, m_, 0.0, false, 12);
        std::vector<Vec> sig;
        for (int i = 0; i < n_; ++i) {
            Vec s(2 * m_);
            s << q0_[i], qd0_[i];
            sig.push_back(s);
        }
        net_ = DelayNetwork(build_schedule(c), build_delays(c), sig, c.integrator.step);
        audit_ = SignalAudit(n_, 0u);
        nb_.resize(n_);
        qdd_.resize(n_);
    }

    Vec initial_state() override {
        Vec x = Vec::Zero(n_ * block_);
        for (int i = 0; i < n_; ++i) {
            auto b = x.segment(i * block_, block_);
            b.segment(0, m_) = q0_[i];
            b.segment(m_, m_) = qd0_[i];
            b.segment(2 * m_, m_) = qd0_[i];   // z(0) = q'(0), higher derivatives zero
            b.tail(p_) = arm_.theta0;
        }
        return x;
    }

    void begin_step(double t0, const Vec&, double h, std::vector<Event>& events) override {
        net_.grid_events(t0, h, events);
    }

    Vec derivative(double t, const Vec& x, double t0, Frame* capture) override {
        const auto& g = net_.graph(t0);
        Vec dx(x.size());
        if (capture) capture->agents.assign(n_, AgentFrame{});
        for_agents(n_, policy_, [&](int i) {
            const Vec b = x.segment(i * block_, block_);
            const Vec q = b.segment(0, m_);
            const Vec qd = audit_.read(i, PlantVelocity, Vec(b.segment(m_, m_)));
            const Vec th = b.tail(p_);
            auto& nb = nb_[i];
            nb.clear();
            for (int j = 0; j < n_; ++j) {
                const double w = g.weight(i, j);
                if (w <= 0.0) continue;
                const double d = net_.delay(i, j, t, t0);
                const Vec sj = net_.lookup(j, t - d, t, x.segment(j * block_, 2 * m_));
                nb.push_back({w, sj.head(m_), sj.tail(m_)});
            }
            const Vec z = b.segment(2 * m_, m_);
            Vec zd = l_ >= 2 ? Vec(b.segment(3 * m_, m_))
                             : consensus_ref_deriv(variant_, spec_, {z}, q, qd, nullptr, nb);
            const auto at = slotine_li_torque(*arm_.model, q, qd, z, zd, th, arm_.gamma, arm_.k);
            qdd_[i] = lagrangian_accel(*arm_.model, q, qd, at.tau);
            auto d = dx.segment(i * block_, block_);
            d.segment(0, m_) = qd;
            d.segment(m_, m_) = qdd_[i];
            if (l_ == 1) d.segment(2 * m_, m_) = zd;
            d.tail(p_) = arm_.adapt ? at.theta_hat_dot : Vec::Zero(p_);
            if (capture) {
                auto& f = capture->agents[i];
                f.y = q;
                f.ydot = qd;
                f.tau = at.tau;
                f.lyapunov = arm_.lyapunov(q, at.s, th);
                f.extra = {at.s.norm()};
            }
        });
        if (l_ >= 2) {
            for_agents(n_, policy_, [&](int i) {
                const Vec b = x.segment(i * block_, block_);
                std::vector<Vec> stack;
                for (int r = 0; r < l_; ++r) stack.push_back(b.segment((2 + r) * m_, m_));
                const Vec q = b.segment(0, m_);
                const Vec qd = b.segment(m_, m_);
                const Vec top = cfg_.refdyn.lambda_m > 0.0
                                    ? consensus_ref_deriv_manip(spec_, stack, q, qd, qdd_[i], nb_[i],
                                                                cfg_.refdyn.lambda_m)
                                    : consensus_ref_deriv(variant_, spec_, stack, q, qd, &qdd_[i], nb_[i]);
                auto d = dx.segment(i * block_, block_);
                for (int r = 0; r + 1 < l_; ++r) d.segment((2 + r) * m_, m_) = stack[r + 1];
                d.segment((1 + l_) * m_, m_) = top;
            });
        }
        return dx;
    }

    void record_history(double t, const Vec& x) override { net_.record(t, signals_of(x, n_, block_, 2 * m_)); }

    std::vector<std::string> agent_extra_names() const override { return {"s_norm"}; }

private:
    ScenarioConfig cfg_;
    AdaptiveArm arm_;
    int n_ = 0, m_ = 0, p_ = 0, l_ = 0, block_ = 0;
    ConsensusVariant variant_{};
    HurwitzSpec spec_;
    std::vector<Vec> q0_, qd0_;
    DelayNetwork net_;
    std::vector<std::vector<DelayedNeighbor>> nb_;
    std::vector<Vec> qdd_;
};

// Backstepping baseline: virtual velocity q_r' from delayed relative positions, its
// derivative differenced across switches and delay jumps. Agent block: q, q', theta_hat.
class BaselineConsensus : public ClosedLoop {
public:
    BaselineConsensus(const ScenarioConfig& c, ExecPolicy policy) : ClosedLoop(policy), cfg_(c), arm_(c) {
        n_ = c.agents.count;
        m_ = arm_.model->dof();
        p_ = arm_.model->param_count();
        block_ = 2 * m_ + p_;
        q0_ = initial_rows(c, c.agents.q0, m_, 0.0, true, 11);
        qd0_ = initial_rows(c, c.agents.qd0, m_, 0.0, false, 12);
        std::vector<Vec> sig;
        for (int i = 0; i < n_; ++i) {
            Vec s(2 * m_);
            s << q0_[i], qd0_[i];
            sig.push_back(s);
        }
        net_ = DelayNetwork(build_schedule(c), build_delays(c), sig, c.integrator.step);
        audit_ = SignalAudit(n_, 0u);
        impulse_.assign(n_, Vec::Zero(m_));
        raw_max_.assign(n_, 0.0);
    }

    Vec initial_state() override {
        Vec x = Vec::Zero(n_ * block_);
        for (int i = 0; i < n_; ++i) {
            x.segment(i * block_, m_) = q0_[i];
            x.segment(i * block_ + m_, m_) = qd0_[i];
            x.segment(i * block_ + 2 * m_, p_) = arm_.theta0;
        }
        return x;
    }

    void begin_step(double t0, const Vec& x, double h, std::vector<Event>& events) override {
        net_.grid_events(t0, h, events);
        for (auto& v : impulse_) v.setZero();
        if (t0 <= 0.0) return;
        const auto& g_new = net_.graph(t0);
        const auto& g_old = net_.graph(t0 - h);
        for (int i = 0; i < n_; ++i) {
            bool jump = !(g_new == g_old);
            for (int j = 0; j < n_ && !jump; ++j) jump = net_.is_jump_instant(i, j, t0, h);
            if (!jump) continue;
            const Vec q = x.segment(i * block_, m_);
            auto qr = [&](const DirectedGraph& g, bool before) {
                std::vector<BaselineNeighbor> nb;
                for (int j = 0; j < n_; ++j) {
                    const double w = g.weight(i, j);
                    if (w <= 0.0) continue;
                    const double d = before ? net_.profile(i, j).at_in_step(t0, t0 - h) : net_.profile(i, j).at(t0);
                    const Vec sj = net_.lookup(j, t0 - d, t0, x.segment(j * block_, 2 * m_));
                    nb.push_back({w, sj.head(m_), sj.tail(m_), 0.0});
                }
                return baseline_qr_dot(q, nb);
            };
            impulse_[i] = (qr(g_new, false) - qr(g_old, true)) / h;
            const double raw = impulse_[i].cwiseAbs().maxCoeff();
            if (raw > cfg_.control.clamp) events.push_back({t0, "clamp", i, raw, "qr_ddot"});
        }
    }

    Vec derivative(double t, const Vec& x, double t0, Frame* capture) override {
        const auto& g = net_.graph(t0);
        Vec dx(x.size());
        if (capture) capture->agents.assign(n_, AgentFrame{});
        for_agents(n_, policy_, [&](int i) {
            const Vec b = x.segment(i * block_, block_);
            const Vec q = b.segment(0, m_);
            const Vec qd = audit_.read(i, PlantVelocity, Vec(b.segment(m_, m_)));
            const Vec th = b.tail(p_);
            std::vector<BaselineNeighbor> nb;
            for (int j = 0; j < n_; ++j) {
                const double w = g.weight(i, j);
                if (w <= 0.0) continue;
                const double d = net_.delay(i, j, t, t0);
                const Vec sj = net_.lookup(j, t - d, t, x.segment(j * block_, 2 * m_));
                nb.push_back({w, sj.head(m_), sj.tail(m_), net_.delay_rate(i, j, t)});
            }
            const auto ref = baseline_reference(q, qd, nb, impulse_[i], cfg_.control.clamp);
            const auto at = backstepping_baseline_torque(*arm_.model, q, qd, ref, th, arm_.gamma, arm_.k);
            auto d = dx.segment(i * block_, block_);
            d.segment(0, m_) = qd;
            d.segment(m_, m_) = lagrangian_accel(*arm_.model, q, qd, at.tau);
            d.tail(p_) = arm_.adapt ? at.theta_hat_dot : Vec::Zero(p_);
            if (capture) {
                auto& f = capture->agents[i];
                const double raw = ref.qr_ddot_raw.cwiseAbs().maxCoeff();
                raw_max_[i] = std::max(raw_max_[i], raw);
                f.y = q;
                f.ydot = qd;
                f.tau = at.tau;
                f.lyapunov = arm_.lyapunov(q, at.s, th);
                f.extra = {raw};
            }
        });
        return dx;
    }

    void record_history(double t, const Vec& x) override { net_.record(t, signals_of(x, n_, block_, 2 * m_)); }

    std::vector<std::string> agent_extra_names() const override { return {"qr_ddot_raw"}; }

    void finish(std::vector<std::pair<std::string, double>>& metrics) const override {
        double m = 0.0;
        for (double v : raw_max_) m = std::max(m, v);
        metrics.emplace_back("baseline_qr_ddot_max", m);
    }

private:
    ScenarioConfig cfg_;
    AdaptiveArm arm_;
    int n_ = 0, m_ = 0, p_ = 0, block_ = 0;
    std::vector<Vec> q0_, qd0_;
    DelayNetwork net_;
    std::vector<Vec> impulse_;
    std::vector<double> raw_max_;
};

// Leader-follower tracking with the discontinuous generators. Graph vertex 0 is the
// leader; follower i is vertex i + 1. Agent block: q, q', theta_hat, z, then z' (second)
// or the two integrals (noaccel).
class DistributedTracking : public ClosedLoop {
public:
    DistributedTracking(const ScenarioConfig& c, ExecPolicy policy) : ClosedLoop(policy), cfg_(c), arm_(c) {
        n_ = c.agents.count;
        m_ = arm_.model->dof();
        p_ = arm_.model->param_count();
        variant_ = c.refdyn.variant;
        extra_ = variant_ == "first" ? 0 : (variant_ == "second" ? 1 : 2);
        block_ = 2 * m_ + p_ + m_ + extra_ * m_;
        q0_ = initial_rows(c, c.agents.q0, m_, 0.0, true, 11);
        qd0_ = initial_rows(c, c.agents.qd0, m_, 0.0, false, 12);
        schedule_ = build_schedule(c);
        audit_ = SignalAudit(n_, 0u);
        zd_.resize(n_);
        qdd_.resize(n_);
    }

    bool leader_present() const override { return true; }

    Vec initial_state() override {
        Vec x = Vec::Zero(n_ * block_);
        for (int i = 0; i < n_; ++i) {
            auto b = x.segment(i * block_, block_);
            b.segment(0, m_) = q0_[i];
            b.segment(m_, m_) = qd0_[i];
            b.segment(2 * m_, p_) = arm_.theta0;
            b.segment(2 * m_ + p_, m_) = qd0_[i];
        }
        return x;
    }

    void begin_step(double t0, const Vec&, double h, std::vector<Event>& events) override {
        if (t0 <= 0.0) return;
        const auto& times = schedule_.switch_times();
        for (std::size_t k = 1; k < times.size(); ++k)
            if (std::abs(times[k] - t0) < 0.5 * h)
                events.push_back({t0, "switch", -1, static_cast<double>(schedule_.active()[k]), "graph"});
    }

    Vec derivative(double t, const Vec& x, double t0, Frame* capture) override {
        const auto& g = schedule_.graph_at(t0);
        const double a = cfg_.refdyn.alpha, be = cfg_.refdyn.beta, ga = cfg_.refdyn.gamma;
        const double amp = cfg_.reference.amplitude, w0 = cfg_.reference.frequency;
        const Vec q0 = Vec::Constant(m_, amp * std::sin(w0 * t));
        const Vec qd0 = Vec::Constant(m_, amp * w0 * std::cos(w0 * t));
        const Vec qdd0 = Vec::Constant(m_, -amp * w0 * w0 * std::sin(w0 * t));
        const int zoff = 2 * m_ + p_;
        auto neighbors = [&](int i, bool with_second) {
            std::vector<TrackingNeighbor> nb;
            for (int j = 0; j <= n_; ++j) {
                const double w = g.weight(i + 1, j);
                if (w <= 0.0) continue;
                if (j == 0) {
                    nb.push_back({w, q0, qd0, qdd0, qdd0});
                } else {
                    const Vec b = x.segment((j - 1) * block_, block_);
                    nb.push_back({w, b.segment(0, m_), b.segment(m_, m_),
                                  with_second ? qdd_[j - 1] : Vec(), with_second ? zd_[j - 1] : Vec()});
                }
            }
            return nb;
        };
        Vec dx(x.size());
        if (capture) capture->agents.assign(n_, AgentFrame{});
        for_agents(n_, policy_, [&](int i) {
            const Vec b = x.segment(i * block_, block_);
            const Vec q = b.segment(0, m_);
            const Vec qd = audit_.read(i, PlantVelocity, Vec(b.segment(m_, m_)));
            const Vec th = b.segment(2 * m_, p_);
            const Vec z = b.segment(zoff, m_);
            const auto nb = neighbors(i, false);
            if (variant_ == "first") zd_[i] = tracking_ref_first(q, qd, nb, a, ga);
            else if (variant_ == "second") zd_[i] = b.segment(zoff + m_, m_);
            else zd_[i] = tracking_ref_noaccel_zdot(q, qd, b.segment(zoff + m_, m_), b.segment(zoff + 2 * m_, m_), nb, a, be, ga);
            const auto at = slotine_li_torque(*arm_.model, q, qd, z, zd_[i], th, arm_.gamma, arm_.k);
            qdd_[i] = lagrangian_accel(*arm_.model, q, qd, at.tau);
            auto d = dx.segment(i * block_, block_);
            d.segment(0, m_) = qd;
            d.segment(m_, m_) = qdd_[i];
            d.segment(2 * m_, p_) = arm_.adapt ? at.theta_hat_dot : Vec::Zero(p_);
            d.segment(zoff, m_) = zd_[i];
            if (capture) {
                auto& f = capture->agents[i];
                f.y = q;
                f.ydot = qd;
                f.tau = at.tau;
                f.lyapunov = arm_.lyapunov(q, at.s, th);
                f.extra = {at.s.norm()};
            }
        });
        if (variant_ != "first") {
            for_agents(n_, policy_, [&](int i) {
                const Vec b = x.segment(i * block_, block_);
                const Vec q = b.segment(0, m_);
                const Vec qd = b.segment(m_, m_);
                const auto nb = neighbors(i, true);
                auto d = dx.segment(i * block_, block_);
                if (variant_ == "second") {
                    d.segment(zoff + m_, m_) = tracking_ref_second(q, qd, qdd_[i], nb, a, be, ga);
                } else {
                    const auto in = tracking_ref_noaccel_integrands(q, qd, zd_[i], nb, a, be);
                    d.segment(zoff + m_, m_) = in.i1_dot;
                    d.segment(zoff + 2 * m_, m_) = in.i2_dot;
                }
            });
        }
        if (capture) {
            capture->y0 = q0;
            capture->y0dot = qd0;
        }
        return dx;
    }

    std::vector<std::string> agent_extra_names() const override { return {"s_norm"}; }

private:
    ScenarioConfig cfg_;
    AdaptiveArm arm_;
    int n_ = 0, m_ = 0, p_ = 0, block_ = 0, extra_ = 0;
    std::string variant_;
    std::vector<Vec> q0_, qd0_;
    SwitchingSchedule schedule_;
    std::vector<Vec> zd_, qdd_;
};

}  // namespace

std::unique_ptr<ClosedLoop> make_lagrangian_consensus(const ScenarioConfig& c, ExecPolicy p) {
    return std::make_unique<LagrangianConsensus>(c, p);
}
std::unique_ptr<ClosedLoop> make_baseline(const ScenarioConfig& c, ExecPolicy p) {
    return std::make_unique<BaselineConsensus>(c, p);
}
std::unique_ptr<ClosedLoop> make_distributed_tracking(const ScenarioConfig& c, ExecPolicy p) {
    return std::make_unique<DistributedTracking>(c, p);
}

}  // namespace fstep::detail
