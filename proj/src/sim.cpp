#include "forwardstep/sim.hpp"

#include "forwardstep/integrator.hpp"
#include "sim_internal.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace fstep {

namespace detail {

std::unique_ptr<ClosedLoop> make_closed_loop(const ScenarioConfig& c, ExecPolicy policy) {
    switch (c.kind) {
        case ScenarioKind::ConsensusLagrangian: return make_lagrangian_consensus(c, policy);
        case ScenarioKind::ConsensusTpv: return make_tpv_consensus(c, policy);
        case ScenarioKind::PointmassTracking: return make_pointmass(c, policy);
        case ScenarioKind::TaskspaceTracking: return make_taskspace(c, policy);
        case ScenarioKind::SpacecraftTracking: return make_spacecraft(c, policy);
        case ScenarioKind::DistributedTracking: return make_distributed_tracking(c, policy);
        case ScenarioKind::BaselineComparison: return make_baseline(c, policy);
    }
    throw std::logic_error("unknown scenario kind");
}

}  // namespace detail

namespace {

double tau_gap(const Frame& a, const Frame& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.agents.size() && i < b.agents.size(); ++i)
        m = std::max(m, (a.agents[i].tau - b.agents[i].tau).norm());
    return m;
}

bool finite(const Vec& x) { return x.allFinite(); }

}  // namespace

double RunRecord::metric(const std::string& key) const {
    for (const auto& [k, v] : metrics)
        if (k == key) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

RunRecord run(const ScenarioConfig& c, std::optional<ExecPolicy> policy) {
    const auto start = std::chrono::steady_clock::now();
    const ExecPolicy pol = policy.value_or(c.integrator.parallel ? ExecPolicy::Parallel : ExecPolicy::Serial);
    auto sys = detail::make_closed_loop(c, pol);

    RunRecord rec;
    rec.scenario = to_string(c.kind);
    rec.name = c.name;
    rec.agent_extra_names = sys->agent_extra_names();

    const double h = c.integrator.step;
    const long n_steps = std::llround(c.integrator.horizon / h);
    const long stride = std::max(1, c.integrator.stride);

    Vec x = sys->initial_state();
    auto f = [&](double t, const Vec& xs, double t0) { return sys->derivative(t, xs, t0, nullptr); };

    Frame prev, prev2, last;
    bool have_prev = false, have_prev2 = false;
    long prev_switch = -10;
    double lyap_ratio = 0.0, tau_rate = 0.0;
    long violations = 0;
    std::set<std::pair<int, unsigned>> reported;

    auto abort = [&](double t, const AbortError& e) {
        rec.events.push_back({t, "abort", -1, 0.0, e.kind() + ": " + e.what()});
        rec.status = "aborted:" + e.kind();
    };

    for (long k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * h;
        std::vector<Event> events;
        Frame fr;
        fr.t = t;
        Vec k1;
        try {
            sys->begin_step(t, x, h, events);
            k1 = sys->derivative(t, x, t, &fr);
        } catch (const AbortError& e) {
            rec.events.insert(rec.events.end(), events.begin(), events.end());
            abort(t, e);
            break;
        }
        bool switched = false;
        for (const auto& e : events) switched = switched || e.kind == "switch";
        rec.events.insert(rec.events.end(), events.begin(), events.end());

        const auto viol = sys->take_violations();
        for (std::size_t i = 0; i < viol.size(); ++i) {
            for (unsigned s : {1u, 2u, 4u}) {
                if (!(viol[i] & s)) continue;
                ++violations;
                if (reported.insert({static_cast<int>(i), s}).second)
                    rec.events.push_back({t, "whitelist", static_cast<int>(i), 1.0,
                                          detail::signal_name(static_cast<detail::Signal>(s))});
            }
        }

        if (have_prev) {
            for (std::size_t i = 0; i < fr.agents.size(); ++i) {
                const double v0 = prev.agents[i].lyapunov;
                lyap_ratio = std::max(lyap_ratio, (fr.agents[i].lyapunov - v0) / (1.0 + std::abs(v0)));
            }
            tau_rate = std::max(tau_rate, tau_gap(fr, prev) / h);
        }
        if (have_prev2 && prev_switch == k - 1) rec.torque_jumps.push_back({prev.t, tau_gap(fr, prev2)});
        if (switched) prev_switch = k;

        if (k % stride == 0) rec.samples.push_back(fr);
        prev2 = std::move(prev);
        have_prev2 = have_prev;
        prev = fr;
        have_prev = true;
        last = std::move(fr);
        rec.steps = k;
        if (k == n_steps) break;

        try {
            x = rk4_step(f, t, x, h, k1);
        } catch (const AbortError& e) {
            abort(t, e);
            break;
        }
        if (!finite(x)) {
            abort(t + h, AbortError("divergence", "non-finite state"));
            break;
        }
        sys->post_step(x);
        sys->record_history(t + h, x);
    }

    if (last.y0.size() > 0 || sys->leader_present()) {
        rec.metrics.emplace_back("tracking_error", tracking_error(last));
        rec.metrics.emplace_back("tracking_rate_error", tracking_rate_error(last));
    } else {
        rec.metrics.emplace_back("consensus_error", consensus_error(last));
        rec.metrics.emplace_back("consensus_velocity", consensus_velocity(last));
    }
    rec.metrics.emplace_back("final_time", last.t);
    rec.metrics.emplace_back("lyapunov_increment_ratio", lyap_ratio);
    rec.metrics.emplace_back("torque_rate_max", tau_rate);
    double jump = 0.0;
    for (const auto& j : rec.torque_jumps) jump = std::max(jump, j.jump);
    if (!rec.torque_jumps.empty()) rec.metrics.emplace_back("torque_jump_max", jump);
    rec.metrics.emplace_back("whitelist_violations", static_cast<double>(violations));
    sys->finish(rec.metrics);

    rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

double consensus_error(const Frame& f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.agents.size(); ++i)
        for (std::size_t j = i + 1; j < f.agents.size(); ++j)
            m = std::max(m, (f.agents[i].y - f.agents[j].y).norm());
    return m;
}

double consensus_velocity(const Frame& f) {
    double m = 0.0;
    for (const auto& a : f.agents) m = std::max(m, a.ydot.norm());
    return m;
}

double tracking_error(const Frame& f) {
    double m = 0.0;
    for (const auto& a : f.agents) m = std::max(m, f.y0.size() ? (a.y - f.y0).norm() : a.y.norm());
    return m;
}

double tracking_rate_error(const Frame& f) {
    double m = 0.0;
    for (const auto& a : f.agents) m = std::max(m, f.y0dot.size() ? (a.ydot - f.y0dot).norm() : a.ydot.norm());
    return m;
}

const Frame& frame_at(const RunRecord& r, double t) {
    if (r.samples.empty()) throw std::out_of_range("run record has no samples");
    std::size_t best = 0;
    for (std::size_t k = 1; k < r.samples.size(); ++k)
        if (std::abs(r.samples[k].t - t) < std::abs(r.samples[best].t - t)) best = k;
    return r.samples[best];
}

LyapunovReport lyapunov_monitor(const RunRecord& r) {
    LyapunovReport out;
    if (r.samples.empty()) return out;
    const std::size_t n = r.samples.front().agents.size();
    out.series.assign(n, {});
    for (const auto& f : r.samples)
        for (std::size_t i = 0; i < n && i < f.agents.size(); ++i) out.series[i].push_back(f.agents[i].lyapunov);
    for (const auto& s : out.series) {
        for (std::size_t k = 1; k < s.size(); ++k) {
            const double d = s[k] - s[k - 1];
            out.max_increment = std::max(out.max_increment, d);
            out.max_ratio = std::max(out.max_ratio, d / (1.0 + std::abs(s[k - 1])));
        }
    }
    return out;
}

TorqueJumpReport torque_jump_stats(const RunRecord& r) {
    TorqueJumpReport out;
    out.jumps = r.torque_jumps;
    for (const auto& j : r.torque_jumps) out.max_jump = std::max(out.max_jump, j.jump);
    return out;
}

double scaling_exponent(const std::vector<double>& h, const std::vector<double>& values) {
    if (h.size() != values.size() || h.size() < 2) throw std::invalid_argument("scaling_exponent needs matching samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double lx = std::log(h[k]), ly = std::log(values[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fstep
