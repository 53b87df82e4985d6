#pragma once

#include "forwardstep/config.hpp"
#include "forwardstep/delay.hpp"
#include "forwardstep/graph.hpp"
#include "forwardstep/sim.hpp"

#include <exception>
#include <memory>
#include <string>
#include <vector>

namespace fstep::detail {

/// Runs fn(i) for every agent. Exceptions are captured per agent and the one from the
/// lowest index is rethrown after the loop, so both policies fail identically.
template <class F>
void for_agents(int n, ExecPolicy policy, F&& fn) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::Parallel)
    for (int i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Plant signals a controller may be forbidden to read.
enum Signal : unsigned { PlantVelocity = 1u, TaskVelocity = 2u, AngularVelocity = 4u };

std::string signal_name(Signal s);

/// Records which plant signals the control path touched, per agent. The monitor path reads
/// plant truth directly and never goes through here.
class SignalAudit {
public:
    SignalAudit(int agents, unsigned forbidden) : reads_(static_cast<std::size_t>(agents), 0u), forbidden_(forbidden) {}

    template <class T>
    const T& read(int agent, Signal s, const T& value) {
        reads_[static_cast<std::size_t>(agent)] |= s;
        return value;
    }

    unsigned forbidden() const { return forbidden_; }
    /// Forbidden reads since the last call, per agent; clears the marks.
    std::vector<unsigned> take_violations();

private:
    std::vector<unsigned> reads_;
    unsigned forbidden_;
};

/// Delayed exchange between agents: switching graph, per-edge delay profiles and per-agent
/// histories of the exchanged signal.
class DelayNetwork {
public:
    DelayNetwork() = default;
    DelayNetwork(SwitchingSchedule schedule, std::vector<std::vector<DelayProfile>> delays,
                 const std::vector<Vec>& initial, double step);

    const SwitchingSchedule& schedule() const { return schedule_; }
    /// Graph frozen over the step that starts at t0.
    const DirectedGraph& graph(double t0) const { return schedule_.graph_at(t0); }
    double delay(int i, int j, double t, double t0) const { return delays_[i][j].at_in_step(t, t0); }
    double delay_rate(int i, int j, double t) const { return delays_[i][j].rate_at(t); }
    const DelayProfile& profile(int i, int j) const { return delays_[i][j]; }

    /// Signal of agent j at time `query` seen from stage time t. Queries past the last
    /// recorded sample interpolate towards the current stage value; a zero delay returns it.
    Vec lookup(int j, double query, double t, const Vec& stage_value) const;
    void record(double t, const std::vector<Vec>& signals);

    /// Switch and delay-jump events at grid time t0 (t0 > 0).
    void grid_events(double t0, double h, std::vector<Event>& out) const;
    bool is_jump_instant(int i, int j, double t0, double h) const;

private:
    SwitchingSchedule schedule_;
    std::vector<std::vector<DelayProfile>> delays_;
    std::vector<HistoryBuffer> hist_;
};

/// One closed loop over a stacked state.
class ClosedLoop {
public:
    explicit ClosedLoop(ExecPolicy policy) : policy_(policy) {}
    virtual ~ClosedLoop() = default;

    virtual Vec initial_state() = 0;
    /// Called once per grid instant before the step from t0 starts.
    virtual void begin_step(double t0, const Vec& x, double h, std::vector<Event>& events);
    /// Stacked derivative at stage time t of the step starting at t0. With `capture`, the
    /// instant t == t0 is also recorded as an observation.
    virtual Vec derivative(double t, const Vec& x, double t0, Frame* capture) = 0;
    virtual void post_step(Vec& x);
    virtual void record_history(double t, const Vec& x);
    virtual std::vector<std::string> agent_extra_names() const { return {}; }
    /// Run-long monitor values appended to the record metrics.
    virtual void finish(std::vector<std::pair<std::string, double>>& metrics) const;
    /// Forbidden signal reads since the last call (agent, signal mask).
    std::vector<unsigned> take_violations() { return audit_.take_violations(); }
    virtual bool leader_present() const { return false; }

protected:
    ExecPolicy policy_;
    SignalAudit audit_{0, 0u};
};

std::unique_ptr<ClosedLoop> make_closed_loop(const ScenarioConfig& c, ExecPolicy policy);
std::unique_ptr<ClosedLoop> make_lagrangian_consensus(const ScenarioConfig& c, ExecPolicy policy);
std::unique_ptr<ClosedLoop> make_baseline(const ScenarioConfig& c, ExecPolicy policy);
std::unique_ptr<ClosedLoop> make_distributed_tracking(const ScenarioConfig& c, ExecPolicy policy);
std::unique_ptr<ClosedLoop> make_tpv_consensus(const ScenarioConfig& c, ExecPolicy policy);
std::unique_ptr<ClosedLoop> make_spacecraft(const ScenarioConfig& c, ExecPolicy policy);
std::unique_ptr<ClosedLoop> make_pointmass(const ScenarioConfig& c, ExecPolicy policy);
std::unique_ptr<ClosedLoop> make_taskspace(const ScenarioConfig& c, ExecPolicy policy);

/// Deterministic lattice (optionally perturbed from the seed) or the configured rows.
std::vector<Vec> initial_rows(const ScenarioConfig& c, const Matrix& given, int dim, double offset,
                              bool lattice, std::uint64_t salt);

}  // namespace fstep::detail
