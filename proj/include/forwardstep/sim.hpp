#pragma once

#include "forwardstep/config.hpp"
#include "forwardstep/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fstep {

/// Per-agent observation at one grid instant. `y` is the agreed-upon or tracked output
/// (joint positions, TPV position, task position, attitude error vector part) and `ydot`
/// its rate (for the spacecraft, omega - omega_d).
struct AgentFrame {
    Vec y;
    Vec ydot;
    Vec tau;
    double lyapunov = 0.0;
    std::vector<double> extra;
};

struct Frame {
    double t = 0.0;
    std::vector<AgentFrame> agents;
    Vec y0;      // leader / desired output; empty for leaderless consensus
    Vec y0dot;
};

struct Event {
    double t = 0.0;
    std::string kind;     // switch | delay-jump | clamp | abort | whitelist
    int agent = -1;
    double value = 0.0;
    std::string detail;
};

struct TorqueJump {
    double t = 0.0;
    double jump = 0.0;
};

struct RunRecord {
    std::string scenario;
    std::string name;
    std::vector<std::string> agent_extra_names;
    std::vector<Frame> samples;
    std::vector<Event> events;
    std::vector<TorqueJump> torque_jumps;
    /// Final metrics and run-long monitors, in emission order.
    std::vector<std::pair<std::string, double>> metrics;
    std::string status = "completed";   // or "aborted:<kind>"
    long steps = 0;
    double runtime_s = 0.0;

    bool completed() const { return status == "completed"; }
    /// NaN when absent.
    double metric(const std::string& key) const;
};

/// Integrates the closed loop of `c` with fixed-step RK4. The policy defaults to the
/// config's `integrator.parallel`; both policies give bitwise-identical records.
RunRecord run(const ScenarioConfig& c, std::optional<ExecPolicy> policy = std::nullopt);

/// max_{i<j} |y_i - y_j|.
double consensus_error(const Frame& f);
/// max_i |ydot_i|.
double consensus_velocity(const Frame& f);
/// max_i |y_i - y0| (y0 = 0 when absent).
double tracking_error(const Frame& f);
/// max_i |ydot_i - y0dot|.
double tracking_rate_error(const Frame& f);

/// Sample nearest to t.
const Frame& frame_at(const RunRecord& r, double t);

struct LyapunovReport {
    std::vector<std::vector<double>> series;   // [agent][sample]
    double max_increment = 0.0;                // max_k V(t_{k+1}) - V(t_k), over agents
    double max_ratio = 0.0;                    // same, divided by 1 + |V(t_k)|
};

LyapunovReport lyapunov_monitor(const RunRecord& r);

struct TorqueJumpReport {
    std::vector<TorqueJump> jumps;
    double max_jump = 0.0;
};

TorqueJumpReport torque_jump_stats(const RunRecord& r);

/// Least-squares slope of log(value) against log(h).
double scaling_exponent(const std::vector<double>& h, const std::vector<double>& values);

}  // namespace fstep
