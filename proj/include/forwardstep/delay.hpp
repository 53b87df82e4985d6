#pragma once

#include "forwardstep/types.hpp"

#include <deque>
#include <utility>
#include <vector>

namespace fstep {

/// Time-varying communication delay
///   T(t) = base + amplitude * sin(rate * t) + step(t)
/// where step(t) is piecewise constant: the value of the last (time, value) jump with
/// time <= t, or zero before the first jump. Constant, sinusoidal and jump profiles are
/// the special cases; they may be combined.
class DelayProfile {
public:
    DelayProfile() = default;
    DelayProfile(double base, double amplitude, double rate,
                 std::vector<std::pair<double, double>> jumps, double bound);

    static DelayProfile constant(double value, double bound);
    static DelayProfile sinusoidal(double base, double amplitude, double rate, double bound);
    static DelayProfile piecewise(std::vector<std::pair<double, double>> jumps, double bound);

    double at(double t) const;
    /// Continuous part evaluated at t, jump part frozen at `step_start`. Used inside an
    /// integration step so that a jump on the grid never takes effect mid-step.
    double at_in_step(double t, double step_start) const;
    /// Analytic derivative of the continuous part (jumps excluded).
    double rate_at(double t) const;

    double bound() const { return bound_; }
    double base() const { return base_; }
    double amplitude() const { return amplitude_; }
    double rate() const { return rate_; }
    const std::vector<std::pair<double, double>>& jumps() const { return jumps_; }

    /// Throws ConfigError if T(t) leaves [0, bound] on the grid {0, h, 2h, ..., horizon}.
    void validate(double horizon, double h) const;

private:
    double jump_part(double t) const;

    double base_ = 0.0;
    double amplitude_ = 0.0;
    double rate_ = 0.0;
    std::vector<std::pair<double, double>> jumps_;
    double bound_ = 0.0;
};

/// Time-ordered samples of an agent signal for delayed lookups, with constant-hold
/// pre-history (t < 0 returns the initial value) and linear interpolation.
class HistoryBuffer {
public:
    HistoryBuffer() = default;
    HistoryBuffer(double horizon, Vec initial_value);

    void record(double t, const Vec& x);

    /// Value at time t - delay.
    Vec sample_delayed(double t, double delay) const;
    /// Value at an absolute query time.
    Vec sample_at(double query) const;

    bool empty() const { return samples_.empty(); }
    std::size_t size() const { return samples_.size(); }
    double last_time() const { return samples_.back().first; }
    const Vec& last_value() const { return samples_.back().second; }
    double first_time() const { return samples_.front().first; }
    double horizon() const { return horizon_; }
    const Vec& initial_value() const { return initial_; }

private:
    std::deque<std::pair<double, Vec>> samples_;
    double horizon_ = 0.0;
    Vec initial_;
    bool evicted_ = false;
};

}  // namespace fstep
