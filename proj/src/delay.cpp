#include "forwardstep/delay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fstep {

DelayProfile::DelayProfile(double base, double amplitude, double rate,
                           std::vector<std::pair<double, double>> jumps, double bound)
    : base_(base), amplitude_(amplitude), rate_(rate), jumps_(std::move(jumps)), bound_(bound) {
    if (!(bound_ > 0.0)) {
        throw ConfigError("delay bound must be positive");
    }
    for (std::size_t k = 1; k < jumps_.size(); ++k) {
        if (!(jumps_[k].first > jumps_[k - 1].first)) {
            throw ConfigError("delay jump times must be strictly increasing");
        }
    }
}

DelayProfile DelayProfile::constant(double value, double bound) {
    return DelayProfile(value, 0.0, 0.0, {}, bound);
}

DelayProfile DelayProfile::sinusoidal(double base, double amplitude, double rate, double bound) {
    return DelayProfile(base, amplitude, rate, {}, bound);
}

DelayProfile DelayProfile::piecewise(std::vector<std::pair<double, double>> jumps, double bound) {
    return DelayProfile(0.0, 0.0, 0.0, std::move(jumps), bound);
}

double DelayProfile::jump_part(double t) const {
    double v = 0.0;
    for (const auto& [time, value] : jumps_) {
        if (time <= t) {
            v = value;
        } else {
            break;
        }
    }
    return v;
}

double DelayProfile::at(double t) const {
    return base_ + amplitude_ * std::sin(rate_ * t) + jump_part(t);
}

double DelayProfile::at_in_step(double t, double step_start) const {
    return base_ + amplitude_ * std::sin(rate_ * t) + jump_part(step_start);
}

double DelayProfile::rate_at(double t) const {
    return amplitude_ * rate_ * std::cos(rate_ * t);
}

void DelayProfile::validate(double horizon, double h) const {
    const auto steps = static_cast<long>(std::floor(horizon / h + 0.5));
    auto check = [&](double t) {
        const double v = at(t);
        if (v < 0.0 || v > bound_) {
            std::ostringstream os;
            os << "delay profile evaluates to " << v << " at t = " << t
               << ", outside [0, " << bound_ << "]";
            throw ConfigError(os.str());
        }
    };
    for (long k = 0; k <= steps; ++k) {
        check(static_cast<double>(k) * h);
    }
    for (const auto& jump : jumps_) {
        if (jump.first >= 0.0 && jump.first <= horizon) {
            check(jump.first);
        }
    }
}

HistoryBuffer::HistoryBuffer(double horizon, Vec initial_value)
    : horizon_(horizon), initial_(std::move(initial_value)) {
    if (!(horizon_ >= 0.0)) {
        throw UsageError("history horizon must be nonnegative");
    }
}

void HistoryBuffer::record(double t, const Vec& x) {
    if (!samples_.empty() && !(t > samples_.back().first)) {
        std::ostringstream os;
        os << "history record at t = " << t << " is not after the last sample t = "
           << samples_.back().first;
        throw UsageError(os.str());
    }
    samples_.emplace_back(t, x);
    // Keep exactly one sample at or before t - horizon as the lower interpolation bracket.
    const double oldest_needed = t - horizon_;
    while (samples_.size() > 2 && samples_[1].first <= oldest_needed) {
        samples_.pop_front();
        evicted_ = true;
    }
}

Vec HistoryBuffer::sample_delayed(double t, double delay) const {
    if (delay < 0.0) {
        throw UsageError("negative delay");
    }
    return sample_at(t - delay);
}

Vec HistoryBuffer::sample_at(double query) const {
    if (query < 0.0 && !evicted_) {
        return initial_;
    }
    if (samples_.empty()) {
        throw UsageError("history lookup on an empty buffer");
    }
    const double first = samples_.front().first;
    if (query < first) {
        if (!evicted_) {
            return initial_;
        }
        std::ostringstream os;
        os << "history lookup at t = " << query << " is older than the retained horizon (oldest "
           << first << ")";
        throw UsageError(os.str());
    }
    const double last = samples_.back().first;
    if (query > last) {
        std::ostringstream os;
        os << "history lookup at t = " << query << " is beyond the last sample t = " << last;
        throw UsageError(os.str());
    }
    if (query == last) {
        return samples_.back().second;
    }
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), query,
                                     [](double q, const auto& s) { return q < s.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double span = hi.first - lo.first;
    const double a = (query - lo.first) / span;
    return (1.0 - a) * lo.second + a * hi.second;
}

}  // namespace fstep
