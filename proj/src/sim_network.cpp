#include "sim_internal.hpp"

#include <cmath>
#include <random>

namespace fstep::detail {

std::string signal_name(Signal s) {
    switch (s) {
        case PlantVelocity: return "plant-velocity";
        case TaskVelocity: return "task-velocity";
        case AngularVelocity: return "angular-velocity";
    }
    return "unknown";
}

std::vector<unsigned> SignalAudit::take_violations() {
    std::vector<unsigned> out(reads_.size());
    for (std::size_t i = 0; i < reads_.size(); ++i) {
        out[i] = reads_[i] & forbidden_;
        reads_[i] = 0u;
    }
    return out;
}

DelayNetwork::DelayNetwork(SwitchingSchedule schedule, std::vector<std::vector<DelayProfile>> delays,
                           const std::vector<Vec>& initial, double step)
    : schedule_(std::move(schedule)), delays_(std::move(delays)) {
    double bound = 0.0;
    for (const auto& row : delays_)
        for (const auto& d : row) bound = std::max(bound, d.bound());
    // Two extra steps keep the bracketing sample of the oldest query.
    const double horizon = bound + 2.0 * step;
    for (const auto& x0 : initial) {
        hist_.emplace_back(horizon, x0);
        hist_.back().record(0.0, x0);
    }
}

Vec DelayNetwork::lookup(int j, double query, double t, const Vec& stage_value) const {
    if (query >= t) return stage_value;
    const auto& h = hist_[static_cast<std::size_t>(j)];
    const double tl = h.last_time();
    if (query <= tl) return h.sample_at(query);
    const double w = (query - tl) / (t - tl);
    return (1.0 - w) * h.last_value() + w * stage_value;
}

void DelayNetwork::record(double t, const std::vector<Vec>& signals) {
    if (t == 0.0) return;   // the initial sample is recorded at construction
    for (std::size_t j = 0; j < hist_.size(); ++j) hist_[j].record(t, signals[j]);
}

bool DelayNetwork::is_jump_instant(int i, int j, double t0, double h) const {
    for (const auto& jump : delays_[i][j].jumps())
        if (std::abs(jump.first - t0) < 0.5 * h) return true;
    return false;
}

void DelayNetwork::grid_events(double t0, double h, std::vector<Event>& out) const {
    if (t0 <= 0.0) return;
    const auto& times = schedule_.switch_times();
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - t0) < 0.5 * h) {
            out.push_back({t0, "switch", -1, static_cast<double>(schedule_.active()[k]),
                           "graph " + std::to_string(schedule_.active()[k])});
        }
    }
    int edges = 0;
    const int n = static_cast<int>(delays_.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && is_jump_instant(i, j, t0, h)) ++edges;
    if (edges > 0) out.push_back({t0, "delay-jump", -1, static_cast<double>(edges), "edges"});
}

void ClosedLoop::begin_step(double, const Vec&, double, std::vector<Event>&) {}
void ClosedLoop::post_step(Vec&) {}
void ClosedLoop::record_history(double, const Vec&) {}
void ClosedLoop::finish(std::vector<std::pair<std::string, double>>&) const {}

std::vector<Vec> initial_rows(const ScenarioConfig& c, const Matrix& given, int dim, double offset,
                              bool lattice, std::uint64_t salt) {
    const int n = c.agents.count;
    std::vector<Vec> rows;
    if (!given.empty()) {
        for (const auto& r : given) rows.push_back(as_vector(r));
        return rows;
    }
    std::mt19937_64 rng(c.seed ^ salt);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
        Vec r = Vec::Constant(dim, offset);
        if (lattice) {
            const double centered = static_cast<double>(i) - 0.5 * static_cast<double>(n - 1);
            for (int k = 0; k < dim; ++k)
                r(k) += c.agents.spread * centered * (1.0 - 0.4 * static_cast<double>(k % 3));
        }
        if (c.agents.randomize)
            for (int k = 0; k < dim; ++k) r(k) += c.agents.spread * u(rng);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace fstep::detail
