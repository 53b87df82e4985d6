#include "forwardstep/graph.hpp"

#include <algorithm>
#include <string>

namespace fstep {

DirectedGraph::DirectedGraph(Mat weights) : w_(std::move(weights)) {
    if (w_.rows() != w_.cols()) {
        throw ConfigError("graph weight matrix must be square");
    }
    for (int i = 0; i < w_.rows(); ++i) {
        if (w_(i, i) != 0.0) {
            throw ConfigError("graph weight w_ii must be zero (i = " + std::to_string(i) + ")");
        }
        for (int j = 0; j < w_.cols(); ++j) {
            if (!(w_(i, j) >= 0.0)) {
                throw ConfigError("graph weights must be nonnegative");
            }
        }
    }
}

Mat laplacian(const DirectedGraph& g) {
    const int n = g.size();
    Mat l = -g.weights();
    for (int i = 0; i < n; ++i) {
        l(i, i) = g.in_degree(i);
    }
    return l;
}

Mat degree_matrix(const DirectedGraph& g) {
    const int n = g.size();
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = g.in_degree(i);
    }
    return d;
}

bool has_rooted_spanning_tree(const DirectedGraph& g, int root) {
    const int n = g.size();
    if (root < 0 || root >= n) {
        throw UsageError("root vertex out of range");
    }
    // Reverse search: u reaches v whenever w_uv > 0.
    std::vector<char> seen(n, 0);
    std::vector<int> stack{root};
    seen[root] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int u = 0; u < n; ++u) {
            if (!seen[u] && g.weight(u, v) > 0.0) {
                seen[u] = 1;
                ++count;
                stack.push_back(u);
            }
        }
    }
    return count == n;
}

bool has_spanning_tree(const DirectedGraph& g) {
    for (int root = 0; root < g.size(); ++root) {
        if (has_rooted_spanning_tree(g, root)) {
            return true;
        }
    }
    return false;
}

SwitchingSchedule::SwitchingSchedule(std::vector<DirectedGraph> graphs,
                                     std::vector<double> switch_times,
                                     std::vector<std::size_t> active, double dwell)
    : graphs_(std::move(graphs)), times_(std::move(switch_times)),
      active_(std::move(active)), dwell_(dwell) {
    if (graphs_.empty()) {
        throw ConfigError("schedule needs at least one graph");
    }
    if (times_.empty() || times_.front() != 0.0) {
        throw ConfigError("schedule switch times must start at t = 0");
    }
    if (active_.size() != times_.size()) {
        throw ConfigError("schedule needs one active graph per interval");
    }
    if (!(dwell_ > 0.0)) {
        throw ConfigError("dwell time must be positive");
    }
    const int n = graphs_.front().size();
    for (const auto& g : graphs_) {
        if (g.size() != n) {
            throw ConfigError("all scheduled graphs must share the same vertex count");
        }
    }
    for (std::size_t k = 0; k < active_.size(); ++k) {
        if (active_[k] >= graphs_.size()) {
            throw ConfigError("schedule references graph index " + std::to_string(active_[k]) +
                              " but only " + std::to_string(graphs_.size()) + " graphs exist");
        }
    }
    for (std::size_t k = 1; k < times_.size(); ++k) {
        // Small slack absorbs rounding of grid-aligned switch times.
        if (times_[k] - times_[k - 1] < dwell_ * (1.0 - 1e-9)) {
            throw ConfigError("switch interval " + std::to_string(k - 1) +
                              " is shorter than the dwell time");
        }
    }
}

SwitchingSchedule SwitchingSchedule::fixed(DirectedGraph g) {
    return SwitchingSchedule({std::move(g)}, {0.0}, {0}, 1.0);
}

std::size_t SwitchingSchedule::interval_at(double t) const {
    // First switch time strictly greater than t, minus one.
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) {
        return 0;
    }
    return static_cast<std::size_t>(std::distance(times_.begin(), it) - 1);
}

const DirectedGraph& SwitchingSchedule::graph_at(double t) const {
    return graphs_[active_[interval_at(t)]];
}

DirectedGraph SwitchingSchedule::union_over_window(double t_a, double t_b) const {
    if (!(t_a < t_b)) {
        throw UsageError("union window needs t_a < t_b");
    }
    if (t_a < 0.0) {
        throw UsageError("union window starts before the schedule domain");
    }
    Mat w = Mat::Zero(agent_count(), agent_count());
    for (std::size_t k = 0; k < times_.size(); ++k) {
        const double start = times_[k];
        const bool last = k + 1 == times_.size();
        const double end = last ? t_b + 1.0 : times_[k + 1];
        if (start < t_b && end > t_a) {
            w = w.cwiseMax(graphs_[active_[k]].weights());
        }
    }
    return DirectedGraph(std::move(w));
}

}  // namespace fstep
