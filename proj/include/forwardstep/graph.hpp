#pragma once

#include "forwardstep/types.hpp"

#include <cstddef>
#include <vector>

namespace fstep {

/// Weighted directed interaction graph. Entry w(i, j) > 0 means agent i
/// receives information from agent j (j is a neighbor of i).
class DirectedGraph {
public:
    DirectedGraph() = default;
    explicit DirectedGraph(Mat weights);

    static DirectedGraph empty(int n) { return DirectedGraph(Mat::Zero(n, n)); }

    int size() const { return static_cast<int>(w_.rows()); }
    double weight(int i, int j) const { return w_(i, j); }
    const Mat& weights() const { return w_; }
    /// Sum of incoming weights of agent i.
    double in_degree(int i) const { return w_.row(i).sum(); }

    bool operator==(const DirectedGraph& other) const {
        return w_.rows() == other.w_.rows() && w_ == other.w_;
    }

private:
    Mat w_;
};

Mat laplacian(const DirectedGraph& g);
Mat degree_matrix(const DirectedGraph& g);

/// True iff some vertex is reachable from every other vertex along i -> j edges (w_ij > 0).
bool has_spanning_tree(const DirectedGraph& g);
/// True iff every vertex reaches `root`.
bool has_rooted_spanning_tree(const DirectedGraph& g, int root);

/// Piecewise-constant topology plan. Interval k is [switch_times[k], switch_times[k+1])
/// and uses graphs[active[k]]; the last interval extends to infinity.
class SwitchingSchedule {
public:
    SwitchingSchedule() = default;
    SwitchingSchedule(std::vector<DirectedGraph> graphs, std::vector<double> switch_times,
                      std::vector<std::size_t> active, double dwell);

    /// A schedule that never switches.
    static SwitchingSchedule fixed(DirectedGraph g);

    int agent_count() const { return graphs_.empty() ? 0 : graphs_.front().size(); }
    double dwell() const { return dwell_; }
    const std::vector<double>& switch_times() const { return times_; }
    const std::vector<DirectedGraph>& graphs() const { return graphs_; }
    const std::vector<std::size_t>& active() const { return active_; }
    bool switches() const { return times_.size() > 1; }

    /// Index of the interval containing t (right-continuous at switch instants).
    std::size_t interval_at(double t) const;
    const DirectedGraph& graph_at(double t) const;

    /// Elementwise max of every graph active somewhere in [t_a, t_b).
    DirectedGraph union_over_window(double t_a, double t_b) const;

private:
    std::vector<DirectedGraph> graphs_;
    std::vector<double> times_;
    std::vector<std::size_t> active_;
    double dwell_ = 1.0;
};

}  // namespace fstep
