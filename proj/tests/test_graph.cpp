#include "forwardstep/graph.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace fstep;

namespace {

Mat weights(int n, std::initializer_list<std::tuple<int, int, double>> edges) {
    Mat w = Mat::Zero(n, n);
    for (auto [i, j, v] : edges) w(i, j) = v;
    return w;
}

// Transitive closure by Floyd-Warshall: reach(i, j) iff i reaches j along w_ij > 0.
bool oracle_spanning_tree(const Mat& w) {
    const int n = static_cast<int>(w.rows());
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) reach[i][j] = (i == j) || w(i, j) > 0.0;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
    for (int root = 0; root < n; ++root) {
        bool all = true;
        for (int i = 0; i < n && all; ++i) all = reach[i][root];
        if (all) return true;
    }
    return false;
}

}  // namespace

TEST(Laplacian, TwoNodeExample) {
    const DirectedGraph g(weights(2, {{0, 1, 1.0}}));
    Mat expected(2, 2);
    expected << 1, -1, 0, 0;
    EXPECT_EQ(laplacian(g), expected);
}

TEST(Laplacian, EmptyGraphIsZero) {
    EXPECT_EQ(laplacian(DirectedGraph::empty(3)), Mat::Zero(3, 3));
    EXPECT_EQ(degree_matrix(DirectedGraph::empty(3)), Mat::Zero(3, 3));
}

TEST(Laplacian, ThreeNodeExpansion) {
    const DirectedGraph g(weights(3, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 0, 1.0}}));
    Mat expected(3, 3);
    expected << 2, -2, 0, 0, 1, -1, -1, 0, 1;
    EXPECT_EQ(laplacian(g), expected);
    EXPECT_EQ(degree_matrix(g), Vec3(2, 1, 1).asDiagonal().toDenseMatrix());
}

TEST(Laplacian, DegreeExample) {
    const DirectedGraph g(weights(2, {{0, 1, 1.0}}));
    EXPECT_EQ(degree_matrix(g), Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix());
}

TEST(Laplacian, RowSumsExactlyZeroAndDegreeIdentity) {
    fstep::testing::Gen gen(11);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = gen.integer(1, 7);
        Mat w = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                // Dyadic weights keep every row sum exact in floating point.
                if (i != j && gen.integer(0, 2) == 0) w(i, j) = gen.integer(1, 64) / 8.0;
        const DirectedGraph g(w);
        const Mat l = laplacian(g);
        EXPECT_EQ(l * Vec::Ones(n), Vec::Zero(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) EXPECT_LE(l(i, j), 0.0);
        EXPECT_EQ(degree_matrix(g) - l, w);
    }
}

TEST(DirectedGraph, RejectsInvalidWeights) {
    EXPECT_THROW(DirectedGraph(Mat::Ones(2, 2)), ConfigError);
    EXPECT_THROW(DirectedGraph(weights(2, {{0, 1, -1.0}})), ConfigError);
    EXPECT_THROW(DirectedGraph(Mat::Zero(2, 3)), ConfigError);
}

TEST(SpanningTree, Examples) {
    EXPECT_TRUE(has_spanning_tree(DirectedGraph(weights(3, {{0, 1, 1.0}, {1, 2, 1.0}}))));
    EXPECT_TRUE(has_rooted_spanning_tree(DirectedGraph(weights(3, {{0, 1, 1.0}, {1, 2, 1.0}})), 2));
    EXPECT_FALSE(has_spanning_tree(DirectedGraph::empty(2)));
    const DirectedGraph cycles(weights(4, {{0, 1, 1.0}, {1, 0, 1.0}, {2, 3, 1.0}, {3, 2, 1.0}}));
    EXPECT_FALSE(has_spanning_tree(cycles));
    EXPECT_EQ(has_spanning_tree(cycles), oracle_spanning_tree(cycles.weights()));
}

TEST(SpanningTree, LeaderRooted) {
    // Vertex 0 is the leader; followers 1..3.
    const DirectedGraph star(weights(4, {{1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}}));
    EXPECT_TRUE(has_rooted_spanning_tree(star, 0));
    const DirectedGraph isolated(weights(4, {{1, 0, 1.0}, {2, 0, 1.0}}));
    EXPECT_FALSE(has_rooted_spanning_tree(isolated, 0));
    const DirectedGraph chain(weights(4, {{1, 0, 1.0}, {2, 1, 1.0}, {3, 2, 1.0}}));
    EXPECT_TRUE(has_rooted_spanning_tree(chain, 0));
    EXPECT_FALSE(has_rooted_spanning_tree(chain, 3));
}

TEST(SpanningTree, ExhaustiveAgainstReachabilityOracle) {
    for (int n = 1; n <= 5; ++n) {
        const int edges = n * (n - 1);
        for (long mask = 0; mask < (1L << edges); ++mask) {
            Mat w = Mat::Zero(n, n);
            int bit = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) w(i, j) = (mask >> bit++) & 1L ? 1.0 : 0.0;
            ASSERT_EQ(has_spanning_tree(DirectedGraph(w)), oracle_spanning_tree(w))
                << "n = " << n << " mask = " << mask;
        }
    }
}

namespace {

SwitchingSchedule rotation() {
    std::vector<DirectedGraph> graphs{DirectedGraph(weights(3, {{1, 0, 1.0}})),
                                      DirectedGraph(weights(3, {{2, 1, 2.0}})),
                                      DirectedGraph(weights(3, {{0, 2, 0.5}, {1, 0, 3.0}}))};
    std::vector<double> times;
    std::vector<std::size_t> active;
    for (int k = 0; k < 9; ++k) {
        times.push_back(k * 1.0);
        active.push_back(static_cast<std::size_t>(k % 3));
    }
    return SwitchingSchedule(graphs, times, active, 1.0);
}

}  // namespace

TEST(Schedule, GraphAtIsRightContinuous) {
    const auto s = rotation();
    EXPECT_EQ(s.graph_at(0.5), s.graphs()[0]);
    EXPECT_EQ(s.graph_at(1.0), s.graphs()[1]);
    EXPECT_EQ(s.graph_at(0.999999), s.graphs()[0]);
    EXPECT_EQ(s.graph_at(100.0), s.graphs()[2]);   // 8 % 3 persists past the last switch
}

TEST(Schedule, UnionSingleGraphAndPair) {
    const auto s = rotation();
    EXPECT_EQ(s.union_over_window(0.1, 0.9), s.graphs()[0]);
    const DirectedGraph pair = s.union_over_window(0.0, 2.0);
    EXPECT_EQ(pair.weights(), s.graphs()[0].weights().cwiseMax(s.graphs()[1].weights()));
    EXPECT_TRUE(has_spanning_tree(pair));   // 2 -> 1 -> 0 chain
}

TEST(Schedule, UnionOverPeriodIsElementwiseMax) {
    const auto s = rotation();
    Mat expected = Mat::Zero(3, 3);
    for (const auto& g : s.graphs()) expected = expected.cwiseMax(g.weights());
    EXPECT_EQ(s.union_over_window(0.0, 3.0).weights(), expected);
}

TEST(Schedule, UnionAgreesWithSampledGraphs) {
    const auto s = rotation();
    fstep::testing::Gen gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = gen.integer(0, 8) * 0.5;
        const double b = a + gen.integer(1, 6) * 0.5;
        const Mat u = s.union_over_window(a, b).weights();
        Mat sampled = Mat::Zero(3, 3);
        for (double t = a; t < b; t += 0.5) sampled = sampled.cwiseMax(s.graph_at(t).weights());
        EXPECT_EQ((u.array() > 0).matrix(), (sampled.array() > 0).matrix());
    }
}

TEST(Schedule, ValidatesInvariants) {
    const DirectedGraph g = DirectedGraph::empty(2);
    EXPECT_THROW(SwitchingSchedule({g}, {0.0, 0.5}, {0, 0}, 1.0), ConfigError);   // dwell
    EXPECT_THROW(SwitchingSchedule({g}, {0.0}, {1}, 1.0), ConfigError);           // index
    EXPECT_THROW(SwitchingSchedule({g, DirectedGraph::empty(3)}, {0.0, 1.0}, {0, 1}, 1.0),
                 ConfigError);                                                    // size
    EXPECT_THROW(SwitchingSchedule({g}, {0.5}, {0}, 1.0), ConfigError);           // t0
    EXPECT_THROW(rotation().union_over_window(2.0, 1.0), UsageError);
    EXPECT_THROW(rotation().union_over_window(-1.0, 1.0), UsageError);
}
