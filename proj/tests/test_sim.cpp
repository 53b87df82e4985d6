#include "forwardstep/sim.hpp"

#include "../src/sim_internal.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>

using namespace fstep;
using fstep::testing::Gen;

namespace {

ScenarioConfig scenario(const std::string& name, const std::vector<std::string>& sets = {}) {
    return load_config_file(std::string(FSTEP_SCENARIO_DIR) + "/" + name + ".yaml", sets).config;
}

bool same_frames(const RunRecord& a, const RunRecord& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        const auto& fa = a.samples[k];
        const auto& fb = b.samples[k];
        if (fa.t != fb.t || fa.agents.size() != fb.agents.size()) return false;
        for (std::size_t i = 0; i < fa.agents.size(); ++i) {
            const auto& x = fa.agents[i];
            const auto& y = fb.agents[i];
            if (x.y != y.y || x.ydot != y.ydot || x.tau != y.tau || x.lyapunov != y.lyapunov || x.extra != y.extra)
                return false;
        }
    }
    return a.metrics == b.metrics && a.status == b.status;
}

Frame frame_of(const std::vector<Vec>& ys) {
    Frame f;
    for (const auto& y : ys) {
        AgentFrame a;
        a.y = y;
        a.ydot = Vec::Zero(y.size());
        f.agents.push_back(a);
    }
    return f;
}

}  // namespace

TEST(Metrics, ConsensusErrorExamples) {
    const Vec a = Vec::Constant(2, 0.3);
    EXPECT_EQ(consensus_error(frame_of({a, a, a})), 0.0);
    EXPECT_EQ(consensus_error(frame_of({Vec::Zero(1), Vec::Ones(1)})), 1.0);
}

TEST(Metrics, ConsensusErrorMatchesGramOracle) {
    Gen gen(71);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Vec> ys;
        Mat p(3, 4);
        for (int i = 0; i < 4; ++i) {
            ys.push_back(gen.vec(3, -2, 2));
            p.col(i) = ys.back();
        }
        // Pairwise squared distances from the Gram matrix.
        const Mat g = p.transpose() * p;
        double best = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) best = std::max(best, g(i, i) + g(j, j) - 2.0 * g(i, j));
        EXPECT_NEAR(consensus_error(frame_of(ys)), std::sqrt(best), 1e-12);
    }
}

TEST(Metrics, TrackingErrorDirectFormula) {
    Gen gen(72);
    Frame f = frame_of({gen.vec(2), gen.vec(2)});
    f.y0 = f.agents[1].y;
    f.y0dot = Vec::Zero(2);
    EXPECT_NEAR(tracking_error(f), (f.agents[0].y - f.y0).norm(), 1e-15);
    f.agents[0].y = f.y0;
    EXPECT_EQ(tracking_error(f), 0.0);
    f.agents[1].ydot = Vec::Constant(2, 1.0);
    EXPECT_NEAR(tracking_rate_error(f), std::sqrt(2.0), 1e-15);
}

TEST(Metrics, ScalingExponentOfPowerLaw) {
    const std::vector<double> h{1e-2, 1e-3, 1e-4};
    EXPECT_NEAR(scaling_exponent(h, {3e-4, 3e-6, 3e-8}), 2.0, 1e-12);
    EXPECT_NEAR(scaling_exponent(h, {0.7, 0.7, 0.7}), 0.0, 1e-12);
}

TEST(Run, ZeroHorizonHasOnlyInitialSample) {
    const auto r = run(scenario("theorem1_consensus", {"integrator.horizon=0"}));
    EXPECT_TRUE(r.completed());
    ASSERT_EQ(r.samples.size(), 1u);
    EXPECT_EQ(r.samples[0].t, 0.0);
}

TEST(Run, SampleCountFollowsStride) {
    const auto r = run(scenario("theorem1_consensus", {"integrator.horizon=1.05", "integrator.stride=100"}));
    EXPECT_EQ(r.steps, 1050);
    EXPECT_EQ(r.samples.size(), 11u);
}

TEST(Run, DeterministicAndPolicyIndependent) {
    for (const char* name : {"theorem2_switching", "theorem4_tpv", "theorem8_tracking"}) {
        const auto c = scenario(name, {"integrator.horizon=3", "integrator.stride=7"});
        const auto a = run(c, ExecPolicy::Serial);
        const auto b = run(c, ExecPolicy::Serial);
        const auto p = run(c, ExecPolicy::Parallel);
        EXPECT_TRUE(same_frames(a, b)) << name;
        EXPECT_TRUE(same_frames(a, p)) << name;
    }
}

TEST(Run, SeededRandomizationIsReproducible) {
    const auto c1 = scenario("theorem1_consensus", {"integrator.horizon=0.5", "agents.randomize=true", "seed=5"});
    const auto c2 = scenario("theorem1_consensus", {"integrator.horizon=0.5", "agents.randomize=true", "seed=6"});
    EXPECT_TRUE(same_frames(run(c1), run(c1)));
    EXPECT_NE(run(c1).samples[0].agents[0].y, run(c2).samples[0].agents[0].y);
}

TEST(Lyapunov, ZeroAtRestWithExactParameters) {
    const auto c = scenario("theorem1_consensus", {"integrator.horizon=2", "integrator.stride=10", "agents.spread=0",
                                                   "control.param_error=0"});
    const auto rep = lyapunov_monitor(run(c));
    for (const auto& series : rep.series)
        for (double v : series) EXPECT_LE(std::abs(v), 1e-20);
}

TEST(Lyapunov, FrozenExactParametersDissipate) {
    const auto c = scenario("baseline_comparison", {"integrator.horizon=0.9", "integrator.stride=1", "control.gamma=0",
                                                    "control.param_error=0", "delays.common.jumps=[]"});
    const auto rep = lyapunov_monitor(run(c));
    EXPECT_LE(rep.max_increment, 1e-12);
    int moving = 0;
    for (const auto& series : rep.series) {
        if (series.front() <= 0.0) continue;
        ++moving;
        EXPECT_LT(series.back(), 1e-3 * series.front());
    }
    EXPECT_GT(moving, 0);
}

TEST(TorqueJumps, NoSwitchesNoJumps) {
    const auto r = run(scenario("theorem1_consensus", {"integrator.horizon=2"}));
    EXPECT_TRUE(torque_jump_stats(r).jumps.empty());
}

TEST(TorqueJumps, RestingAgreementGivesZeroJumps) {
    const auto c = scenario("theorem2_switching", {"integrator.horizon=3", "agents.spread=0", "control.param_error=0"});
    const auto rep = torque_jump_stats(run(c));
    ASSERT_EQ(rep.jumps.size(), 2u);
    EXPECT_LE(rep.max_jump, 1e-12);
}

TEST(TorqueJumps, SecondOrderShrinksWithStepFirstOrderDoesNot) {
    auto jump = [](const char* name, double h) {
        const auto c = scenario(name, {"integrator.horizon=3", "integrator.step=" + std::to_string(h)});
        return torque_jump_stats(run(c)).max_jump;
    };
    const double s1 = jump("theorem2_switching", 2e-3), s2 = jump("theorem2_switching", 2e-4);
    const double f1 = jump("theorem2_first_order", 2e-3), f2 = jump("theorem2_first_order", 2e-4);
    EXPECT_LT(s2, 0.2 * s1);
    EXPECT_GT(f2, 0.5 * f1);
    EXPECT_GT(f2, 0.05);
}

TEST(Aborts, SingularJacobianEstimateAborts) {
    const auto c = scenario("theorem6_taskspace", {"agents.q0=[[0.1, 1.3]]", "control.lambda=1", "control.k_star=20"});
    const auto r = run(c);
    EXPECT_EQ(r.status, "aborted:singularity");
    ASSERT_FALSE(r.events.empty());
    EXPECT_EQ(r.events.back().kind, "abort");
    EXPECT_LT(r.samples.back().t, c.integrator.horizon);
}

TEST(Aborts, ThrustFloorAborts) {
    const auto c = scenario("theorem4_tpv", {"control.sigma_min_ratio=0.5", "integrator.horizon=5",
                                             "agents.qd0=[[0, 0, 5], [0, 0, -5], [0, 0, 0]]"});
    const auto r = run(c);
    EXPECT_EQ(r.status, "aborted:thrust-floor");
    EXPECT_LT(r.metric("final_time"), 1.0);
}

TEST(Spacecraft, DesiredInitialAttitudeHasZeroError) {
    const auto c = scenario("theorem7_spacecraft", {"integrator.horizon=0", "agents.q0=[[0, 0, 0, 1]]"});
    const auto r = run(c);
    EXPECT_LE(r.samples[0].agents[0].y.norm(), 1e-15);
}

TEST(Spacecraft, NormAndOrthonormalityPreserved) {
    const auto r = run(scenario("theorem7_spacecraft", {"integrator.horizon=10"}));
    EXPECT_LE(r.metric("quaternion_norm_drift"), 1e-8);
    EXPECT_LE(r.metric("rotation_orthonormality"), 1e-8);
}

TEST(Pointmass, DualImplementationsAgree) {
    const auto r = run(scenario("pointmass_output_feedback", {"integrator.horizon=5"}));
    EXPECT_LE(r.metric("filter_dual_max"), 1e-9);
    EXPECT_LE(r.metric("mhat_dual_max"), 1e-9);
}

TEST(Internals, SignalAuditReportsForbiddenReadsOnce) {
    detail::SignalAudit audit(2, detail::PlantVelocity);
    const double v = 1.5;
    EXPECT_EQ(audit.read(1, detail::PlantVelocity, v), 1.5);
    audit.read(0, detail::TaskVelocity, v);
    const auto first = audit.take_violations();
    EXPECT_EQ(first, (std::vector<unsigned>{0u, detail::PlantVelocity}));
    EXPECT_EQ(audit.take_violations(), (std::vector<unsigned>{0u, 0u}));
}

TEST(Internals, ForAgentsRethrowsLowestIndex) {
    for (auto policy : {ExecPolicy::Serial, ExecPolicy::Parallel}) {
        std::vector<int> hit(6, 0);
        try {
            detail::for_agents(6, policy, [&](int i) {
                hit[static_cast<std::size_t>(i)] = 1;
                if (i == 4 || i == 2) throw std::runtime_error(std::to_string(i));
            });
            FAIL() << "no exception";
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "2");
        }
        EXPECT_EQ(hit, std::vector<int>(6, 1));
    }
}

TEST(Internals, DelayNetworkLookup) {
    const DirectedGraph g(Mat::Zero(2, 2));
    std::vector<std::vector<DelayProfile>> d(2, std::vector<DelayProfile>(2, DelayProfile::constant(0.25, 0.25)));
    detail::DelayNetwork net(SwitchingSchedule::fixed(g), d, {Vec::Zero(1), Vec::Zero(1)}, 0.1);
    for (int k = 1; k <= 5; ++k) net.record(0.1 * k, {Vec::Constant(1, k), Vec::Constant(1, -k)});
    const Vec stage = Vec::Constant(1, 10.0);
    EXPECT_EQ(net.lookup(0, 0.55, 0.55, stage)(0), 10.0);
    EXPECT_NEAR(net.lookup(0, 0.25, 0.55, stage)(0), 2.5, 1e-12);
    // Past the last record: linear between (0.5, 5) and the stage value at 0.6.
    EXPECT_NEAR(net.lookup(0, 0.55, 0.6, stage)(0), 7.5, 1e-12);
}
