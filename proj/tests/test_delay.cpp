#include "forwardstep/delay.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fstep;

TEST(DelayProfile, Examples) {
    EXPECT_DOUBLE_EQ(DelayProfile::constant(0.1, 1.0).at(7.3), 0.1);
    EXPECT_DOUBLE_EQ(DelayProfile::sinusoidal(0.2, 0.1, 1.0, 1.0).at(std::numbers::pi / 2), 0.3);
    const auto p = DelayProfile::piecewise({{0.0, 0.1}, {5.0, 0.3}}, 1.0);
    EXPECT_DOUBLE_EQ(p.at(5.0), 0.3);
    EXPECT_DOUBLE_EQ(p.at(4.999), 0.1);
}

TEST(DelayProfile, CompositeAndStepFreezing) {
    const DelayProfile p(0.2, 0.1, 1.0, {{10.0, 0.1}}, 0.5);
    EXPECT_NEAR(p.at(10.0), 0.3 + 0.1 * std::sin(10.0), 1e-15);
    EXPECT_NEAR(p.at_in_step(10.0005, 9.999), 0.2 + 0.1 * std::sin(10.0005), 1e-15);
    EXPECT_NEAR(p.rate_at(2.0), 0.1 * std::cos(2.0), 1e-15);
}

TEST(DelayProfile, ValidateRejectsOutOfBound) {
    EXPECT_NO_THROW(DelayProfile(0.2, 0.1, 1.0, {{10.0, 0.1}}, 0.5).validate(20.0, 1e-3));
    EXPECT_THROW(DelayProfile::sinusoidal(0.05, 0.1, 1.0, 1.0).validate(10.0, 1e-2), ConfigError);
    EXPECT_THROW(DelayProfile::piecewise({{3.0, 2.0}}, 1.0).validate(10.0, 1e-2), ConfigError);
    EXPECT_THROW(DelayProfile::constant(0.1, 0.0), ConfigError);
}

TEST(History, RecordAndEvict) {
    HistoryBuffer b(1.0, Vec::Zero(1));
    b.record(0.0, Vec::Constant(1, 0.0));
    EXPECT_EQ(b.size(), 1u);
    for (int k = 1; k <= 50; ++k) b.record(k * 0.1, Vec::Constant(1, k * 0.1));
    EXPECT_LE(b.first_time(), 5.0 - 1.0);
    EXPECT_GT(b.first_time(), 5.0 - 1.0 - 0.1 - 1e-12);
    EXPECT_THROW(b.record(5.0, Vec::Zero(1)), UsageError);
    EXPECT_THROW(b.sample_at(2.0), UsageError);   // fell off the retained horizon
}

TEST(History, LinearHistoryIsExact) {
    HistoryBuffer b(2.0, Vec::Zero(1));
    const double h = 1e-3;
    for (int k = 0; k <= 2000; ++k) b.record(k * h, Vec::Constant(1, k * h));
    EXPECT_NEAR(b.sample_delayed(1.0, 0.1)(0), 0.9, 1e-15);
    EXPECT_EQ(b.sample_delayed(2.0, 0.0)(0), b.last_value()(0));
    fstep::testing::Gen gen(3);
    for (int i = 0; i < 1000; ++i) {
        const double t = gen.uniform(1.0, 2.0);
        const double d = gen.uniform(0.0, 0.9);
        EXPECT_NEAR(b.sample_delayed(t, d)(0), t - d, 1e-14);
    }
}

TEST(History, PreHistoryIsConstantHold) {
    Vec x0(2);
    x0 << 3.0, -1.0;
    HistoryBuffer b(1.0, x0);
    b.record(0.0, x0);
    b.record(0.1, Vec::Zero(2));
    EXPECT_EQ(b.sample_at(-0.5), x0);
    EXPECT_EQ(b.sample_delayed(0.05, 0.3), x0);
}

TEST(History, SinusoidInterpolationBound) {
    const double h = 1e-2;
    HistoryBuffer b(5.0, Vec::Zero(1));
    for (int k = 0; k <= 500; ++k) b.record(k * h, Vec::Constant(1, std::sin(3.0 * k * h)));
    const double bound = h * h / 8.0 * 9.0;   // max|x''| = 9
    fstep::testing::Gen gen(9);
    for (int i = 0; i < 2000; ++i) {
        const double t = gen.uniform(0.0, 5.0);
        EXPECT_LE(std::abs(b.sample_at(t)(0) - std::sin(3.0 * t)), bound * (1 + 1e-9));
    }
}

TEST(History, RepeatedQueriesIdentical) {
    HistoryBuffer b(1.0, Vec::Zero(3));
    fstep::testing::Gen gen(4);
    for (int k = 0; k < 100; ++k) b.record(k * 0.01, gen.vec(3));
    const Vec a = b.sample_delayed(0.9, 0.123);
    const Vec c = b.sample_delayed(0.9, 0.123);
    EXPECT_EQ(a, c);
}

TEST(History, QueryBeyondLastSampleThrows) {
    HistoryBuffer b(1.0, Vec::Zero(1));
    b.record(0.0, Vec::Zero(1));
    EXPECT_THROW(b.sample_at(0.5), UsageError);
    EXPECT_THROW(b.sample_delayed(0.0, -0.1), UsageError);
}
