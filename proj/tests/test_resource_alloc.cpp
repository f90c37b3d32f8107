// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

TEST(Allocation, EqualSinrSplit) {
    const PowerSplit s = power_split_case1(3.0, 3.0, 1.0);
    EXPECT_NEAR(s.p_strong, 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(s.p_weak, 2.0 / 3.0, 1e-14);
    const PowerSplit u = power_split_case1(1.0, 3.0, 1.0);
    const double weak_sinr = u.p_weak * 1.0 / (u.p_strong * 1.0 + 1.0);
    EXPECT_NEAR(weak_sinr, 3.0 * u.p_strong, 1e-14);
    EXPECT_THROW(power_split_case1(1.0, 1.0, 0.0), InvalidArgument);
}

TEST(Allocation, SplitMatchesNumericRoot) {
    Rng rng = make_rng(2, 0, Stream::instance);
    for (int rep = 0; rep < 500; ++rep) {
        const double gi = std::exp(4.0 * gaussian(rng));
        const double gj = gi * (1.0 + std::exp(3.0 * gaussian(rng)));
        const PowerSplit s = power_split_case1(gi, gj, 1.0);
        const double root = oracle::numeric_root(
            [&](double p) { return p * p * gi * gj + p * (gi + gj) - gi; }, 0.0, 1.0, 1e-15);
        EXPECT_NEAR(s.p_strong, root, 1e-10);
    }
}

TEST(Allocation, TimeSlot) {
    EXPECT_NEAR(time_slot_case1(1.0, 1.0, 1.0, 0.5), 0.5, 1e-15);
    EXPECT_NEAR(time_slot_case1(1.0, 3.0, 1.0, 0.5), 0.25, 1e-15);
    EXPECT_EQ(time_slot_case1(1.0, 0.0, 1.0, 0.0), 0.0);
    EXPECT_THROW(time_slot_case1(0.0, 1.0, 1.0, 0.1), InfeasibleQos);
}

TEST(Allocation, ClosedFormMatchesComposition) {
    // symmetric gains: equal SINR is 1 at p = 1/3 with g = 3, so one bit per use
    const PowerSplit s = power_split_case1(3.0, 3.0, 1.0);
    EXPECT_NEAR(s.p_strong, 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(time_slot_case1(s.p_strong, 3.0, 1.0, 0.1), 0.1, 1e-14);
    EXPECT_NEAR(time_slot_case1_closed_form(3.0, 3.0, 1.0, 0.1), 0.1, 1e-12);
    Rng rng = make_rng(3, 0, Stream::instance);
    for (int rep = 0; rep < 100; ++rep) {
        const double gi = 0.1 + 5.0 * uniform01(rng);
        const double gj = gi + 5.0 * uniform01(rng);
        const PowerSplit p = power_split_case1(gi, gj, 1.0);
        EXPECT_NEAR(time_slot_case1(p.p_strong, gj, 1.0, 0.3), time_slot_case1_closed_form(gi, gj, 1.0, 0.3), 1e-9);
    }
}

TEST(Allocation, Case2EqualTargetsMatchCase1) {
    const ClusterAllocation a = allocate_case2(1.0, 3.0, 1.0, 0.2, 0.2);
    const PowerSplit s = power_split_case1(1.0, 3.0, 1.0);
    EXPECT_NEAR(a.p_strong, s.p_strong, 1e-8);
    EXPECT_NEAR(a.time, time_slot_case1(s.p_strong, 3.0, 1.0, 0.2), 1e-8);
}

TEST(Allocation, Case2MeetsTargetsExactly) {
    Rng rng = make_rng(4, 0, Stream::instance);
    for (int rep = 0; rep < 200; ++rep) {
        const double gi = 0.1 + 5.0 * uniform01(rng);
        const double gj = gi + 5.0 * uniform01(rng);
        const double ri = 0.05 + 0.5 * uniform01(rng);
        const double rj = 0.05 + 0.5 * uniform01(rng);
        const ClusterAllocation a = allocate_case2(gi, gj, 1.0, ri, rj);
        EXPECT_NEAR(a.p_weak + a.p_strong, 1.0, 1e-12);
        EXPECT_NEAR(a.time * log2p1(gi * a.p_weak / (gi * a.p_strong + 1.0)), ri, 1e-9);
        EXPECT_NEAR(a.time * log2p1(gj * a.p_strong), rj, 1e-9);
    }
}

TEST(Allocation, PowerRecursion) {
    const auto p = power_recursion_last_cluster({5.0, 50.0}, {1.0, 1.0}, {1.0, 0.0}, 1.0);
    EXPECT_NEAR(p[0], 0.6, 1e-14);
    EXPECT_NEAR(p[1], 0.4, 1e-14);
    const auto q = power_recursion_last_cluster({5.0, 50.0}, {1.0, 1.0}, {0.0, 0.0}, 1.0);
    EXPECT_EQ(q[0], 0.0);
    EXPECT_EQ(q[1], 1.0);
    EXPECT_THROW(power_recursion_last_cluster({5.0, 50.0}, {1.0, 1.0}, {1.0, 0.0}, 0.0), InfeasibleQos);
}

TEST(Allocation, AllocateAllServesQosAndFillsFrame) {
    ClusterPlan plan;
    plan.clusters = {{1, 0}, {3, 2}};
    plan.decoding_order = {1, 2, 1, 2};
    std::vector<UserLink> link(4);
    const double gains[] = {20.0, 200.0, 30.0, 300.0};
    for (int k = 0; k < 4; ++k) link[k] = {gains[k], 1.0, gains[k]};
    const std::vector<double> qos(4, 0.5);
    const ResourcePlan r = allocate_all(plan, link, qos);
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(r.strongest_cluster, 1);
    EXPECT_NEAR(r.time[0] + r.time[1], 1.0, 1e-12);
    LinkGains lg;
    for (const auto& l : link) {
        lg.gain.push_back(l.gain);
        lg.noise.push_back(l.noise);
    }
    const RateReport rep = evaluate_gains(plan, r, lg, qos);
    for (double v : rep.qos_residuals) EXPECT_GE(v, -1e-9);
    EXPECT_NEAR(rep.qos_residuals[0], 0.0, 1e-9);
    EXPECT_NEAR(rep.qos_residuals[1], 0.0, 1e-9);
}

TEST(Allocation, InfeasibleTargetsAreScaled) {
    ClusterPlan plan;
    plan.clusters = {{1, 0}, {3, 2}};
    plan.decoding_order = {1, 2, 1, 2};
    std::vector<UserLink> link(4);
    for (int k = 0; k < 4; ++k) link[k] = {1e-3, 1.0, 1e-3};
    const ResourcePlan r = allocate_all(plan, link, std::vector<double>(4, 1.0));
    EXPECT_FALSE(r.feasible);
    EXPECT_LT(r.qos_scale, 1.0);
    EXPECT_NEAR(r.time[0] + r.time[1], 1.0, 1e-9);
}

TEST(Rates, SinrOfStrongDecodingWeak) {
    const std::vector<double> p = {0.75, 0.25};
    EXPECT_NEAR(sinr(2.0, 1.0, p, {0, 1}, 0), 1.0, 1e-15);
    EXPECT_NEAR(sinr(2.0, 1.0, p, {0, 1}, 1), 0.5, 1e-15);
    EXPECT_EQ(sinr(0.0, 1.0, p, {0, 1}, 1), 0.0);
}
