// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

namespace {

SystemConfig strong_link() { return load_config("sigma2_dBm = -150\n"); }

} // namespace

TEST(Ao, LargeThresholdStopsAfterOneIteration) {
    SystemConfig cfg = strong_link();
    cfg.convergence_threshold = 1e9;
    const AoTrace tr = run_ao(cfg, synthesize_trial(cfg, 0));
    EXPECT_EQ(tr.iterations_run(), 1);
    EXPECT_EQ(tr.status, AoStatus::converged);
}

TEST(Ao, RepeatedRunsAreIdentical) {
    const SystemConfig cfg = strong_link();
    const ChannelSet ch = synthesize_trial(cfg, 1);
    AoOptions opt;
    opt.trial = 1;
    const AoTrace a = run_ao(cfg, ch, opt);
    const AoTrace b = run_ao(cfg, ch, opt);
    EXPECT_EQ(trace_jsonl(a, false), trace_jsonl(b, false));
    EXPECT_EQ(trace_json(a, false).dump(), trace_json(b, false).dump());
}

TEST(Ao, FinalStateIsFeasibleAndQuantized) {
    const SystemConfig cfg = strong_link();
    for (std::uint64_t t = 0; t < 5; ++t) {
        const ChannelSet ch = synthesize_trial(cfg, t);
        AoOptions opt;
        opt.trial = t;
        const AoTrace tr = run_ao(cfg, ch, opt);
        ASSERT_GE(tr.iterations_run(), 1);
        EXPECT_LE(tr.iterations_run(), cfg.max_iterations);
        EXPECT_TRUE(std::isfinite(tr.sum_rate));
        double tsum = 0.0;
        for (double x : tr.resources.time) {
            EXPECT_GE(x, -1e-12);
            tsum += x;
        }
        EXPECT_NEAR(tsum, 1.0, 1e-9);
        for (const auto& p : tr.beams.profile)
            for (int m = 0; m < p.size(); ++m) {
                const double ar = std::abs(p.reflect(m)) * 7.0;
                EXPECT_NEAR(ar, std::round(ar), 1e-9);
                EXPECT_NEAR(std::abs(p.reflect(m)) + std::abs(p.transmit(m)), 1.0, 1e-12);
            }
        if (tr.resources.feasible) {
            for (double r : tr.report.qos_residuals) EXPECT_GE(r, -1e-6);
        }
        EXPECT_NEAR(tr.sum_rate, tr.report.sum_rate, 1e-12);
    }
}

TEST(Ao, QuasiMonotoneTrace) {
    SystemConfig cfg = strong_link();
    cfg.convergence_threshold = 1e-6;
    const AoTrace tr = run_ao(cfg, synthesize_trial(cfg, 3));
    double prev = tr.initial_sum_rate;
    for (const auto& it : tr.iterations) {
        EXPECT_GE(it.sum_rate, prev - it.quantization_gap - 1e-9);
        prev = it.sum_rate;
    }
}

TEST(Ao, FixedAllocationModes) {
    const SystemConfig cfg = strong_link();
    const ChannelSet ch = synthesize_trial(cfg, 4);
    AoOptions opt;
    opt.allocation = AllocationMode::fixed_split;
    opt.fixed_weak_power = 0.7;
    const AoTrace tr = run_ao(cfg, ch, opt);
    for (const auto& cl : tr.plan.clusters) EXPECT_NEAR(tr.resources.power[cl[1]], 0.7, 1e-12);
    for (double t : tr.resources.time) EXPECT_NEAR(t, 1.0 / 3.0, 1e-12);
}

TEST(Ao, ResourceHelpers) {
    Rng rng = make_rng(1, 0, Stream::instance);
    const ClusterPlan plan = random_plan(6, rng);
    const ResourcePlan r = random_resources(plan, 6, rng);
    double t = 0.0;
    for (double x : r.time) t += x;
    EXPECT_NEAR(t, 1.0, 1e-12);
    for (const auto& cl : plan.clusters) EXPECT_NEAR(r.power[cl[0]] + r.power[cl[1]], 1.0, 1e-12);
    EXPECT_THROW(split_resources(plan, 6, 1.5), InvalidArgument);
}
