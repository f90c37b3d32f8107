// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

TEST(Schemes, NamesRoundTrip) {
    for (Scheme s : kAllSchemes) EXPECT_EQ(parse_scheme(to_string(s)), s);
    EXPECT_THROW(parse_scheme("nope"), InvalidArgument);
}

TEST(Schemes, ReflectOnlyAttenuatesTransmitUsers) {
    const SystemConfig cfg;
    for (std::uint64_t t = 0; t < 10; ++t) {
        const ChannelSet ch = synthesize_trial(cfg, t);
        ChannelSet used = ch;
        AoOptions opt;
        prepare_scheme(Scheme::hnoma_ris, cfg, used, opt);
        ASSERT_TRUE(opt.fixed_reflect_amplitude.has_value());
        EXPECT_NEAR(*opt.fixed_reflect_amplitude, 6.0 / 7.0, 1e-15);
        for (int k = 0; k < ch.n_users(); ++k) {
            const double ratio = used.surface_to_user[k].squaredNorm() / ch.surface_to_user[k].squaredNorm();
            EXPECT_NEAR(ratio, ch.user_state[k] == Side::transmit ? 0.01 : 1.0, 1e-12);
        }
    }
}

TEST(Schemes, OrthogonalBaselineUsesSingletons) {
    const SystemConfig cfg = load_config("sigma2_dBm = -150\n");
    const SchemeResult r = run_oma_star(cfg, synthesize_trial(cfg, 0));
    EXPECT_EQ(r.plan.n_clusters(), cfg.n_users);
    double t = 0.0;
    for (double x : r.resources.time) t += x;
    EXPECT_NEAR(t, 1.0, 1e-9);
    for (double p : r.resources.power) EXPECT_NEAR(p, 1.0, 1e-12);
}

TEST(Schemes, SimultaneousBaselineReportsInterference) {
    const SystemConfig cfg = load_config("sigma2_dBm = -150\n");
    const SchemeResult r = run_noma_star(cfg, synthesize_trial(cfg, 1));
    ASSERT_EQ(r.inter_cluster.size(), static_cast<std::size_t>(cfg.n_users));
    for (double v : r.inter_cluster) EXPECT_GE(v, 0.0);
}

TEST(Schemes, RandomBaselineDrawsFromFeasibleSets) {
    const SystemConfig cfg;
    const ChannelSet ch = synthesize_trial(cfg, 2);
    const SchemeResult a = run_rand_star(cfg, ch, 2);
    const SchemeResult b = run_rand_star(cfg, ch, 2);
    EXPECT_EQ(a.sum_rate, b.sum_rate);
    EXPECT_EQ(a.iterations, 0);
    double t = 0.0;
    for (double x : a.resources.time) t += x;
    EXPECT_NEAR(t, 1.0, 1e-12);
    EXPECT_GE(a.sum_rate, 0.0);
}

TEST(Schemes, AllSchemesRunAndAreDeterministic) {
    const SystemConfig cfg = load_config("sigma2_dBm = -140\n");
    const ChannelSet ch = synthesize_trial(cfg, 3);
    AoOptions opt;
    opt.trial = 3;
    for (Scheme s : kAllSchemes) {
        const SchemeResult a = run_scheme(s, cfg, ch, opt);
        const SchemeResult b = run_scheme(s, cfg, ch, opt);
        EXPECT_TRUE(std::isfinite(a.sum_rate)) << to_string(s);
        EXPECT_GE(a.sum_rate, 0.0) << to_string(s);
        EXPECT_EQ(a.sum_rate, b.sum_rate) << to_string(s);
        EXPECT_EQ(a.scheme, s);
    }
}
