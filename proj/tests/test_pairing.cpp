// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <numeric>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

TEST(Pairing, SplitByStrength) {
    const StrengthSplit s = split_by_strength({1.0, 4.0, 2.0, 3.0});
    EXPECT_EQ(s.strong, (std::vector<int>{1, 3}));
    EXPECT_EQ(s.weak, (std::vector<int>{2, 0}));
}

TEST(Assignment, AntiDiagonal) {
    Rmat s(2, 2);
    s << 0, 5, 5, 0;
    const Assignment a = solve_assignment(s);
    EXPECT_DOUBLE_EQ(a.value, 10.0);
    EXPECT_EQ(a.column_of, (std::vector<int>{1, 0}));
}

TEST(Assignment, MatchesPermutationSearch) {
    Rng rng = make_rng(3, 0, Stream::instance);
    for (int rep = 0; rep < 20; ++rep) {
        Rmat s(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) s(i, j) = uniform01(rng);
        std::vector<int> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        double best = -1.0;
        int count = 0;
        do {
            double v = 0.0;
            for (int i = 0; i < 6; ++i) v += s(i, perm[i]);
            best = std::max(best, v);
            ++count;
        } while (std::next_permutation(perm.begin(), perm.end()));
        EXPECT_EQ(count, 720);
        EXPECT_NEAR(solve_assignment(s).value, best, 1e-12);
    }
}

TEST(Assignment, RejectsNonSquare) { EXPECT_THROW(solve_assignment(Rmat(2, 3)), InvalidArgument); }

TEST(Pairing, PlanIsAPerfectMatchingWithOrders) {
    const SystemConfig cfg = load_config("K = 8\n");
    const ChannelSet ch = synthesize_trial(cfg, 2);
    const auto h = shared_channels(ch, uniform_profile(cfg.n_surface_elements, 0.5));
    const ClusterPlan plan = plan_clusters(h, ch.user_state);
    ASSERT_EQ(plan.n_clusters(), 4);
    std::vector<int> seen(8, 0);
    for (const auto& cl : plan.clusters) {
        ++seen[cl[0]];
        ++seen[cl[1]];
        EXPECT_EQ(plan.decoding_order[cl[0]], 2);
        EXPECT_EQ(plan.decoding_order[cl[1]], 1);
        EXPECT_GE(h[cl[0]].squaredNorm(), h[cl[1]].squaredNorm());
    }
    for (int v : seen) EXPECT_EQ(v, 1);
}

TEST(Pairing, MatchesBruteForce) {
    for (std::uint64_t t = 0; t < 20; ++t) {
        const SystemConfig cfg = load_config("K = 8\n");
        const ChannelSet ch = synthesize_trial(cfg, t);
        const auto h = shared_channels(ch, uniform_profile(cfg.n_surface_elements, 0.5));
        const ClusterPlan plan = plan_clusters(h, ch.user_state);
        const StrengthSplit split = split_by_strength(channel_strengths(h));
        const Rmat score = build_score_matrix(h, ch.user_state, split);
        oracle::Mask mask(4, std::vector<char>(4, 0));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) mask[i][j] = ch.user_state[split.strong[i]] != ch.user_state[split.weak[j]];
        const auto bf = oracle::brute_force_pairing(score, mask);
        EXPECT_NEAR(plan.correlation, bf.value, 1e-12 * std::max(1.0, std::abs(bf.value)));
    }
}

TEST(Pairing, SingletonAndRandomPlans) {
    const ClusterPlan s = singleton_plan(4);
    EXPECT_EQ(s.n_clusters(), 4);
    EXPECT_EQ(members_by_order(s, 2), (std::vector<int>{2}));
    Rng rng = make_rng(1, 0, Stream::pairing);
    const ClusterPlan r = random_plan(6, rng);
    EXPECT_EQ(r.n_clusters(), 3);
    EXPECT_THROW(random_plan(5, rng), InvalidArgument);
}
