// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

TEST(Oracle, PerfectMatchingCounts) {
    EXPECT_EQ(oracle::perfect_matchings(2), 1);
    EXPECT_EQ(oracle::perfect_matchings(4), 3);
    EXPECT_EQ(oracle::perfect_matchings(6), 15);
    EXPECT_EQ(oracle::perfect_matchings(8), 105);
}

TEST(Oracle, NumericRoot) {
    const double gi = 3.0, gj = 3.0;
    const double r = oracle::numeric_root([&](double p) { return p * p * gi * gj + p * (gi + gj) - gi; }, 0.0, 1.0, 1e-15);
    EXPECT_NEAR(r, 1.0 / 3.0, 1e-14);
    EXPECT_EQ(oracle::numeric_root([](double p) { return p; }, 0.0, 1.0), 0.0);
    EXPECT_THROW(oracle::numeric_root([](double) { return 1.0; }, 0.0, 1.0), InvalidArgument);
}

TEST(Oracle, BruteForceSearchesAgree) {
    Rng rng = make_rng(7, 0, Stream::instance);
    for (int rep = 0; rep < 50; ++rep) {
        Rmat s(4, 4);
        oracle::Mask mask(4, std::vector<char>(4, 0));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                s(i, j) = uniform01(rng);
                mask[i][j] = uniform01(rng) < 0.6;
            }
        const auto a = oracle::brute_force_pairing(s, mask);
        const auto b = oracle::brute_force_pairing_lex(s, mask);
        EXPECT_EQ(a.allowed_pairs, b.allowed_pairs);
        EXPECT_NEAR(a.value, b.value, 1e-12);
        EXPECT_EQ(b.matchings, 24);
        EXPECT_NEAR(oracle::brute_force_pairing(s).value, solve_assignment(s).value, 1e-12);
    }
}

TEST(Oracle, TinySumRate) {
    EXPECT_NEAR(oracle::tiny_sum_rate(3.0, 3.0, 1.0, 1.0, 1.0), 2.0, 1e-12);
    EXPECT_EQ(oracle::tiny_sum_rate(0.01, 0.01, 1.0, 1.0, 1.0), -std::numeric_limits<double>::infinity());
    const double both = oracle::tiny_sum_rate(1.0, 10.0, 1.0, 0.1, 0.1);
    EXPECT_GE(both, oracle::tiny_sum_rate(1.0, 10.0, 1.0, 0.1, 0.1, 1));
    EXPECT_GE(both, oracle::tiny_sum_rate(1.0, 10.0, 1.0, 0.1, 0.1, 0));
}

TEST(Oracle, ExhaustiveCodebookCount) {
    const auto r = oracle::exhaustive_codebook([](const Cvec& a, const Cvec& b) { return (a + b).sum().real(); }, 1, 1, 1);
    EXPECT_EQ(r.evaluated, 8);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    EXPECT_THROW(oracle::exhaustive_codebook([](const Cvec&, const Cvec&) { return 0.0; }, 3, 1, 1), InvalidArgument);
}

TEST(Oracle, GridBeamFindsMatchedFilter) {
    RowCvec h(2);
    h << cd(1.0, 0.5), cd(-0.3, 2.0);
    const auto obj = [&](const Cvec& w) { return std::norm(apply_row(h, w)); };
    const auto g = oracle::refine_beam(obj, oracle::grid_beamformer(obj, 2, 1.0, 24), 1.0, 0.1);
    EXPECT_NEAR(g.value / h.squaredNorm(), 1.0, 1e-6);
}
