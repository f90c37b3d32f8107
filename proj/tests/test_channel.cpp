// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

TEST(Steering, BroadsideIsFlat) {
    const Cvec v = upa_steering(0.0, 0.0, 2, 2, 0.5);
    ASSERT_EQ(v.size(), 4);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(v(i) - cd(0.5, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(v.norm(), 1.0, 1e-15);
}

TEST(Steering, EndfireAlternatesSign) {
    const Cvec v = upa_steering(kPi / 2.0, 0.0, 1, 2, 0.5);
    const double s = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(v(0) - cd(s, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(v(1) - cd(-s, 0.0)), 0.0, 1e-15);
}

TEST(Steering, UserResponseHasUnitEntries) {
    const Cvec v = user_steering(0.3, 1.1, 4, 4, 0.5);
    for (int i = 0; i < v.size(); ++i) EXPECT_NEAR(std::abs(v(i)), 1.0, 1e-15);
    EXPECT_THROW(upa_steering(std::nan(""), 0.0, 2, 2, 0.5), InvalidArgument);
}

TEST(PathLoss, ReferenceValues) {
    EXPECT_NEAR(path_loss_db(1.0, 60.0, 2.2, 0.0), 60.0, 1e-12);
    EXPECT_NEAR(path_loss_db(10.0, 60.0, 2.2, 0.0), 82.0, 1e-12);
    EXPECT_NEAR(path_loss_db(100.0, 60.0, 2.8, 5.8), 121.8, 1e-12);
}

TEST(Channel, ComposeMatchesDiagonalProduct) {
    Rng rng = make_rng(5, 0, Stream::instance);
    const int M = 9, N = 4;
    Cmat H(M, N);
    Cvec g(M), u(M);
    for (int i = 0; i < M; ++i) {
        g(i) = complex_gaussian(rng, 1.0);
        u(i) = complex_gaussian(rng, 1.0);
        for (int j = 0; j < N; ++j) H(i, j) = complex_gaussian(rng, 1.0);
    }
    const Cmat dense = g.adjoint() * Cmat(u.asDiagonal()) * H;
    const RowCvec h = compose_end_to_end(g, u, H);
    EXPECT_LT((dense - h).norm(), 1e-12 * dense.norm());
    const Cvec w = random_unit_vector(rng, N);
    EXPECT_NEAR(std::abs(apply_row(h, w) - u.cwiseProduct(element_cascade(g, H, w)).sum()), 0.0, 1e-12);
}

TEST(Channel, ShapesAndSides) {
    const SystemConfig cfg = load_config("M = 36\n");
    const ChannelSet ch = synthesize_trial(cfg, 3);
    EXPECT_EQ(ch.bs_to_surface.rows(), 36);
    EXPECT_EQ(ch.bs_to_surface.cols(), 16);
    ASSERT_EQ(ch.n_users(), 6);
    for (int k = 0; k < 6; ++k) {
        EXPECT_EQ(ch.surface_to_user[k].size(), 36);
        const Side s = side_of(ch.user_positions[k], cfg.surface_position, cfg.bs_position);
        EXPECT_EQ(s, ch.user_state[k]);
        EXPECT_LE((ch.user_positions[k] - cfg.surface_position).norm(), cfg.user_region_radius + 1e-9);
    }
}

TEST(Channel, DeterministicPerTrial) {
    const SystemConfig cfg;
    const ChannelSet a = synthesize_trial(cfg, 4);
    const ChannelSet b = synthesize_trial(cfg, 4);
    const ChannelSet c = synthesize_trial(cfg, 5);
    EXPECT_EQ((a.bs_to_surface - b.bs_to_surface).norm(), 0.0);
    EXPECT_GT((a.bs_to_surface - c.bs_to_surface).norm(), 0.0);
}

TEST(Channel, NlosVarianceMatchesPathLoss) {
    // unit LoS gains make the LoS part deterministic, so the residual is the NLoS term
    SystemConfig cfg = load_config("M = 4\nK = 2\nregion_radius_m = 1e-9\nmin_distance_m = 10\nzeta_dB = 0\n");
    cfg.los_gain = GainLaw::unit;
    const double var = loss_db_to_gain(path_loss_db(10.0, 60.0, 2.8, 0.0));
    const double los_amp = std::sqrt(var) * std::sqrt(16.0 * 4.0);
    double acc = 0.0;
    int n = 0;
    for (std::uint64_t t = 0; t < 2000; ++t) {
        const ChannelSet ch = synthesize_trial(cfg, t);
        for (int k = 0; k < 2; ++k) {
            const Angles a = direction_angles(cfg.surface_position, ch.user_positions[k]);
            const Cvec los = los_amp * user_steering(a.elevation, a.azimuth, 2, 2, 0.5);
            acc += (ch.surface_to_user[k] - los).squaredNorm();
            n += 4;
        }
    }
    EXPECT_NEAR(acc / n / var, 1.0, 0.05);
}

TEST(Channel, AttenuationScalesPower) {
    ChannelSet ch = synthesize_trial(SystemConfig{}, 0);
    const double before = ch.surface_to_user[0].squaredNorm();
    attenuate_user(ch, 0, 20.0);
    EXPECT_NEAR(ch.surface_to_user[0].squaredNorm() / before, 0.01, 1e-12);
}
