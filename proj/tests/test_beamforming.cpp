// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

TEST(Quantize, NearestLevels) {
    EXPECT_EQ(nearest_phase_index(0.3, 1), 0);
    EXPECT_EQ(nearest_phase_index(2.0 * kPi - 0.01, 3), 0);
    EXPECT_EQ(nearest_phase_index(-kPi / 2.0, 2), 3);
    EXPECT_EQ(nearest_amplitude_index(0.6, 1), 1);
    EXPECT_EQ(nearest_amplitude_index(0.4, 1), 0);
    EXPECT_EQ(amplitude_levels(2), (std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}));
    EXPECT_EQ(phase_levels(1).size(), 2u);
}

TEST(Quantize, ProfileLandsOnCodebook) {
    Rng rng = make_rng(1, 0, Stream::instance);
    SurfaceProfile p{Cvec(8), Cvec(8)};
    for (int m = 0; m < 8; ++m) {
        const double a = uniform01(rng);
        p.reflect(m) = std::polar(a, 6.0 * uniform01(rng));
        p.transmit(m) = std::polar(1.0 - a, 6.0 * uniform01(rng));
    }
    const SurfaceProfile q = quantize_profile(p, 3, 2);
    for (int m = 0; m < 8; ++m) {
        const double ar = std::abs(q.reflect(m));
        const double at = std::abs(q.transmit(m));
        EXPECT_NEAR(ar + at, 1.0, 1e-12);
        EXPECT_NEAR(ar * 3.0, std::round(ar * 3.0), 1e-12);
        if (ar > 0.0) {
            const double k = std::arg(q.reflect(m)) / (kPi / 4.0);
            EXPECT_NEAR(k, std::round(k), 1e-9);
        }
    }
}

TEST(Quantize, OccupiedSideKeepsAmplitude) {
    SurfaceProfile p{Cvec::Constant(3, cd(1.0, 0.0)), Cvec::Zero(3)};
    p.transmit(1) = cd(0.0, 0.1);
    const SurfaceProfile q = quantize_profile(p, 2, 2, AmplitudeRule::joint, false, true);
    EXPECT_NEAR(std::abs(q.transmit(1)), 1.0 / 3.0, 1e-12);
    EXPECT_EQ(std::abs(q.transmit(0)), 0.0);
    EXPECT_EQ(std::abs(q.transmit(2)), 0.0);
    const SurfaceProfile r = quantize_profile(p, 2, 2);
    for (int m = 0; m < 3; ++m) EXPECT_EQ(std::abs(r.transmit(m)), 0.0);
}

TEST(ActiveInit, MatchedFilterAtFullPower) {
    Rng rng = make_rng(2, 0, Stream::instance);
    RowCvec a(3), b(3);
    a << cd(1, 0), cd(0, 1), cd(0, 0);
    b << cd(2, 0), cd(0, 0), cd(1, 1);
    const Cvec w = init_active({a, b}, 4.0, rng);
    EXPECT_NEAR(w.squaredNorm(), 4.0, 1e-12);
    EXPECT_NEAR(std::abs(apply_row(b, w)), 2.0 * b.norm(), 1e-12);
    bool fallback = false;
    const Cvec z = init_active({RowCvec::Zero(3)}, 2.0, rng, &fallback);
    EXPECT_TRUE(fallback);
    EXPECT_NEAR(z.squaredNorm(), 2.0, 1e-12);
}

TEST(PassiveInit, SingleElementCophases) {
    const SystemConfig cfg = load_config("M = 1\nN_t = 2\nK = 2\n");
    const ChannelSet ch = synthesize_trial(cfg, 0);
    Rng rng = make_rng(3, 0, Stream::instance);
    const Cvec w = random_unit_vector(rng, 2);
    for (int k = 0; k < 2; ++k) {
        const SurfaceProfile p = init_passive(ch, {k}, w, 0.5);
        const cd v = apply_row(user_channel(ch, p, k), w);
        EXPECT_NEAR(v.imag(), 0.0, 1e-12 * std::abs(v));
        EXPECT_GE(v.real(), 0.0);
    }
}

TEST(PassiveInit, AmplitudesFollowShare) {
    const SystemConfig cfg;
    const ChannelSet ch = synthesize_trial(cfg, 1);
    Rng rng = make_rng(4, 0, Stream::instance);
    const SurfaceProfile p = init_passive(ch, {0, 1}, random_unit_vector(rng, 16), 0.3);
    for (int m = 0; m < 16; ++m) {
        EXPECT_NEAR(std::abs(p.reflect(m)), 0.3, 1e-12);
        EXPECT_NEAR(std::abs(p.transmit(m)), 0.7, 1e-12);
    }
}

TEST(Beamforming, BeamsRespectPowerBudget) {
    const SystemConfig cfg = load_config("sigma2_dBm = -150\n");
    const ChannelSet ch = synthesize_trial(cfg, 2);
    AoOptions opt;
    opt.trial = 2;
    const AoTrace tr = run_ao(cfg, ch, opt);
    for (const Cvec& w : tr.beams.w) EXPECT_LE(w.squaredNorm(), cfg.tx_power_max * (1.0 + 1e-9));
}

TEST(Beamforming, ActiveStageAtLeastKeepsTheStart) {
    Rng rng = make_rng(5, 0, Stream::instance);
    RowCvec h(4);
    for (int i = 0; i < 4; ++i) h(i) = complex_gaussian(rng, 1.0);
    SinrProblem prob;
    prob.dim = 4;
    prob.norm_ball = true;
    UserTerm u;
    u.h = h;
    u.power = 1.0;
    prob.users.push_back(u);
    const Cvec x0 = random_unit_vector(rng, 4);
    const SinrSolution s = solve_sinr_subproblem(prob, x0);
    EXPECT_GE(std::norm(apply_row(h, s.x)), std::norm(apply_row(h, x0)) - 1e-9);
}
