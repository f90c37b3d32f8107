// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

TEST(Units, DbmToWatts) {
    EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-15);
    EXPECT_NEAR(dbm_to_watts(-104.0) / 3.981071705534973e-14, 1.0, 1e-12);
    EXPECT_NEAR(watts_to_dbm(dbm_to_watts(17.5)), 17.5, 1e-12);
    EXPECT_NEAR(loss_db_to_gain(60.0), 1e-6, 1e-20);
    EXPECT_NEAR(linear_to_db(db_to_linear(-3.0)), -3.0, 1e-12);
}

TEST(Config, EmptyTextGivesDefaults) {
    const SystemConfig c = load_config("");
    EXPECT_EQ(c.n_tx_antennas, 16);
    EXPECT_EQ(c.n_surface_elements, 16);
    EXPECT_EQ(c.n_users, 6);
    EXPECT_EQ(c.n_clusters, 3);
    EXPECT_EQ(c.phase_bits, 3);
    EXPECT_EQ(c.amplitude_bits, 3);
    EXPECT_NEAR(c.tx_power_max, 1.0, 1e-15);
    EXPECT_NEAR(watts_to_dbm(c.noise_power), -104.0, 1e-12);
    ASSERT_EQ(c.qos_min_rates.size(), 6u);
    EXPECT_DOUBLE_EQ(c.qos_min_rates[0], 0.1);
    EXPECT_DOUBLE_EQ(c.convergence_threshold, 0.1);
    EXPECT_EQ(c.max_iterations, 30);
}

TEST(Config, OddUserCountRejected) {
    try {
        load_config("K = 5\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("K must be even"), std::string::npos);
    }
}

TEST(Config, ClusterCountMustBeHalf) {
    try {
        load_config("K = 8\nC = 3\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("C must equal K/2"), std::string::npos);
    }
}

TEST(Config, DerivedKeys) {
    const SystemConfig c = load_config("K = 8\nM = 36\nR_min = 0.2\n");
    EXPECT_EQ(c.n_clusters, 4);
    EXPECT_EQ(c.surface_rows * c.surface_cols, 36);
    ASSERT_EQ(c.qos_min_rates.size(), 8u);
    EXPECT_DOUBLE_EQ(c.qos_min_rates[7], 0.2);
}

TEST(Config, RejectsUnknownKeyAndBadValue) {
    EXPECT_THROW(load_config("nonsense = 1\n"), ConfigError);
    EXPECT_THROW(load_config("M = abc\n"), ConfigError);
    EXPECT_THROW(load_config("B1 = 0\n"), ConfigError);
    EXPECT_THROW(load_config("R_min = 0.1,0.2\n"), ConfigError);
}

TEST(Config, TextRoundTripPreservesHash) {
    const SystemConfig c = load_config("M = 36\nP_max_dBm = 25\nseed = 7\nR_min = 0.1,0.2,0.1,0.2,0.1,0.2\n");
    const SystemConfig d = load_config(to_text(c));
    EXPECT_EQ(config_hash(c), config_hash(d));
    EXPECT_EQ(to_text(c), to_text(d));
    EXPECT_NE(config_hash(c), config_hash(SystemConfig{}));
}

TEST(Config, OverridesReplaceKeys) {
    const std::string text = with_overrides("M = 36\nK = 6\n", {{"M", "64"}, {"seed", "9"}});
    const SystemConfig c = load_config(text);
    EXPECT_EQ(c.n_surface_elements, 64);
    EXPECT_EQ(c.seed, 9u);
}

TEST(Config, SeedFromEnvironment) {
    ::setenv("STARNOMA_SEED", "42", 1);
    const SystemConfig c = apply_env_overrides(SystemConfig{});
    ::unsetenv("STARNOMA_SEED");
    EXPECT_EQ(c.seed, 42u);
}

TEST(Config, SchemaListsEveryKey) {
    const std::string s = config_schema();
    for (const char* k : {"P_max_dBm", "sigma2_dBm", "N_t", "M", "K", "R_min", "B1", "B2", "seed", "polish", "beam_realign"})
        EXPECT_NE(s.find(k), std::string::npos) << k;
}
