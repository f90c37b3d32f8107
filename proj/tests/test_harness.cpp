// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "starnoma/starnoma.hpp"

using namespace starnoma;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

int cli(const std::string& args) { return std::system((std::string(STARNOMA_CLI) + " " + args + " > /dev/null 2>&1").c_str()); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("starnoma_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST(Harness, GridLabels) {
    const auto pts = make_grid(SystemConfig{}, {{"M", {16, 36}}, {"P_max_dBm", {20}}});
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[0].cfg.n_surface_elements, 16);
    EXPECT_EQ(pts[1].cfg.n_surface_elements, 36);
    EXPECT_NEAR(watts_to_dbm(pts[1].cfg.tx_power_max), 20.0, 1e-12);
    EXPECT_NE(pts[0].label, pts[1].label);
    EXPECT_EQ(make_grid(SystemConfig{}, {}).front().label, "base");
    EXPECT_THROW(make_grid(SystemConfig{}, {{"unknown", {1}}}), InvalidArgument);
}

TEST(Harness, ThreadCountDoesNotChangeResults) {
    const auto pts = make_grid(load_config("M = 4\n"), {});
    const auto arms = scheme_arms({Scheme::hnoma_star, Scheme::rand_star});
    const auto a = run_grid(pts, arms, {4, 1, false});
    const auto b = run_grid(pts, arms, {4, 2, false});
    EXPECT_EQ(records_csv(a, false), records_csv(b, false));
    EXPECT_EQ(a.size(), 8u);
}

TEST(Harness, SummaryStatistics) {
    std::vector<TrialRecord> recs(3);
    const double v[] = {1.0, 2.0, 3.0};
    for (int i = 0; i < 3; ++i) {
        recs[i].point = "p";
        recs[i].arm = "a";
        recs[i].sum_rate = v[i];
        recs[i].converged = true;
    }
    recs.push_back(recs[0]);
    recs.back().sum_rate = std::nan("");
    recs.back().error = "boom";
    const auto rows = summarize(recs);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].n, 3);
    EXPECT_EQ(rows[0].failed, 1);
    EXPECT_NEAR(rows[0].mean, 2.0, 1e-15);
    EXPECT_NEAR(rows[0].stddev, 1.0, 1e-15);
    EXPECT_NEAR(rows[0].ci95, 1.96 / std::sqrt(3.0), 1e-12);
}

TEST(Harness, CsvHeaders) {
    const std::string r = records_csv({}, false);
    EXPECT_EQ(r.substr(0, r.find('\n')),
              "point,arm,trial,seed,config_hash,sum_rate,initial_sum_rate,iterations,converged,qos_feasible,"
              "unserved_users,min_qos_residual,metric,error");
    EXPECT_NE(records_csv({}, true).find("wall_seconds"), std::string::npos);
    const std::string s = summary_csv({});
    EXPECT_EQ(s.substr(0, s.find('\n')),
              "point,arm,n,failed,mean,stddev,ci95,mean_iterations,converged_fraction,feasible_fraction,mean_metric");
}

TEST(Harness, ExperimentsBuild) {
    for (const auto& n : experiment_names()) {
        const Experiment e = make_experiment(n, SystemConfig{});
        EXPECT_FALSE(e.points.empty()) << n;
        EXPECT_FALSE(e.arms.empty()) << n;
    }
    EXPECT_THROW(make_experiment("nope", SystemConfig{}), InvalidArgument);
}

TEST(Cli, SweepHasOneRowPerValueSchemeAndTrial) {
    const fs::path d = scratch("sweep");
    ASSERT_EQ(cli("--set M=4 --out " + d.string() + " sweep --param P_max_dBm --values 20,30 --trials 2 "
                  "--schemes hnoma_star,oma_star"),
              0);
    EXPECT_EQ(count_lines(slurp(d / "records.csv")), 1 + 2 * 2 * 2);
    EXPECT_EQ(count_lines(slurp(d / "summary.csv")), 1 + 2 * 2);
    const Json m = Json::parse(slurp(d / "manifest.json"));
    EXPECT_EQ(m["command"], "sweep");
    EXPECT_TRUE(m.contains("config"));
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const std::string args = " --set M=4 mc --trials 2 --schemes hnoma_star,noma_star";
    ASSERT_EQ(cli("--out " + a.string() + args), 0);
    ASSERT_EQ(cli("--out " + b.string() + " --jobs 2" + args), 0);
    for (const char* f : {"records.csv", "summary.csv", "summary.json", "manifest.json"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, ConfigErrorsExitWithTwo) {
    EXPECT_EQ(WEXITSTATUS(cli("--set K=5 config")), 2);
    EXPECT_EQ(WEXITSTATUS(cli("--set nonsense=1 config")), 2);
    EXPECT_EQ(WEXITSTATUS(cli("config")), 0);
}

TEST(Cli, RunWritesTrace) {
    const fs::path d = scratch("run");
    ASSERT_EQ(cli("--set M=4 --out " + d.string() + " run --scheme hnoma_star --trial 1"), 0);
    const std::string tr = slurp(d / "trace.jsonl");
    EXPECT_GE(count_lines(tr), 1);
    const Json r = Json::parse(slurp(d / "result.json"));
    EXPECT_TRUE(r.contains("scheme"));
}
