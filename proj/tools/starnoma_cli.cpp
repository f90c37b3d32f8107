// SPDX-License-Identifier: Apache-2.0
// Command-line front end: single AO traces, Monte Carlo runs, parameter sweeps,
// named experiments and the oracle suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "starnoma/starnoma.hpp"

namespace fs = std::filesystem;
using namespace starnoma;

namespace {

struct Common {
    std::string config = "table1";
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool timing = false;
    int jobs = 1;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

SystemConfig resolve_config(const Common& c) {
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        kv.emplace_back(detail::trim(std::string_view(s).substr(0, eq)), detail::trim(std::string_view(s).substr(eq + 1)));
    }
    const std::string base = c.config == "table1" ? std::string() : read_file(c.config);
    SystemConfig cfg = apply_env_overrides(load_config(with_overrides(base, kv)));
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

std::string out_dir(const Common& c, const std::string& command) {
    const std::string dir = c.out.empty() ? output_dir_from_env("starnoma_out") + "/" + command : c.out;
    fs::create_directories(dir);
    return dir;
}

std::vector<Scheme> parse_schemes(const std::string& list) {
    std::vector<Scheme> out;
    if (list.empty() || list == "all") return {kAllSchemes.begin(), kAllSchemes.end()};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_scheme(detail::trim(item)));
    return out;
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const std::string t = detail::trim(item);
            out.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw InvalidArgument("--values: cannot parse '" + item + "'");
        }
    }
    if (out.empty()) throw InvalidArgument("--values must not be empty");
    return out;
}

Json scheme_names(const std::vector<Arm>& arms) {
    Json a = Json::array();
    for (const auto& arm : arms) a.push_back(arm.label);
    return a;
}

void write_tables(const std::string& dir, const std::vector<TrialRecord>& recs, bool timing) {
    const auto rows = summarize(recs);
    write_text(dir + "/records.csv", records_csv(recs, timing));
    write_text(dir + "/summary.csv", summary_csv(rows));
    write_text(dir + "/summary.json", summary_json(rows).dump(2) + "\n");
    for (const auto& r : rows)
        std::printf("%-28s %-16s n=%-4d mean=%-12s ci95=%-10s iters=%s\n", r.point.c_str(), r.arm.c_str(), r.n,
                    num(r.mean).c_str(), num(r.ci95).c_str(), num(r.mean_iterations).c_str());
}

int cmd_run(const Common& c, const std::string& scheme_name, std::uint64_t trial) {
    const SystemConfig cfg = resolve_config(c);
    const Scheme scheme = parse_scheme(scheme_name);
    if (scheme == Scheme::rand_star) throw InvalidArgument("run: rand_star has no AO trace; use mc");
    const ChannelSet ch = synthesize_trial(cfg, trial);
    AoOptions opt;
    opt.trial = trial;
    opt.record_timing = c.timing;
    const TracedScheme ts = run_scheme_traced(scheme, cfg, ch, opt);
    const AoTrace& tr = ts.trace;
    const std::string dir = out_dir(c, "run");
    write_text(dir + "/trace.jsonl", trace_jsonl(tr, c.timing));
    Json result = trace_json(tr, c.timing);
    result["scheme"] = scheme_json(ts.result);
    write_text(dir + "/result.json", result.dump(2) + "\n");
    write_text(dir + "/manifest.json",
               manifest_json("run", cfg, Json{{"scheme", to_string(scheme)}, {"trial", trial}}).dump(2) + "\n");
    std::printf("%s: sum-rate %s bps/Hz after %d iterations (%s), initial %s, qos %s\n", to_string(scheme),
                num(tr.sum_rate).c_str(), tr.iterations_run(), to_string(tr.status), num(tr.initial_sum_rate).c_str(),
                tr.resources.feasible ? "met" : "not met");
    return 0;
}

int cmd_grid(const Common& c, const std::string& command, const std::vector<GridPoint>& points,
             const std::vector<Arm>& arms, std::uint64_t trials, const Json& extra) {
    const auto recs = run_grid(points, arms, {trials, c.jobs, c.timing});
    const std::string dir = out_dir(c, command);
    write_tables(dir, recs, c.timing);
    Json ex = extra;
    ex["trials"] = trials;
    ex["arms"] = scheme_names(arms);
    Json pts = Json::array();
    for (const auto& p : points) pts.push_back(p.label);
    ex["points"] = pts;
    write_text(dir + "/manifest.json", manifest_json(command, points.front().cfg, ex).dump(2) + "\n");
    return 0;
}

int cmd_oracle_check(const Common& c) {
    const std::string dir = out_dir(c, "oracle-check");
    Json results = Json::array();
    bool ok = true;
    for (const auto& r : checks::oracle_suite()) {
        std::printf("%s\n", checks::format(r).c_str());
        results.push_back(Json{{"criterion", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
        ok = ok && r.passed;
    }
    write_text(dir + "/oracle_check.json", results.dump(2) + "\n");
    write_text(dir + "/manifest.json", manifest_json("oracle-check", SystemConfig{}).dump(2) + "\n");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"STAR-RIS hybrid-NOMA sum-rate simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    std::uint64_t seed_value = 0;
    app.add_option("--config", c.config, "config file of key = value lines, or 'table1' for the defaults");
    app.add_option("--set", c.sets, "override one config key, key=value (repeatable)");
    auto* seed_opt = app.add_option("--seed", seed_value, "master seed (overrides config and STARNOMA_SEED)");
    app.add_option("--out", c.out, "output directory (default $STARNOMA_OUT_DIR/<command> or starnoma_out/<command>)");
    app.add_flag("--timing", c.timing, "record wall-clock times (outputs are then not byte-reproducible)");
    app.add_option("--jobs", c.jobs, "worker threads for trials (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
    app.footer("Config keys:\n" + config_schema());

    std::string scheme = "hnoma_star";
    std::uint64_t trial = 0;
    auto* run = app.add_subcommand("run", "one AO trace: trace.jsonl, result.json, manifest.json");
    run->add_option("--scheme", scheme, "hnoma_star | noma_star | oma_star | hnoma_ris");
    run->add_option("--trial", trial, "trial index of the channel realization");

    std::uint64_t trials = 100;
    std::string schemes = "all";
    auto* mc = app.add_subcommand("mc", "seeded Monte Carlo trials for a set of schemes");
    mc->add_option("--trials", trials, "number of trials");
    mc->add_option("--schemes", schemes, "comma-separated schemes or 'all'");

    std::string param, values;
    std::uint64_t sweep_trials = 20;
    auto* sweep = app.add_subcommand("sweep", "vary one parameter over a grid");
    sweep->add_option("--param", param, "M | P_max_dBm | C | R_min | ES | N_t | B1 | B2")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    sweep->add_option("--trials", sweep_trials, "trials per value");
    sweep->add_option("--schemes", schemes, "comma-separated schemes or 'all'");

    auto* oracle_cmd = app.add_subcommand("oracle-check", "run the oracle equivalence suite");

    std::string exp_name;
    std::optional<std::uint64_t> exp_trials;
    bool full = false;
    std::string names;
    for (const auto& n : experiment_names()) names += (names.empty() ? "" : " | ") + n;
    auto* exp = app.add_subcommand("experiment", "named figure-family experiment");
    exp->add_option("name", exp_name, names)->required();
    exp->add_option("--trials", exp_trials, "trials per grid point (default: desk scale)");
    exp->add_flag("--full", full, "use 10000 trials per grid point");

    auto* show = app.add_subcommand("config", "print the resolved configuration");

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) c.seed = seed_value;

    try {
        if (*run) return cmd_run(c, scheme, trial);
        if (*mc) {
            const SystemConfig cfg = resolve_config(c);
            const auto arms = scheme_arms(parse_schemes(schemes));
            return cmd_grid(c, "mc", make_grid(cfg, {}), arms, trials, Json::object());
        }
        if (*sweep) {
            const SystemConfig cfg = resolve_config(c);
            const auto arms = scheme_arms(parse_schemes(schemes));
            const auto vals = parse_values(values);
            return cmd_grid(c, "sweep", make_grid(cfg, {{param, vals}}), arms, sweep_trials,
                            Json{{"param", param}, {"values", vals}});
        }
        if (*oracle_cmd) return cmd_oracle_check(c);
        if (*exp) {
            const SystemConfig cfg = resolve_config(c);
            const Experiment e = make_experiment(exp_name, cfg);
            const std::uint64_t n = full ? 10000 : exp_trials.value_or(e.desk_trials);
            std::printf("%s: %s\n", e.name.c_str(), e.description.c_str());
            return cmd_grid(c, "experiment_" + e.name, e.points, e.arms, n,
                            Json{{"experiment", e.name}, {"description", e.description}});
        }
        if (*show) {
            std::printf("%s", to_text(resolve_config(c)).c_str());
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
