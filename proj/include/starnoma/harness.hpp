// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "ao.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "schemes.hpp"
#include "serialize.hpp"

namespace starnoma {

struct TrialRecord {
    std::string point;   // grid point, e.g. "M=16;P_max_dBm=30"
    std::string arm;     // scheme or ablation arm label
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    double sum_rate = std::numeric_limits<double>::quiet_NaN();
    double initial_sum_rate = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
    bool qos_feasible = false;
    int unserved_users = 0;
    double min_qos_residual = std::numeric_limits<double>::quiet_NaN();
    double metric = std::numeric_limits<double>::quiet_NaN(); // experiment-specific value
    double wall_seconds = 0.0;
    std::string error;

    bool ok() const { return error.empty() && std::isfinite(sum_rate); }
};

/// Everything one arm needs to produce a record from a config and trial index.
struct Arm {
    std::string label;
    Scheme scheme = Scheme::hnoma_star;
    AoOptions opt{};
    /// Replaces the scheme run when set.
    std::function<TrialRecord(const SystemConfig&, std::uint64_t)> custom;
};

struct GridPoint {
    std::string label;
    SystemConfig cfg;
    std::optional<double> reflect_amplitude; // pinned ES share for every arm at this point
    std::optional<double> weak_power;        // pinned power split for every arm at this point
};

struct RunOptions {
    std::uint64_t trials = 10;
    int jobs = 1;
    bool timing = false;
};

/// Parameter names accepted by `sweep`.
inline const std::vector<std::string>& sweep_params() {
    static const std::vector<std::string> p = {"M", "P_max_dBm", "C", "R_min", "ES", "N_t", "B1", "B2"};
    return p;
}

inline std::string point_label(const std::string& param, double value) { return param + "=" + num(value); }

/// Applies one sweep parameter; ES is the reflect/transmit amplitude ratio.
inline GridPoint apply_param(GridPoint p, const std::string& param, double value) {
    SystemConfig& c = p.cfg;
    auto as_int = [&](double v) {
        if (v != std::floor(v) || v < 1) throw InvalidArgument(param + " must be a positive integer");
        return static_cast<int>(v);
    };
    if (param == "M") {
        c.n_surface_elements = as_int(value);
        c.surface_rows = detail::squarest_divisor(c.n_surface_elements);
        c.surface_cols = c.n_surface_elements / c.surface_rows;
    } else if (param == "N_t") {
        c.n_tx_antennas = as_int(value);
        c.n_tx_rows = detail::squarest_divisor(c.n_tx_antennas);
        c.n_tx_cols = c.n_tx_antennas / c.n_tx_rows;
    } else if (param == "P_max_dBm") {
        c.tx_power_max = dbm_to_watts(value);
    } else if (param == "C") {
        c.n_clusters = as_int(value);
        c.n_users = 2 * c.n_clusters;
        const double r = c.qos_min_rates.empty() ? 0.1 : c.qos_min_rates.front();
        c.qos_min_rates.assign(static_cast<std::size_t>(c.n_users), r);
    } else if (param == "R_min") {
        if (!(value >= 0.0)) throw InvalidArgument("R_min must be >= 0");
        c.qos_min_rates.assign(static_cast<std::size_t>(c.n_users), value);
    } else if (param == "ES") {
        if (!(value > 0.0)) throw InvalidArgument("ES ratio must be > 0");
        p.reflect_amplitude = value / (1.0 + value);
    } else if (param == "B1") {
        c.phase_bits = as_int(value);
    } else if (param == "B2") {
        c.amplitude_bits = as_int(value);
    } else if (param == "p_weak") {
        if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("p_weak must be in [0, 1]");
        p.weak_power = value;
    } else {
        throw InvalidArgument("unknown sweep parameter: " + param);
    }
    validate(c);
    p.label = p.label.empty() ? point_label(param, value) : p.label + ";" + point_label(param, value);
    return p;
}

/// Cartesian product of parameter grids, in the order given.
inline std::vector<GridPoint> make_grid(const SystemConfig& base,
                                        const std::vector<std::pair<std::string, std::vector<double>>>& axes) {
    std::vector<GridPoint> pts{GridPoint{"", base, std::nullopt, std::nullopt}};
    for (const auto& [param, values] : axes) {
        std::vector<GridPoint> next;
        for (const auto& p : pts)
            for (double v : values) next.push_back(apply_param(p, param, v));
        pts = std::move(next);
    }
    if (pts.size() == 1 && pts.front().label.empty()) pts.front().label = "base";
    return pts;
}

namespace detail {

inline TrialRecord base_record(const GridPoint& pt, const Arm& arm, std::uint64_t trial) {
    TrialRecord r;
    r.point = pt.label;
    r.arm = arm.label;
    r.trial = trial;
    r.seed = pt.cfg.seed;
    r.config_hash = hex64(config_hash(pt.cfg));
    return r;
}

inline void fill_from(TrialRecord& r, const SchemeResult& s) {
    r.sum_rate = s.sum_rate;
    r.initial_sum_rate = s.initial_sum_rate;
    r.iterations = s.iterations;
    r.converged = s.converged;
    r.qos_feasible = s.qos_feasible;
    r.unserved_users = s.unserved_users;
    r.min_qos_residual = s.report.qos_residuals.empty()
                             ? 0.0
                             : *std::min_element(s.report.qos_residuals.begin(), s.report.qos_residuals.end());
}

/// All arms on one shared channel realization.
inline std::vector<TrialRecord> run_point_trial(const GridPoint& pt, const std::vector<Arm>& arms, std::uint64_t trial,
                                                bool timing) {
    std::vector<TrialRecord> out;
    const ChannelSet ch = synthesize_trial(pt.cfg, trial);
    for (const auto& arm : arms) {
        const auto t0 = std::chrono::steady_clock::now();
        TrialRecord r = base_record(pt, arm, trial);
        try {
            if (arm.custom) {
                const TrialRecord c = arm.custom(pt.cfg, trial);
                r.sum_rate = c.sum_rate;
                r.initial_sum_rate = c.initial_sum_rate;
                r.iterations = c.iterations;
                r.converged = c.converged;
                r.qos_feasible = c.qos_feasible;
                r.unserved_users = c.unserved_users;
                r.min_qos_residual = c.min_qos_residual;
                r.metric = c.metric;
            } else {
                AoOptions opt = arm.opt;
                opt.trial = trial;
                if (pt.reflect_amplitude) opt.fixed_reflect_amplitude = pt.reflect_amplitude;
                if (pt.weak_power) {
                    opt.allocation = AllocationMode::fixed_split;
                    opt.fixed_weak_power = *pt.weak_power;
                }
                fill_from(r, run_scheme(arm.scheme, pt.cfg, ch, opt));
            }
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        if (timing) r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace detail

/// Runs every (point, trial) pair on a bounded worker pool. Results are placed by
/// index, so the returned order (point, trial, arm) is independent of `jobs`.
inline std::vector<TrialRecord> run_grid(const std::vector<GridPoint>& points, const std::vector<Arm>& arms,
                                         const RunOptions& ro) {
    const std::size_t n_tasks = points.size() * ro.trials;
    std::vector<std::vector<TrialRecord>> slots(n_tasks);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            const auto& pt = points[i / ro.trials];
            slots[i] = detail::run_point_trial(pt, arms, i % ro.trials, ro.timing);
        }
    };
    int jobs = ro.jobs > 0 ? ro.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(1, n_tasks)));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::vector<TrialRecord> out;
    for (auto& s : slots)
        for (auto& r : s) out.push_back(std::move(r));
    return out;
}

struct SummaryRow {
    std::string point;
    std::string arm;
    int n = 0;        // trials with a finite result
    int failed = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double ci95 = 0.0; // half-width, normal approximation
    double mean_iterations = 0.0;
    double converged_fraction = 0.0;
    double feasible_fraction = 0.0;
    double mean_metric = std::numeric_limits<double>::quiet_NaN();
};

/// Aggregates in record order; groups keep their first-appearance order.
inline std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& recs) {
    std::vector<SummaryRow> rows;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::vector<std::vector<const TrialRecord*>> groups;
    for (const auto& r : recs) {
        const auto key = std::make_pair(r.point, r.arm);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, rows.size()).first;
            rows.push_back(SummaryRow{r.point, r.arm});
            groups.emplace_back();
        }
        groups[it->second].push_back(&r);
    }
    for (std::size_t g = 0; g < rows.size(); ++g) {
        SummaryRow& s = rows[g];
        double sum = 0.0, sq = 0.0, it = 0.0, conv = 0.0, feas = 0.0, met = 0.0;
        int n_met = 0;
        for (const TrialRecord* r : groups[g]) {
            if (!r->ok()) {
                ++s.failed;
                continue;
            }
            ++s.n;
            sum += r->sum_rate;
            sq += r->sum_rate * r->sum_rate;
            it += r->iterations;
            conv += r->converged ? 1.0 : 0.0;
            feas += r->qos_feasible ? 1.0 : 0.0;
            if (std::isfinite(r->metric)) {
                met += r->metric;
                ++n_met;
            }
        }
        if (s.n > 0) {
            s.mean = sum / s.n;
            s.stddev = s.n > 1 ? std::sqrt(std::max(0.0, (sq - s.n * s.mean * s.mean) / (s.n - 1))) : 0.0;
            s.ci95 = 1.96 * s.stddev / std::sqrt(static_cast<double>(s.n));
            s.mean_iterations = it / s.n;
            s.converged_fraction = conv / s.n;
            s.feasible_fraction = feas / s.n;
        }
        if (n_met > 0) s.mean_metric = met / n_met;
    }
    return rows;
}

inline std::string records_csv(const std::vector<TrialRecord>& recs, bool timing) {
    std::string out = "point,arm,trial,seed,config_hash,sum_rate,initial_sum_rate,iterations,converged,qos_feasible,"
                      "unserved_users,min_qos_residual,metric,error";
    if (timing) out += ",wall_seconds";
    out += "\n";
    for (const auto& r : recs) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out += r.point + "," + r.arm + "," + std::to_string(r.trial) + "," + std::to_string(r.seed) + "," +
               r.config_hash + "," + num(r.sum_rate) + "," + num(r.initial_sum_rate) + "," +
               std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," + (r.qos_feasible ? "1" : "0") +
               "," + std::to_string(r.unserved_users) + "," + num(r.min_qos_residual) + "," + num(r.metric) + "," + err;
        if (timing) out += "," + num(r.wall_seconds);
        out += "\n";
    }
    return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "point,arm,n,failed,mean,stddev,ci95,mean_iterations,converged_fraction,feasible_fraction,"
                      "mean_metric\n";
    for (const auto& s : rows)
        out += s.point + "," + s.arm + "," + std::to_string(s.n) + "," + std::to_string(s.failed) + "," + num(s.mean) +
               "," + num(s.stddev) + "," + num(s.ci95) + "," + num(s.mean_iterations) + "," +
               num(s.converged_fraction) + "," + num(s.feasible_fraction) + "," + num(s.mean_metric) + "\n";
    return out;
}

inline Json summary_json(const std::vector<SummaryRow>& rows) {
    Json a = Json::array();
    for (const auto& s : rows) {
        Json j{{"point", s.point},
               {"arm", s.arm},
               {"n", s.n},
               {"failed", s.failed},
               {"mean", s.mean},
               {"stddev", s.stddev},
               {"ci95", s.ci95},
               {"mean_iterations", s.mean_iterations},
               {"converged_fraction", s.converged_fraction},
               {"feasible_fraction", s.feasible_fraction}};
        if (std::isfinite(s.mean_metric)) j["mean_metric"] = s.mean_metric;
        a.push_back(j);
    }
    return a;
}

inline std::vector<Arm> scheme_arms(const std::vector<Scheme>& schemes) {
    std::vector<Arm> arms;
    for (Scheme s : schemes) arms.push_back(Arm{to_string(s), s, {}, {}});
    return arms;
}

/// Largest C in [1, c_max] whose QoS targets the proposed scheme meets exactly.
/// Each C uses its own channel realization with K = 2C users.
inline TrialRecord clusters_supported(const SystemConfig& base, std::uint64_t trial, int c_max, const AoOptions& opt) {
    TrialRecord r;
    int best = 0;
    for (int C = 1; C <= c_max; ++C) {
        GridPoint p{"", base, std::nullopt, std::nullopt};
        p = apply_param(p, "C", C);
        const ChannelSet ch = synthesize_trial(p.cfg, trial);
        AoOptions o = opt;
        o.trial = trial;
        const SchemeResult s = run_hnoma_star(p.cfg, ch, o);
        if (s.qos_feasible) best = C;
        if (C == c_max || !s.qos_feasible) {
            detail::fill_from(r, s);
            break;
        }
    }
    r.metric = best;
    return r;
}

struct Experiment {
    std::string name;
    std::string description;
    std::vector<GridPoint> points;
    std::vector<Arm> arms;
    std::uint64_t desk_trials = 100;
};

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> n = {"convergence",           "scheme_vs_M",      "pairing_gain_vs_C",
                                               "clusters_vs_qos",       "contribution_ablation",
                                               "es_ratio_contour",      "sr_vs_M_vs_Nt"};
    return n;
}

/// Arm that optimizes w and u only, with random pairing and random power/time.
inline Arm ablation_arm(const std::string& label, bool opt_beams, bool opt_alloc, bool opt_pairing) {
    Arm a{label, Scheme::hnoma_star, {}, {}};
    a.opt.optimize_active = opt_beams;
    a.opt.optimize_passive = opt_beams;
    a.opt.random_init = !opt_beams;
    a.opt.allocation = opt_alloc ? AllocationMode::optimized : AllocationMode::random;
    a.opt.pairing = opt_pairing ? PairingMode::algorithm1 : PairingMode::random;
    return a;
}

inline Experiment make_experiment(const std::string& name, const SystemConfig& base) {
    Experiment e;
    e.name = name;
    if (name == "convergence") {
        e.description = "AO iterations to the threshold and final sum-rate";
        e.points = make_grid(base, {{"M", {16, 36}}, {"P_max_dBm", {20, 30}}});
        e.arms = scheme_arms({Scheme::hnoma_star});
    } else if (name == "scheme_vs_M") {
        e.description = "sum-rate of every scheme against the number of surface elements";
        e.points = make_grid(base, {{"M", {16, 36, 64}}});
        e.arms = scheme_arms({kAllSchemes.begin(), kAllSchemes.end()});
        e.desk_trials = 50;
    } else if (name == "pairing_gain_vs_C") {
        e.description = "proposed pairing against random pairing, both with optimized beams";
        e.points = make_grid(base, {{"C", {4, 6, 8}}});
        Arm opt{"algorithm1", Scheme::hnoma_star, {}, {}};
        Arm rnd{"random_pairing", Scheme::hnoma_star, {}, {}};
        rnd.opt.pairing = PairingMode::random;
        e.arms = {opt, rnd};
        e.desk_trials = 50;
    } else if (name == "clusters_vs_qos") {
        e.description = "largest number of clusters served at the QoS target (metric column)";
        e.points = make_grid(base, {{"R_min", {0.01, 0.05, 0.1, 0.2}}});
        AoOptions rnd;
        rnd.optimize_active = rnd.optimize_passive = false;
        rnd.random_init = true;
        Arm a{"optimized", Scheme::hnoma_star, {}, [](const SystemConfig& c, std::uint64_t t) {
                  return clusters_supported(c, t, 8, {});
              }};
        Arm b{"random_beams", Scheme::hnoma_star, {}, [rnd](const SystemConfig& c, std::uint64_t t) {
                  return clusters_supported(c, t, 8, rnd);
              }};
        e.arms = {a, b};
        e.desk_trials = 20;
    } else if (name == "contribution_ablation") {
        e.description = "each design block toggled between random and optimized";
        e.points = make_grid(base, {{"M", {16, 36}}, {"P_max_dBm", {25}}});
        e.arms = {ablation_arm("full", true, true, true), ablation_arm("beams_only", true, false, false),
                  ablation_arm("allocation_only", false, true, false), ablation_arm("pairing_only", false, false, true),
                  ablation_arm("none", false, false, false)};
        e.desk_trials = 50;
    } else if (name == "es_ratio_contour") {
        e.description = "sum-rate over reflect/transmit amplitude ratio and weak-user power share";
        SystemConfig c = base;
        GridPoint p{"", c, std::nullopt, std::nullopt};
        p = apply_param(p, "C", 1);
        p = apply_param(p, "P_max_dBm", 25);
        p.label.clear();
        e.points.clear();
        for (double es : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0})
            for (double pw : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                GridPoint q = apply_param(apply_param(p, "ES", es), "p_weak", pw);
                e.points.push_back(q);
            }
        e.arms = scheme_arms({Scheme::hnoma_star});
        e.desk_trials = 20;
    } else if (name == "sr_vs_M_vs_Nt") {
        e.description = "sum-rate over surface size and antenna count at two power levels";
        e.points = make_grid(base, {{"P_max_dBm", {20, 30}}, {"M", {16, 36}}, {"N_t", {4, 16}}});
        e.arms = scheme_arms({Scheme::hnoma_star});
        e.desk_trials = 30;
    } else {
        throw InvalidArgument("unknown experiment: " + name);
    }
    return e;
}

} // namespace starnoma
