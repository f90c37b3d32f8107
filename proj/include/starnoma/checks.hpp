// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "ao.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "harness.hpp"
#include "oracle.hpp"
#include "pairing.hpp"
#include "passive_bf.hpp"
#include "random.hpp"
#include "rates.hpp"
#include "resource_alloc.hpp"
#include "sca.hpp"
#include "schemes.hpp"

namespace starnoma::checks {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

using clock = std::chrono::steady_clock;

inline double seconds_since(clock::time_point t0) { return std::chrono::duration<double>(clock::now() - t0).count(); }

inline std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline double log_uniform(Rng& rng, double lo, double hi) {
    return std::exp(std::log(lo) + uniform01(rng) * (std::log(hi) - std::log(lo)));
}

inline RowCvec random_row(Rng& rng, Eigen::Index n) {
    RowCvec h(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i) = complex_gaussian(rng, 1.0);
    return h;
}

inline Cvec random_vec(Rng& rng, Eigen::Index n, double scale) {
    Cvec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = complex_gaussian(rng, scale * scale);
    return x;
}

/// Mean and standard error of paired differences a - b.
struct Paired {
    double mean = 0.0;
    double se = 0.0;
    int n = 0;
    double z() const { return se > 0.0 ? mean / se : (mean > 0.0 ? std::numeric_limits<double>::infinity() : 0.0); }
};

inline Paired paired(const std::vector<double>& a, const std::vector<double>& b) {
    Paired p;
    p.n = static_cast<int>(std::min(a.size(), b.size()));
    if (p.n == 0) return p;
    double s = 0.0;
    for (int i = 0; i < p.n; ++i) s += a[i] - b[i];
    p.mean = s / p.n;
    double v = 0.0;
    for (int i = 0; i < p.n; ++i) v += (a[i] - b[i] - p.mean) * (a[i] - b[i] - p.mean);
    p.se = p.n > 1 ? std::sqrt(v / (p.n - 1) / p.n) : 0.0;
    return p;
}

/// Per-arm sum-rates of one grid point, in trial order.
inline std::vector<double> column(const std::vector<TrialRecord>& recs, const std::string& point,
                                  const std::string& arm) {
    std::vector<double> out;
    for (const auto& r : recs)
        if (r.point == point && r.arm == arm) out.push_back(r.ok() ? r.sum_rate : 0.0);
    return out;
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace detail

/// Hungarian pairing against exhaustive matching on random instances.
inline CheckResult pairing_oracle(int instances = 200, std::uint64_t seed = 11) {
    const auto t0 = detail::clock::now();
    Rng rng = make_rng(seed, 0, Stream::instance);
    int value_mismatch = 0, count_mismatch = 0, same_matching = 0;
    double worst = 0.0;
    for (int inst = 0; inst < instances; ++inst) {
        const int K = 4 + 2 * (inst % 3);
        const auto n_dim = static_cast<Eigen::Index>(2 + inst % 7);
        std::vector<RowCvec> h;
        std::vector<Side> state;
        for (int k = 0; k < K; ++k) {
            h.push_back(detail::random_row(rng, n_dim) * detail::log_uniform(rng, 0.1, 10.0));
            state.push_back(uniform01(rng) < 0.5 ? Side::reflect : Side::transmit);
        }
        const ClusterPlan plan = plan_clusters(h, state);
        const StrengthSplit split = split_by_strength(channel_strengths(h));
        const Rmat score = build_score_matrix(h, state, split);
        const auto n = split.strong.size();
        oracle::Mask mask(n, std::vector<char>(n, 0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) mask[i][j] = state[split.strong[i]] != state[split.weak[j]];
        const oracle::PairingResult brute = oracle::brute_force_pairing(score, mask);

        std::vector<int> col(n, -1);
        for (const auto& c : plan.clusters) {
            const auto i = std::find(split.strong.begin(), split.strong.end(), c[0]) - split.strong.begin();
            const auto j = std::find(split.weak.begin(), split.weak.end(), c[1]) - split.weak.begin();
            col[static_cast<std::size_t>(i)] = static_cast<int>(j);
        }
        double value = 0.0;
        int allowed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            value += score(static_cast<Eigen::Index>(i), col[i]);
            allowed += mask[i][static_cast<std::size_t>(col[i])] ? 1 : 0;
        }
        if (col == brute.column_of) ++same_matching;
        if (allowed != brute.allowed_pairs) ++count_mismatch;
        const double rel = std::abs(value - brute.value) / std::max(1.0, std::abs(brute.value));
        worst = std::max(worst, rel);
        if (rel > 1e-12) ++value_mismatch;
    }
    const double secs = detail::seconds_since(t0);
    CheckResult r{1, "pairing: Hungarian value equals exhaustive matching", false, {}};
    r.passed = value_mismatch == 0 && count_mismatch == 0 && secs < 10.0;
    r.detail = std::to_string(instances) + " instances, identical matchings " + std::to_string(same_matching) +
               ", value mismatches " + std::to_string(value_mismatch) + ", state-count mismatches " +
               std::to_string(count_mismatch) + detail::fmt(", worst rel diff %.3g", worst) +
               detail::fmt(", %.2f s", secs);
    return r;
}

/// Equal-SINR closed form against a bisection root of the quadratic, and the two
/// SINRs after substitution.
inline CheckResult power_split_oracle(int triples = 100000, std::uint64_t seed = 12) {
    const auto t0 = detail::clock::now();
    Rng rng = make_rng(seed, 1, Stream::instance);
    double worst_root = 0.0, worst_sinr = 0.0;
    for (int n = 0; n < triples; ++n) {
        const double gi = detail::log_uniform(rng, 1e-3, 1e3);
        const double gj = detail::log_uniform(rng, 1e-3, 1e3);
        const double s2 = detail::log_uniform(rng, 1e-3, 1e1);
        const PowerSplit s = power_split_case1(gi, gj, s2);
        const double root = oracle::numeric_root(
            [&](double p) { return p * p * gi * gj + p * s2 * (gi + gj) - s2 * gi; }, 0.0, 1.0, 1e-14);
        worst_root = std::max(worst_root, std::abs(root - s.p_strong));
        const double sinr_i = gi * s.p_weak / (gi * s.p_strong + s2);
        const double sinr_j = gj * s.p_strong / s2;
        worst_sinr = std::max(worst_sinr, std::abs(sinr_i - sinr_j) / std::max(1.0, std::abs(sinr_j)));
    }
    const double secs = detail::seconds_since(t0);
    CheckResult r{2, "power split: closed form equals numeric root", false, {}};
    r.passed = worst_root <= 1e-10 && worst_sinr <= 1e-10 && secs < 30.0;
    r.detail = std::to_string(triples) + " triples" + detail::fmt(", max |p - root| %.3g", worst_root) +
               detail::fmt(", max SINR gap %.3g", worst_sinr) + detail::fmt(", %.2f s", secs);
    return r;
}

/// Every non-strongest cluster meets its targets exactly and every user meets its
/// target, on random feasible allocation instances. A pair whose targets are close
/// enough for the equal-QoS path is served at the larger target.
inline CheckResult qos_exactness(int instances = 500, std::uint64_t seed = 13, double case1_tol = 0.05) {
    Rng rng = make_rng(seed, 2, Stream::instance);
    int feasible = 0, attempts = 0;
    double worst_exact = 0.0, worst_floor = 0.0;
    while (feasible < instances && attempts < 50 * instances) {
        ++attempts;
        const int K = 4 + 2 * (attempts % 3);
        const ClusterPlan plan = random_plan(K, rng);
        std::vector<UserLink> links(static_cast<std::size_t>(K));
        for (auto& l : links) {
            l.gain = detail::log_uniform(rng, 1.0, 1e3);
            l.noise = detail::log_uniform(rng, 0.5, 2.0);
            l.strength = uniform01(rng);
        }
        std::vector<double> qos(static_cast<std::size_t>(K));
        const bool equal = attempts % 2 == 0;
        const double common = 0.05 + 0.5 * uniform01(rng);
        for (auto& q : qos) q = equal ? common : 0.05 + 0.5 * uniform01(rng);
        const ResourcePlan res = allocate_all(plan, links, qos, case1_tol);
        if (!res.feasible) continue;
        ++feasible;
        LinkGains lg;
        for (const auto& l : links) {
            lg.gain.push_back(l.gain);
            lg.noise.push_back(l.noise);
        }
        const RateReport rep = evaluate_gains(plan, res, lg, qos);
        for (int c = 0; c < plan.n_clusters(); ++c) {
            const auto m = members_by_order(plan, c);
            double served = 0.0;
            for (int k : m) served = std::max(served, qos[static_cast<std::size_t>(k)]);
            const bool case1 = m.size() == 2 && served > 0.0 &&
                               std::abs(qos[m[0]] - qos[m[1]]) / served < case1_tol;
            for (int k : m) {
                worst_floor = std::max(worst_floor, -rep.qos_residuals[k]);
                if (c == res.strongest_cluster) continue;
                const double target = case1 ? served : qos[static_cast<std::size_t>(k)];
                worst_exact = std::max(worst_exact, std::abs(rep.per_user_rate[k] - target));
            }
        }
    }
    CheckResult r{3, "QoS exactness on feasible allocations", false, {}};
    r.passed = feasible == instances && worst_exact <= 1e-8 && worst_floor <= 1e-8;
    r.detail = std::to_string(feasible) + " feasible of " + std::to_string(attempts) + " drawn" +
               detail::fmt(", max |R - target| %.3g", worst_exact) +
               detail::fmt(", max shortfall %.3g", std::max(0.0, worst_floor));
    return r;
}

/// Taylor surrogates are tight at the expansion point and never exceed the true
/// functional. Active rows have N_t entries; passive rows are stacked per-element
/// cascades of a synthesized channel.
inline CheckResult sca_bounds(int instances = 20, int points = 10000, std::uint64_t seed = 14) {
    Rng rng = make_rng(seed, 3, Stream::instance);
    SystemConfig cfg;
    double worst_tight = 0.0, worst_viol = -std::numeric_limits<double>::infinity();
    for (int inst = 0; inst < instances; ++inst) {
        const ChannelSet ch = synthesize_trial(cfg, static_cast<std::uint64_t>(inst));
        const int M = ch.n_elements();
        const int k = inst % ch.n_users();
        const bool passive = inst % 2 == 1;
        RowCvec h;
        if (passive) {
            const Cvec e = element_cascade(ch.surface_to_user[k], ch.bs_to_surface,
                                           random_unit_vector(rng, ch.n_antennas()));
            h = RowCvec::Zero(2 * M);
            const Eigen::Index off = ch.user_state[k] == Side::reflect ? 0 : M;
            h.segment(off, M) = e.transpose();
            h /= std::max(h.norm(), 1e-300);
        } else {
            h = detail::random_row(rng, ch.n_antennas());
            h /= h.norm();
        }
        const Cvec xt = detail::random_vec(rng, h.size(), 1.0);
        const double auxt = detail::log_uniform(rng, 0.1, 10.0);
        const QuadraticLowerBound q = taylor_lb_quadratic(h, xt);
        const RatioLowerBound rb = taylor_lb_ratio(h, xt, auxt);
        const double at = std::norm(apply_row(h, xt));
        const double scale_t = std::max(1.0, at / std::min(1.0, auxt));
        worst_tight = std::max(worst_tight, std::abs(q(xt) - at) / std::max(1.0, at));
        worst_tight = std::max(worst_tight, std::abs(rb(xt, auxt) - at / auxt) / scale_t);
        for (int s = 0; s < points; ++s) {
            const double step = detail::log_uniform(rng, 1e-4, 10.0);
            const Cvec x = s % 2 == 0 ? Cvec(xt + detail::random_vec(rng, h.size(), step))
                                      : detail::random_vec(rng, h.size(), step);
            const double aux = auxt * detail::log_uniform(rng, 0.05, 20.0);
            const double val = std::norm(apply_row(h, x));
            const double scale = std::max({1.0, val, at});
            worst_viol = std::max(worst_viol, (q(x) - val) / scale);
            worst_viol = std::max(worst_viol, (rb(x, aux) - val / aux) / std::max(scale / aux, scale_t));
        }
    }
    CheckResult r{4, "SCA surrogates: tight and global lower bounds", false, {}};
    r.passed = worst_tight <= 1e-12 && worst_viol <= 1e-12;
    r.detail = std::to_string(instances) + " instances x " + std::to_string(points) + " points" +
               detail::fmt(", max tightness gap %.3g", worst_tight) +
               detail::fmt(", max bound violation %.3g", std::max(0.0, worst_viol));
    return r;
}

/// Configuration of the tiny joint problem: two antennas, two elements, one
/// two-user cluster, 2-bit codebooks. The noise floor is lowered so that the
/// QoS targets are reachable through a two-element surface.
inline SystemConfig tiny_config() {
    return load_config("N_t = 2\nM = 2\nK = 2\nB1 = 2\nB2 = 2\nsigma2_dBm = -180\nP_max_dBm = 30\nR_min = 0.1\n");
}

inline oracle::TinyInstance tiny_instance(const SystemConfig& cfg, const ChannelSet& ch) {
    oracle::TinyInstance in;
    in.H = ch.bs_to_surface;
    in.g = ch.surface_to_user;
    for (Side s : ch.user_state) in.reflect.push_back(s == Side::reflect);
    in.noise = cfg.noise_power;
    in.power = cfg.tx_power_max;
    in.qos = cfg.qos_min_rates;
    in.phase_bits = cfg.phase_bits;
    in.amplitude_bits = cfg.amplitude_bits;
    return in;
}

/// AO against the exhaustive codebook and beam-grid optimum at tiny scale, both with
/// the decoding order fixed by the pairing stage.
inline CheckResult tiny_optimality(int seeds = 100, double gap = 0.05, double required = 0.95) {
    const SystemConfig base = tiny_config();
    int within = 0, compared = 0, oracle_infeasible = 0;
    double worst = 0.0;
    for (int s = 0; s < seeds; ++s) {
        SystemConfig cfg = base;
        cfg.seed = static_cast<std::uint64_t>(1000 + s);
        const ChannelSet ch = synthesize_trial(cfg, 0);
        const SchemeResult ao = run_hnoma_star(cfg, ch);
        oracle::TinyInstance in = tiny_instance(cfg, ch);
        in.first_decoded = members_by_order(ao.plan, 0).front();
        const oracle::TinyOptimum best = oracle::tiny_joint_optimum(in);
        if (!std::isfinite(best.value)) {
            ++oracle_infeasible;
            if (!ao.qos_feasible) ++within;
            continue;
        }
        ++compared;
        const double rel = (best.value - ao.sum_rate) / best.value;
        worst = std::max(worst, rel);
        if (ao.qos_feasible && rel <= gap) ++within;
    }
    CheckResult r{5, "tiny-scale AO within 5% of the exhaustive optimum", false, {}};
    r.passed = within >= static_cast<int>(std::ceil(required * seeds));
    r.detail = std::to_string(within) + "/" + std::to_string(seeds) + " seeds within 5%, " +
               std::to_string(oracle_infeasible) + " infeasible for both" + detail::fmt(", worst shortfall %.3g", worst);
    return r;
}

/// Iterations to the threshold at the default scenario, and dips bounded by the
/// measured quantization gap.
inline CheckResult convergence(int seeds = 100, int max_iterations = 25, double required = 0.9) {
    int fast = 0, monotone = 0;
    double mean_it = 0.0;
    for (int s = 0; s < seeds; ++s) {
        SystemConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(s + 1);
        const ChannelSet ch = synthesize_trial(cfg, 0);
        const AoTrace tr = run_ao(cfg, ch, {});
        mean_it += tr.iterations_run();
        if (tr.status == AoStatus::converged && tr.iterations_run() < max_iterations) ++fast;
        bool ok = true;
        double prev = tr.initial_sum_rate;
        for (const auto& it : tr.iterations) {
            if (it.sum_rate < prev - it.quantization_gap - 1e-9) ok = false;
            prev = it.sum_rate;
        }
        if (ok) ++monotone;
    }
    CheckResult r{6, "AO convergence under 25 iterations, quasi-monotone trace", false, {}};
    r.passed = fast >= static_cast<int>(std::ceil(required * seeds)) && monotone == seeds;
    r.detail = std::to_string(fast) + "/" + std::to_string(seeds) + " converged in < " +
               std::to_string(max_iterations) + detail::fmt(" (mean %.2f iterations), ", mean_it / seeds) +
               std::to_string(monotone) + "/" + std::to_string(seeds) + " quasi-monotone";
    return r;
}

/// Mean sum-rate chain over the five schemes at each M, with one-sided 95% paired
/// tests, and every scheme nondecreasing in M.
inline CheckResult scheme_ordering(std::uint64_t trials = 200, int jobs = 1) {
    const SystemConfig base;
    const auto points = make_grid(base, {{"M", {16, 36, 64}}});
    const auto recs = run_grid(points, scheme_arms({kAllSchemes.begin(), kAllSchemes.end()}), {trials, jobs, false});
    bool chain = true, monotone = true;
    std::string detail_text;
    std::vector<std::vector<double>> means(kAllSchemes.size());
    for (const auto& p : points) {
        detail_text += p.label + ":";
        for (std::size_t s = 0; s < kAllSchemes.size(); ++s) {
            const auto col = detail::column(recs, p.label, to_string(kAllSchemes[s]));
            means[s].push_back(detail::mean(col));
            detail_text += detail::fmt(" %.4g", means[s].back());
            if (s == 0) continue;
            const auto prev = detail::column(recs, p.label, to_string(kAllSchemes[s - 1]));
            const detail::Paired d = detail::paired(prev, col);
            if (!(d.z() > 1.645)) {
                chain = false;
                detail_text += std::string("(") + to_string(kAllSchemes[s - 1]) + " >= " + to_string(kAllSchemes[s]) +
                               " fails" + detail::fmt(", z=%.2f)", d.z());
            }
        }
        detail_text += "; ";
    }
    for (std::size_t s = 0; s < means.size(); ++s)
        for (std::size_t i = 1; i < means[s].size(); ++i)
            if (means[s][i] < means[s][i - 1]) {
                monotone = false;
                detail_text += std::string(to_string(kAllSchemes[s])) + " decreases in M; ";
            }
    CheckResult r{7, "scheme ordering and monotonicity in M", false, {}};
    r.passed = chain && monotone;
    r.detail = "means in order hnoma_star noma_star oma_star hnoma_ris rand_star over " + std::to_string(trials) +
               " seeds; " + detail_text + (monotone ? "all nondecreasing in M" : "");
    return r;
}

/// Beams-only optimization with random pairing and random power/time against the
/// fully optimized design.
inline CheckResult ablation_ratio(std::uint64_t trials = 100, int jobs = 1) {
    const SystemConfig base;
    const auto points = make_grid(base, {{"M", {16, 36}}, {"P_max_dBm", {25}}});
    const std::vector<Arm> arms = {ablation_arm("full", true, true, true), ablation_arm("beams_only", true, false, false)};
    const auto recs = run_grid(points, arms, {trials, jobs, false});
    bool ok = true;
    std::string text;
    for (const auto& p : points) {
        const double full = detail::mean(detail::column(recs, p.label, "full"));
        const double part = detail::mean(detail::column(recs, p.label, "beams_only"));
        const double ratio = full > 0.0 ? part / full : 0.0;
        if (!(ratio >= 0.7 && ratio <= 0.9)) ok = false;
        text += p.label + detail::fmt(": full %.4g", full) + detail::fmt(", beams only %.4g", part) +
                detail::fmt(", ratio %.3f; ", ratio);
    }
    CheckResult r{8, "beams-only optimization recovers 70-90% of the full sum-rate", ok, {}};
    r.detail = std::to_string(trials) + " seeds; " + text;
    return r;
}

/// Proposed pairing against random pairing, both with optimized beams.
inline CheckResult pairing_gain(std::uint64_t trials = 100, int jobs = 1) {
    const SystemConfig base;
    const auto points = make_grid(base, {{"C", {4, 6, 8}}});
    Arm opt{"algorithm1", Scheme::hnoma_star, {}, {}};
    Arm rnd{"random_pairing", Scheme::hnoma_star, {}, {}};
    rnd.opt.pairing = PairingMode::random;
    const auto recs = run_grid(points, {opt, rnd}, {trials, jobs, false});
    bool ok = true;
    std::string text;
    for (const auto& p : points) {
        const auto a = detail::column(recs, p.label, "algorithm1");
        const auto b = detail::column(recs, p.label, "random_pairing");
        const detail::Paired d = detail::paired(a, b);
        if (!(d.mean > 0.0 && d.mean >= 0.05 && d.mean <= 0.6)) ok = false;
        text += p.label + detail::fmt(": gain %.4g", d.mean) + detail::fmt(" +- %.3g bps/Hz; ", 1.96 * d.se);
    }
    CheckResult r{9, "pairing gain positive and within 0.05-0.6 bps/Hz", ok, {}};
    r.detail = std::to_string(trials) + " seeds; " + text;
    return r;
}

/// The oracle suite run by `oracle-check`.
inline std::vector<CheckResult> oracle_suite() {
    return {pairing_oracle(), power_split_oracle(), qos_exactness(), sca_bounds(), tiny_optimality()};
}

inline std::string format(const CheckResult& r) {
    return std::string(r.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + ": " + r.name + " | " +
           r.detail;
}

} // namespace starnoma::checks
