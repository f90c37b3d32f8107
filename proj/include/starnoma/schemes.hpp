// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ao.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "pairing.hpp"
#include "passive_bf.hpp"
#include "random.hpp"
#include "rates.hpp"
#include "state.hpp"

namespace starnoma {

enum class Scheme : std::uint8_t { hnoma_star, noma_star, oma_star, hnoma_ris, rand_star };

inline constexpr std::array<Scheme, 5> kAllSchemes = {Scheme::hnoma_star, Scheme::noma_star, Scheme::oma_star,
                                                      Scheme::hnoma_ris, Scheme::rand_star};

inline const char* to_string(Scheme s) {
    switch (s) {
    case Scheme::hnoma_star: return "hnoma_star";
    case Scheme::noma_star: return "noma_star";
    case Scheme::oma_star: return "oma_star";
    case Scheme::hnoma_ris: return "hnoma_ris";
    case Scheme::rand_star: return "rand_star";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view name) {
    for (Scheme s : kAllSchemes)
        if (name == to_string(s)) return s;
    throw InvalidArgument("unknown scheme: " + std::string(name));
}

struct SchemeResult {
    Scheme scheme = Scheme::hnoma_star;
    RateReport report;
    ClusterPlan plan;
    ResourcePlan resources;
    double sum_rate = 0.0;
    double initial_sum_rate = 0.0;
    int iterations = 0;
    bool converged = false;
    bool qos_feasible = true;
    int unserved_users = 0;            // users below their QoS target
    std::vector<double> inter_cluster; // per-user interference power (simultaneous scheme only)
    std::vector<std::string> diagnostics;
};

/// Penetration loss added to transmit-side users of the reflection-only baseline, in dB.
inline constexpr double kPenetrationLossDb = 20.0;

namespace detail {

inline int count_unserved(const RateReport& r, double tol = 1e-6) {
    int n = 0;
    for (double v : r.qos_residuals)
        if (v < -tol) ++n;
    return n;
}

inline SchemeResult from_trace(Scheme s, const AoTrace& tr) {
    SchemeResult out;
    out.scheme = s;
    out.report = tr.report;
    out.plan = tr.plan;
    out.resources = tr.resources;
    out.sum_rate = tr.sum_rate;
    out.initial_sum_rate = tr.initial_sum_rate;
    out.iterations = tr.iterations_run();
    out.converged = tr.status == AoStatus::converged;
    out.qos_feasible = tr.resources.feasible;
    out.unserved_users = count_unserved(tr.report);
    out.diagnostics = tr.diagnostics;
    return out;
}

} // namespace detail

/// Channels and AO options that turn the shared AO into one of the four
/// optimized schemes.
inline void prepare_scheme(Scheme s, const SystemConfig& cfg, ChannelSet& ch, AoOptions& opt) {
    switch (s) {
    case Scheme::hnoma_star: break;
    case Scheme::oma_star:
        // one user per sub-slot, full power, remaining time to the strongest user
        opt.pairing = PairingMode::singleton;
        opt.simultaneous = false;
        break;
    case Scheme::noma_star:
        // all clusters in the full frame with one shared profile
        opt.pairing = PairingMode::random_order;
        opt.simultaneous = true;
        break;
    case Scheme::hnoma_ris:
        // reflect amplitude one codebook step below 1, transmit-side users behind a penetration loss
        for (int k = 0; k < ch.n_users(); ++k)
            if (ch.user_state[static_cast<std::size_t>(k)] == Side::transmit) attenuate_user(ch, k, kPenetrationLossDb);
        opt.fixed_reflect_amplitude = 1.0 - 1.0 / ((1 << cfg.amplitude_bits) - 1);
        break;
    case Scheme::rand_star: throw InvalidArgument("prepare_scheme: rand_star does not use the AO");
    }
}

struct TracedScheme {
    SchemeResult result;
    AoTrace trace;
};

/// Runs an AO-based scheme and keeps its iteration trace.
inline TracedScheme run_scheme_traced(Scheme s, const SystemConfig& cfg, const ChannelSet& ch, AoOptions opt = {}) {
    ChannelSet used = ch;
    prepare_scheme(s, cfg, used, opt);
    TracedScheme out;
    out.trace = run_ao(cfg, used, opt);
    out.result = detail::from_trace(s, out.trace);
    if (s == Scheme::noma_star) {
        const auto links = detail::user_links(used, out.trace.plan, out.trace.beams, cfg.noise_power, true);
        for (const auto& l : links) out.result.inter_cluster.push_back(l.noise - cfg.noise_power);
    }
    return out;
}

inline SchemeResult run_hnoma_star(const SystemConfig& cfg, const ChannelSet& ch, AoOptions opt = {}) {
    return run_scheme_traced(Scheme::hnoma_star, cfg, ch, opt).result;
}

inline SchemeResult run_oma_star(const SystemConfig& cfg, const ChannelSet& ch, AoOptions opt = {}) {
    return run_scheme_traced(Scheme::oma_star, cfg, ch, opt).result;
}

inline SchemeResult run_noma_star(const SystemConfig& cfg, const ChannelSet& ch, AoOptions opt = {}) {
    return run_scheme_traced(Scheme::noma_star, cfg, ch, opt).result;
}

inline SchemeResult run_hnoma_ris(const SystemConfig& cfg, const ChannelSet& ch, AoOptions opt = {}) {
    return run_scheme_traced(Scheme::hnoma_ris, cfg, ch, opt).result;
}

/// Every design variable drawn at random from its feasible set.
inline SchemeResult run_rand_star(const SystemConfig& cfg, const ChannelSet& ch, std::uint64_t trial = 0) {
    Rng rng = make_rng(cfg.seed, trial, Stream::scheme);
    const int K = ch.n_users();
    const ClusterPlan plan = random_plan(K, rng);
    const BeamState b = random_beams(ch, plan, cfg.tx_power_max, cfg.phase_bits, cfg.amplitude_bits, rng);
    const ResourcePlan res = random_resources(plan, K, rng);
    SchemeResult out;
    out.scheme = Scheme::rand_star;
    out.plan = plan;
    out.resources = res;
    out.report = evaluate(ch, plan, b, res, cfg.qos_min_rates, cfg.noise_power);
    out.sum_rate = out.report.sum_rate;
    out.initial_sum_rate = out.sum_rate;
    out.unserved_users = detail::count_unserved(out.report);
    out.qos_feasible = out.unserved_users == 0;
    return out;
}

inline SchemeResult run_scheme(Scheme s, const SystemConfig& cfg, const ChannelSet& ch, AoOptions opt = {}) {
    switch (s) {
    case Scheme::hnoma_star: return run_hnoma_star(cfg, ch, opt);
    case Scheme::noma_star: return run_noma_star(cfg, ch, opt);
    case Scheme::oma_star: return run_oma_star(cfg, ch, opt);
    case Scheme::hnoma_ris: return run_hnoma_ris(cfg, ch, opt);
    case Scheme::rand_star: return run_rand_star(cfg, ch, opt.trial);
    }
    throw InvalidArgument("run_scheme: unknown scheme");
}

} // namespace starnoma
