// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "core.hpp"
#include "pairing.hpp"
#include "state.hpp"

namespace starnoma {

// All functions take link gains g = |h w|^2 together with a noise level; only
// the ratio g / noise matters.

struct PowerSplit {
    double p_weak = 0.0;   // p_i, decoded first
    double p_strong = 0.0; // p_j, decoded last
};

/// Equal-SINR split: positive root of p^2 g_i g_j + p s2 (g_i + g_j) = s2 g_i.
inline PowerSplit power_split_case1(double g_weak, double g_strong, double noise) {
    if (!(g_weak >= 0.0) || !(g_strong >= 0.0) || !(noise > 0.0))
        throw InvalidArgument("power_split_case1: gains must be >= 0 and noise > 0");
    const double b = noise * (g_weak + g_strong);
    const double disc = b * b + 4.0 * noise * g_strong * g_weak * g_weak;
    const double den = b + std::sqrt(disc);
    const double pj = den > 0.0 ? 2.0 * noise * g_weak / den : 0.0;
    return {1.0 - pj, pj};
}

/// Time that brings the strong user to exactly `rate` with power p_j.
inline double time_slot_case1(double p_strong, double g_strong, double noise, double rate) {
    const double cap = log2p1(g_strong * p_strong / noise);
    if (rate == 0.0) return 0.0;
    if (!(cap > 0.0)) throw InfeasibleQos("time_slot_case1: zero rate denominator");
    return rate / cap;
}

/// The time slot written directly in terms of the two gains (equal-QoS closed form).
inline double time_slot_case1_closed_form(double g_weak, double g_strong, double noise, double rate) {
    const double s = std::sqrt(noise);
    const double sum = g_weak + g_strong;
    const double root = std::sqrt(noise * sum * sum + 4.0 * g_strong * g_weak * g_weak);
    const double snr = (-s * sum + root) / (2.0 * s * g_weak);
    if (!(snr > 0.0)) throw InfeasibleQos("time_slot_case1_closed_form: zero rate denominator");
    return rate / log2p1(snr);
}

struct ClusterAllocation {
    double p_weak = 0.0;
    double p_strong = 0.0;
    double time = 0.0;
};

/// Solves t log2(1 + g_i p_i/(g_i p_j + s2)) = R_i and t log2(1 + g_j p_j/s2) = R_j with
/// p_i + p_j = 1 by bisection on p_j.
inline ClusterAllocation allocate_case2(double g_weak, double g_strong, double noise, double r_weak, double r_strong) {
    if (!(noise > 0.0) || r_weak < 0.0 || r_strong < 0.0) throw InvalidArgument("allocate_case2: bad arguments");
    if (r_weak == 0.0 && r_strong == 0.0) return {0.0, 1.0, 0.0};
    if (r_strong == 0.0) {
        if (!(g_weak > 0.0)) throw InfeasibleQos("allocate_case2: weak user has no channel");
        return {1.0, 0.0, r_weak / log2p1(g_weak / noise)};
    }
    if (!(g_strong > 0.0)) throw InfeasibleQos("allocate_case2: strong user has no channel");
    if (r_weak == 0.0) return {0.0, 1.0, r_strong / log2p1(g_strong / noise)};
    if (!(g_weak > 0.0)) throw InfeasibleQos("allocate_case2: weak user has no channel");

    auto time_of = [&](double pj) { return r_strong / log2p1(g_strong * pj / noise); };
    auto excess = [&](double pj) {
        const double sinr_i = g_weak * (1.0 - pj) / (g_weak * pj + noise);
        return time_of(pj) * log2p1(sinr_i) - r_weak;
    };
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (excess(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    const double pj = (std::abs(excess(lo)) < std::abs(excess(hi)) && lo > 0.0) ? lo : hi;
    return {1.0 - pj, pj, time_of(pj)};
}

/// Power recursion for the cluster that absorbs the remaining frame time.
/// gains/noise/rates are ordered by decoding order ascending; the last user takes the remainder.
inline std::vector<double> power_recursion_last_cluster(const std::vector<double>& gains, const std::vector<double>& noise,
                                                        const std::vector<double>& rates, double t) {
    const std::size_t n = gains.size();
    if (n == 0) return {};
    if (!(t > 0.0)) throw InfeasibleQos("power recursion: no time left for the last cluster");
    std::vector<double> p(n, 0.0);
    double used = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double frac = 1.0 - std::exp2(-rates[k] / t);
        double pk = 0.0;
        if (frac > 0.0) {
            if (!(gains[k] > 0.0)) throw InfeasibleQos("power recursion: user without channel");
            pk = frac * (1.0 + noise[k] / gains[k] - used);
        }
        if (!(pk >= 0.0 && pk <= 1.0 - used + 1e-15)) throw InfeasibleQos("power recursion: coefficient outside [0,1]");
        p[k] = std::clamp(pk, 0.0, 1.0);
        used += p[k];
    }
    p[n - 1] = std::max(0.0, 1.0 - used);
    return p;
}

/// Inputs to allocate_all for one user.
struct UserLink {
    double gain = 0.0;     // |h_k w_c|^2
    double noise = 1.0;    // noise plus any interference held fixed
    double strength = 0.0; // ||h_k||^2, used to pick the cluster that takes the remaining time
};

namespace detail {

/// QoS-exact allocation of one cluster (1 or 2 users) at the given targets.
inline ClusterAllocation exact_cluster(const std::vector<int>& m, const std::vector<UserLink>& link,
                                       const std::vector<double>& rate, double case1_tol) {
    if (m.size() == 1) {
        const int k = m[0];
        const double r = rate[k];
        if (r == 0.0) return {0.0, 1.0, 0.0};
        const double cap = log2p1(link[k].gain / link[k].noise);
        if (!(cap > 0.0)) throw InfeasibleQos("user without channel");
        return {0.0, 1.0, r / cap};
    }
    const int i = m[0];
    const int j = m[1];
    // Normalize both users to unit noise.
    const double gi = link[i].gain / link[i].noise;
    const double gj = link[j].gain / link[j].noise;
    const double ri = rate[i];
    const double rj = rate[j];
    const double top = std::max(ri, rj);
    if (top > 0.0 && std::abs(ri - rj) / top < case1_tol && ri > 0.0 && rj > 0.0) {
        const PowerSplit s = power_split_case1(gi, gj, 1.0);
        return {s.p_weak, s.p_strong, time_slot_case1(s.p_strong, gj, 1.0, top)};
    }
    return allocate_case2(gi, gj, 1.0, ri, rj);
}

inline void write_cluster(ResourcePlan& out, const std::vector<int>& m, const ClusterAllocation& a) {
    if (m.size() == 1) {
        out.power[static_cast<std::size_t>(m[0])] = 1.0;
    } else {
        out.power[static_cast<std::size_t>(m[0])] = a.p_weak;
        out.power[static_cast<std::size_t>(m[1])] = a.p_strong;
    }
}

} // namespace detail

/// Cluster with the largest aggregate channel strength; ties go to the lower index.
inline int strongest_cluster(const ClusterPlan& plan, const std::vector<UserLink>& link) {
    int best = 0;
    double best_v = -1.0;
    for (int c = 0; c < plan.n_clusters(); ++c) {
        double v = 0.0;
        for (int k : plan.clusters[static_cast<std::size_t>(c)])
            if (k >= 0) v += link[static_cast<std::size_t>(k)].strength;
        if (v > best_v) {
            best_v = v;
            best = c;
        }
    }
    return best;
}

/// Joint power/time allocation: every cluster except the strongest is served at
/// exactly its QoS targets; the strongest takes the remaining time with the
/// power recursion. When that is impossible, all targets are scaled by one
/// common factor so that every cluster is exactly served within the frame,
/// and the plan is marked infeasible.
inline ResourcePlan allocate_all(const ClusterPlan& plan, const std::vector<UserLink>& link,
                                 const std::vector<double>& qos, double case1_tol = 0.05) {
    const int C = plan.n_clusters();
    ResourcePlan out;
    out.power.assign(link.size(), 0.0);
    out.time.assign(static_cast<std::size_t>(C), 0.0);
    out.strongest_cluster = strongest_cluster(plan, link);
    const int cs = out.strongest_cluster;

    bool ok = true;
    std::string why;
    double used = 0.0;
    for (int c = 0; c < C && ok; ++c) {
        if (c == cs) continue;
        const auto m = members_by_order(plan, c);
        try {
            const auto a = detail::exact_cluster(m, link, qos, case1_tol);
            detail::write_cluster(out, m, a);
            out.time[static_cast<std::size_t>(c)] = a.time;
            used += a.time;
        } catch (const InfeasibleQos& e) {
            ok = false;
            why = e.what();
        }
    }
    if (ok) {
        const double t = 1.0 - used;
        const auto m = members_by_order(plan, cs);
        std::vector<double> g, n, r;
        for (int k : m) {
            g.push_back(link[static_cast<std::size_t>(k)].gain);
            n.push_back(link[static_cast<std::size_t>(k)].noise);
            r.push_back(qos[static_cast<std::size_t>(k)]);
        }
        try {
            const auto p = power_recursion_last_cluster(g, n, r, t);
            for (std::size_t a = 0; a < m.size(); ++a) out.power[static_cast<std::size_t>(m[a])] = p[a];
            out.time[static_cast<std::size_t>(cs)] = t;
            const int top = m.back();
            const double top_rate = t * log2p1(g.back() * p.back() / n.back());
            if (top_rate < qos[static_cast<std::size_t>(top)] * (1.0 - 1e-12)) {
                ok = false;
                why = "last-decoded user of the strongest cluster misses its target";
            }
        } catch (const InfeasibleQos& e) {
            ok = false;
            why = e.what();
        }
    }
    if (ok) return out;

    // Best effort: exact service at a common fraction of every target.
    out.feasible = false;
    out.diagnostics.push_back("qos infeasible: " + why);
    std::vector<ClusterAllocation> alloc(static_cast<std::size_t>(C));
    std::vector<char> served(static_cast<std::size_t>(C), 1);
    double total = 0.0;
    for (int c = 0; c < C; ++c) {
        const auto m = members_by_order(plan, c);
        try {
            alloc[c] = detail::exact_cluster(m, link, qos, case1_tol);
            total += alloc[c].time;
        } catch (const InfeasibleQos&) {
            served[c] = 0;
            out.diagnostics.push_back("cluster " + std::to_string(c) + " cannot be served");
        }
    }
    out.qos_scale = total > 0.0 ? 1.0 / total : 0.0;
    for (int c = 0; c < C; ++c) {
        const auto m = members_by_order(plan, c);
        if (served[c]) {
            detail::write_cluster(out, m, alloc[c]);
            out.time[static_cast<std::size_t>(c)] = alloc[c].time * out.qos_scale;
        } else {
            detail::write_cluster(out, m, {0.0, 1.0, 0.0});
        }
    }
    if (total <= 0.0) {
        // Nothing to serve: hand the whole frame to the strongest cluster.
        std::fill(out.time.begin(), out.time.end(), 0.0);
        out.time[static_cast<std::size_t>(cs)] = 1.0;
    }
    return out;
}

} // namespace starnoma
