// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "core.hpp"
#include "pairing.hpp"
#include "state.hpp"

namespace starnoma {

/// Effective link quantities per user: |h_k w_c|^2 and the noise-plus-interference floor.
struct LinkGains {
    std::vector<double> gain;
    std::vector<double> noise;
};

struct RateReport {
    std::vector<double> per_user_rate;   // R_{k->k}
    std::vector<double> per_user_sinr;   // gamma_{k->k}
    Rmat decode_rates;                   // (k, i): R_{k->i} for users of the same cluster, order(i) <= order(k)
    double sum_rate = 0.0;
    std::vector<double> qos_residuals;   // R_{k->k} - R_min_k
    std::vector<std::pair<int, int>> sic_violations; // (decoder k, decoded i)
};

/// gamma_{k->i}: user k decoding user i's stream in its cluster.
/// `members` holds the cluster's users ordered by decoding order ascending.
inline double sinr(double gain, double noise, const std::vector<double>& power, const std::vector<int>& members,
                   int decoded) {
    double intra = 0.0;
    bool after = false;
    double own = 0.0;
    for (int j : members) {
        if (after) intra += power[static_cast<std::size_t>(j)];
        if (j == decoded) {
            after = true;
            own = power[static_cast<std::size_t>(j)];
        }
    }
    const double den = gain * intra + noise;
    if (own <= 0.0 || gain <= 0.0) return 0.0;
    return gain * own / den;
}

/// Full report from per-user link gains.
inline RateReport evaluate_gains(const ClusterPlan& plan, const ResourcePlan& res, const LinkGains& links,
                                 const std::vector<double>& qos, double tol = 1e-9) {
    const int K = plan.n_users();
    RateReport r;
    r.per_user_rate.assign(static_cast<std::size_t>(K), 0.0);
    r.per_user_sinr.assign(static_cast<std::size_t>(K), 0.0);
    r.qos_residuals.assign(static_cast<std::size_t>(K), 0.0);
    r.decode_rates = Rmat::Zero(K, K);
    for (int c = 0; c < plan.n_clusters(); ++c) {
        const auto members = members_by_order(plan, c);
        const double t = res.time.at(static_cast<std::size_t>(c));
        for (std::size_t a = 0; a < members.size(); ++a) {
            const int k = members[a];
            for (std::size_t b = 0; b <= a; ++b) {
                const int i = members[b];
                const double g = sinr(links.gain[k], links.noise[k], res.power, members, i);
                r.decode_rates(k, i) = t * log2p1(g);
                if (i == k) r.per_user_sinr[k] = g;
            }
            r.per_user_rate[k] = r.decode_rates(k, k);
        }
        for (std::size_t b = 0; b < members.size(); ++b) {
            const int i = members[b];
            for (std::size_t a = b + 1; a < members.size(); ++a) {
                const int k = members[a];
                const int prev = members[a - 1];
                const bool chain = r.decode_rates(k, i) >= r.decode_rates(prev, i) - tol;
                const bool floor = r.decode_rates(k, i) >= qos[i] - tol;
                if (!chain || !floor) r.sic_violations.emplace_back(k, i);
            }
        }
    }
    for (int k = 0; k < K; ++k) {
        r.qos_residuals[k] = r.per_user_rate[k] - qos[k];
        r.sum_rate += r.per_user_rate[k];
    }
    return r;
}

/// Time-multiplexed clusters: user k sees only its own cluster's beam and profile.
inline LinkGains tdma_gains(const ChannelSet& ch, const ClusterPlan& plan, const BeamState& beams, double noise_power) {
    const int K = ch.n_users();
    LinkGains l;
    l.gain.assign(static_cast<std::size_t>(K), 0.0);
    l.noise.assign(static_cast<std::size_t>(K), noise_power);
    const auto cl = plan.cluster_of();
    for (int k = 0; k < K; ++k) {
        const auto c = static_cast<std::size_t>(cl[k]);
        l.gain[k] = std::norm(apply_row(user_channel(ch, beams.profile[c], k), beams.w[c]));
    }
    return l;
}

/// Simultaneous clusters through one shared profile: other clusters' beams add interference.
inline LinkGains simultaneous_gains(const ChannelSet& ch, const ClusterPlan& plan, const BeamState& beams,
                                    const SurfaceProfile& shared, double noise_power, const std::vector<double>& power) {
    const int K = ch.n_users();
    LinkGains l;
    l.gain.assign(static_cast<std::size_t>(K), 0.0);
    l.noise.assign(static_cast<std::size_t>(K), noise_power);
    const auto cl = plan.cluster_of();
    for (int k = 0; k < K; ++k) {
        const RowCvec h = user_channel(ch, shared, k);
        for (int c = 0; c < plan.n_clusters(); ++c) {
            const double g = std::norm(apply_row(h, beams.w[static_cast<std::size_t>(c)]));
            if (c == cl[k]) {
                l.gain[k] = g;
            } else {
                double pc = 0.0;
                for (int j : plan.clusters[static_cast<std::size_t>(c)])
                    if (j >= 0) pc += power[static_cast<std::size_t>(j)];
                l.noise[k] += g * pc;
            }
        }
    }
    return l;
}

/// Report for the time-multiplexed system.
inline RateReport evaluate(const ChannelSet& ch, const ClusterPlan& plan, const BeamState& beams,
                           const ResourcePlan& res, const std::vector<double>& qos, double noise_power) {
    return evaluate_gains(plan, res, tdma_gains(ch, plan, beams, noise_power), qos);
}

} // namespace starnoma
