// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <vector>

#include "assignment.hpp"
#include "core.hpp"
#include "random.hpp"

namespace starnoma {

/// Two-user clusters. clusters[c] = {strong, weak}; decoding_order is 1-based per user.
struct ClusterPlan {
    std::vector<std::array<int, 2>> clusters;
    std::vector<int> decoding_order;
    std::vector<int> strong_group;
    std::vector<int> weak_group;
    bool state_feasible = true;
    double correlation = 0.0; // sum of masked scores over the chosen pairs
    std::vector<std::string> diagnostics;

    int n_clusters() const { return static_cast<int>(clusters.size()); }
    int n_users() const { return static_cast<int>(decoding_order.size()); }
    /// Cluster index of each user.
    std::vector<int> cluster_of() const {
        std::vector<int> out(decoding_order.size(), -1);
        for (std::size_t c = 0; c < clusters.size(); ++c)
            for (int k : clusters[c])
                if (k >= 0) out[static_cast<std::size_t>(k)] = static_cast<int>(c);
        return out;
    }
};

struct StrengthSplit {
    std::vector<int> strong;
    std::vector<int> weak;
};

/// Sorts by strength descending (ties by lower index) and cuts in half.
inline StrengthSplit split_by_strength(const std::vector<double>& strength) {
    const std::size_t K = strength.size();
    if (K % 2 != 0) throw InvalidArgument("split_by_strength: K must be even");
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return strength[a] > strength[b]; });
    StrengthSplit s;
    s.strong.assign(order.begin(), order.begin() + static_cast<long>(K / 2));
    s.weak.assign(order.begin() + static_cast<long>(K / 2), order.end());
    return s;
}

inline std::vector<double> channel_strengths(const std::vector<RowCvec>& h) {
    std::vector<double> out;
    out.reserve(h.size());
    for (const auto& row : h) out.push_back(row.squaredNorm());
    return out;
}

/// score(i, j) = |h_weak[j] h_strong[i]^H|^2, zeroed where the two users share a state.
inline Rmat build_score_matrix(const std::vector<RowCvec>& h, const std::vector<Side>& state,
                               const StrengthSplit& split) {
    const auto n = static_cast<Eigen::Index>(split.strong.size());
    Rmat score = Rmat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int a = split.strong[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
            const int b = split.weak[static_cast<std::size_t>(j)];
            if (state[a] == state[b]) continue;
            score(i, j) = std::norm(h[b].dot(h[a]));
        }
    }
    return score;
}

namespace detail {
inline ClusterPlan plan_from_assignment(const StrengthSplit& split, const std::vector<int>& column_of, int K) {
    ClusterPlan plan;
    plan.strong_group = split.strong;
    plan.weak_group = split.weak;
    plan.decoding_order.assign(static_cast<std::size_t>(K), 0);
    for (std::size_t i = 0; i < split.strong.size(); ++i) {
        const int a = split.strong[i];
        const int b = split.weak[static_cast<std::size_t>(column_of[i])];
        plan.clusters.push_back({a, b});
        plan.decoding_order[static_cast<std::size_t>(a)] = 2;
        plan.decoding_order[static_cast<std::size_t>(b)] = 1;
    }
    return plan;
}
} // namespace detail

/// Correlation-maximizing pairing of strong and weak users with decoding orders.
/// Among maximum-weight matchings that use the most reflect/transmit pairs, the
/// best-scoring one is returned.
inline ClusterPlan plan_clusters(const std::vector<RowCvec>& h, const std::vector<Side>& state) {
    const int K = static_cast<int>(h.size());
    if (K % 2 != 0 || K == 0) throw InvalidArgument("plan_clusters: K must be even and positive");
    if (state.size() != h.size()) throw InvalidArgument("plan_clusters: one state per user required");
    const StrengthSplit split = split_by_strength(channel_strengths(h));
    const Rmat score = build_score_matrix(h, state, split);
    const auto n = score.rows();

    const double top = score.maxCoeff();
    Rmat lex = Rmat::Zero(n, n);
    const double feasible_bonus = 2.0 * static_cast<double>(n) + 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool ok = state[split.strong[static_cast<std::size_t>(i)]] !=
                            state[split.weak[static_cast<std::size_t>(j)]];
            lex(i, j) = (ok ? feasible_bonus : 0.0) + (top > 0.0 ? score(i, j) / top : 0.0);
        }
    const Assignment a = solve_assignment(lex);
    ClusterPlan plan = detail::plan_from_assignment(split, a.column_of, K);
    for (Eigen::Index i = 0; i < n; ++i) plan.correlation += score(i, a.column_of[static_cast<std::size_t>(i)]);
    for (const auto& cl : plan.clusters)
        if (state[cl[0]] == state[cl[1]]) plan.state_feasible = false;
    if (!plan.state_feasible)
        plan.diagnostics.push_back("state-infeasible: no perfect reflect/transmit matching between strength groups");
    return plan;
}

/// Uniformly random pairing with a random decoding order inside each pair.
inline ClusterPlan random_plan(int K, Rng& rng) {
    if (K % 2 != 0 || K <= 0) throw InvalidArgument("random_plan: K must be even and positive");
    std::vector<int> perm(static_cast<std::size_t>(K));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = K - 1; i > 0; --i) {
        const int j = std::uniform_int_distribution<int>(0, i)(rng);
        std::swap(perm[i], perm[j]);
    }
    ClusterPlan plan;
    plan.decoding_order.assign(static_cast<std::size_t>(K), 0);
    for (int c = 0; c < K / 2; ++c) {
        const int a = perm[2 * c];
        const int b = perm[2 * c + 1];
        plan.clusters.push_back({a, b});
        plan.strong_group.push_back(a);
        plan.weak_group.push_back(b);
        plan.decoding_order[a] = 2;
        plan.decoding_order[b] = 1;
    }
    return plan;
}

/// Random pairing whose decoding order follows channel strength.
inline ClusterPlan random_plan_by_strength(const std::vector<RowCvec>& h, Rng& rng) {
    ClusterPlan plan = random_plan(static_cast<int>(h.size()), rng);
    plan.strong_group.clear();
    plan.weak_group.clear();
    for (auto& cl : plan.clusters) {
        if (h[cl[1]].squaredNorm() > h[cl[0]].squaredNorm()) std::swap(cl[0], cl[1]);
        plan.decoding_order[cl[0]] = 2;
        plan.decoding_order[cl[1]] = 1;
        plan.strong_group.push_back(cl[0]);
        plan.weak_group.push_back(cl[1]);
    }
    return plan;
}

/// Single-user clusters, used by the orthogonal baseline.
inline ClusterPlan singleton_plan(int K) {
    ClusterPlan plan;
    plan.decoding_order.assign(static_cast<std::size_t>(K), 1);
    for (int k = 0; k < K; ++k) {
        plan.clusters.push_back({k, -1});
        plan.strong_group.push_back(k);
    }
    return plan;
}

/// Members of a cluster, ordered by decoding order ascending (weak first).
inline std::vector<int> members_by_order(const ClusterPlan& plan, int c) {
    std::vector<int> out;
    for (int k : plan.clusters[static_cast<std::size_t>(c)])
        if (k >= 0) out.push_back(k);
    std::sort(out.begin(), out.end(),
              [&](int a, int b) { return plan.decoding_order[a] < plan.decoding_order[b]; });
    return out;
}

} // namespace starnoma
