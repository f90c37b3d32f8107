// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "channel.hpp"
#include "core.hpp"
#include "pairing.hpp"
#include "random.hpp"
#include "sca.hpp"
#include "state.hpp"

namespace starnoma {

/// Everything a beamforming stage needs, held by reference.
struct StageContext {
    const ChannelSet& ch;
    const ClusterPlan& plan;
    const BeamState& beams;
    const ResourcePlan& res;
    const std::vector<double>& qos;
    double noise_power = 1.0;
    double power_budget = 1.0;   // per-cluster ||w_c||^2 bound
    bool simultaneous = false;   // clusters share the frame and one surface profile
    bool order_constraint = false;
    SolverOptions solver{};
};

struct StageResult {
    BeamState beams;
    std::vector<SinrSolution> solutions;
    std::vector<std::string> diagnostics;
    int infeasible = 0;
};

namespace detail {

/// Interference from the other clusters' beams at user k through the shared profile.
inline double inter_cluster_power(const StageContext& ctx, const RowCvec& h, int own_cluster) {
    double acc = 0.0;
    for (int c = 0; c < ctx.plan.n_clusters(); ++c) {
        if (c == own_cluster) continue;
        double pc = 0.0;
        for (int j : ctx.plan.clusters[static_cast<std::size_t>(c)])
            if (j >= 0) pc += ctx.res.power[static_cast<std::size_t>(j)];
        acc += std::norm(apply_row(h, ctx.beams.w[static_cast<std::size_t>(c)])) * pc;
    }
    return acc;
}

inline const SurfaceProfile& profile_for(const StageContext& ctx, int c) {
    return ctx.simultaneous ? ctx.beams.profile.front() : ctx.beams.profile[static_cast<std::size_t>(c)];
}

/// Common user data (power, intra-cluster interference, target, weight) for cluster c.
inline std::vector<UserTerm> cluster_terms(const StageContext& ctx, int c, const std::vector<int>& members) {
    std::vector<UserTerm> out;
    for (std::size_t a = 0; a < members.size(); ++a) {
        const int k = members[a];
        UserTerm u;
        u.power = ctx.res.power[static_cast<std::size_t>(k)];
        for (std::size_t b = a + 1; b < members.size(); ++b) u.intra += ctx.res.power[static_cast<std::size_t>(members[b])];
        u.qos_snr = std::exp2(ctx.qos[static_cast<std::size_t>(k)]) - 1.0;
        u.weight = ctx.simultaneous ? 1.0 : ctx.res.time[static_cast<std::size_t>(c)];
        out.push_back(u);
    }
    return out;
}

} // namespace detail

/// Active-beamforming surrogate for cluster c in variables x = w / sqrt(P).
inline SinrProblem build_active_problem(const StageContext& ctx, int c) {
    const auto members = members_by_order(ctx.plan, c);
    SinrProblem prob;
    prob.dim = ctx.ch.n_antennas();
    prob.norm_ball = true;
    prob.users = detail::cluster_terms(ctx, c, members);
    const double scale = std::sqrt(ctx.power_budget / ctx.noise_power);
    for (std::size_t a = 0; a < members.size(); ++a) {
        const RowCvec h = user_channel(ctx.ch, detail::profile_for(ctx, c), members[a]);
        prob.users[a].h = h * scale;
        if (ctx.simultaneous) prob.users[a].noise = 1.0 + detail::inter_cluster_power(ctx, h, c) / ctx.noise_power;
    }
    if (ctx.order_constraint && members.size() == 2) prob.order_pairs.emplace_back(0, 1);
    return prob;
}

/// One SCA step on every cluster's beamformer. A cluster whose subproblem is
/// infeasible keeps its previous beamformer.
inline StageResult optimize_active(const StageContext& ctx) {
    StageResult out;
    out.beams = ctx.beams;
    const double root_p = std::sqrt(ctx.power_budget);
    for (int c = 0; c < ctx.plan.n_clusters(); ++c) {
        const SinrProblem prob = build_active_problem(ctx, c);
        const Cvec x0 = ctx.beams.w[static_cast<std::size_t>(c)] / root_p;
        SinrSolution sol = solve_sinr_subproblem(prob, x0, ctx.solver);
        for (const auto& d : sol.diagnostics) out.diagnostics.push_back("active c" + std::to_string(c) + ": " + d);
        if (sol.status == SolverStatus::infeasible) {
            ++out.infeasible;
        } else {
            Cvec w = sol.x * root_p;
            const double n2 = w.squaredNorm();
            if (n2 > ctx.power_budget) w *= std::sqrt(ctx.power_budget / n2);
            out.beams.w[static_cast<std::size_t>(c)] = w;
        }
        out.solutions.push_back(std::move(sol));
    }
    return out;
}

/// MRT toward the strongest channel among `rows`, scaled to sqrt(P).
inline Cvec init_active(const std::vector<RowCvec>& rows, double power_budget, Rng& rng, bool* fallback = nullptr) {
    if (rows.empty()) throw InvalidArgument("init_active: no channels");
    std::size_t best = 0;
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (rows[k].squaredNorm() > rows[best].squaredNorm()) best = k;
    const double n = rows[best].norm();
    if (fallback) *fallback = false;
    if (n == 0.0) {
        if (fallback) *fallback = true;
        return random_unit_vector(rng, rows[best].size()) * std::sqrt(power_budget);
    }
    return rows[best].adjoint() * (std::sqrt(power_budget) / n);
}

} // namespace starnoma
