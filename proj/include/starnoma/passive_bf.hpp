// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "active_bf.hpp"
#include "channel.hpp"
#include "core.hpp"
#include "sca.hpp"
#include "state.hpp"

namespace starnoma {

/// Phase codebook {2 pi k / 2^B1}.
inline std::vector<double> phase_levels(int bits) {
    if (bits < 1) throw InvalidArgument("phase_levels: bits must be >= 1");
    const int n = 1 << bits;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = 2.0 * kPi * k / n;
    return out;
}

/// Amplitude codebook {k / (2^B2 - 1)}.
inline std::vector<double> amplitude_levels(int bits) {
    if (bits < 1) throw InvalidArgument("amplitude_levels: bits must be >= 1");
    const int n = (1 << bits) - 1;
    std::vector<double> out(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) out[static_cast<std::size_t>(k)] = static_cast<double>(k) / n;
    return out;
}

/// Index of the nearest phase level under circular distance.
inline int nearest_phase_index(double angle, int bits) {
    const int n = 1 << bits;
    const double step = 2.0 * kPi / n;
    double a = std::fmod(angle, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    const int k = static_cast<int>(std::lround(a / step));
    return k % n;
}

inline int nearest_amplitude_index(double amplitude, int bits) {
    const int n = (1 << bits) - 1;
    const long k = std::lround(std::clamp(amplitude, 0.0, 1.0) * n);
    return static_cast<int>(k);
}

enum class AmplitudeRule : std::uint8_t {
    joint,         // pair (k, n - k) nearest to both faces' amplitudes at once
    reflect_first, // nearest reflect level; transmit gets the complement
};

/// Maps a continuous profile onto the codebooks. The two amplitudes always come
/// from a complementary level pair (k, n - k) so they sum to one; phases of both
/// faces are quantized independently to the circular-nearest level.
inline SurfaceProfile quantize_profile(const SurfaceProfile& in, int phase_bits, int amplitude_bits,
                                       AmplitudeRule rule = AmplitudeRule::joint, bool keep_reflect = false,
                                       bool keep_transmit = false) {
    const Eigen::Index M = in.size();
    const int n = (1 << amplitude_bits) - 1;
    const int np = 1 << phase_bits;
    std::vector<int> kr(static_cast<std::size_t>(M));
    for (Eigen::Index m = 0; m < M; ++m) {
        const double ar = std::abs(in.reflect(m));
        const double at = std::abs(in.transmit(m));
        // joint: minimizes (ar - k/n)^2 + (at - 1 + k/n)^2 over k
        kr[m] = rule == AmplitudeRule::joint ? nearest_amplitude_index(0.5 * (ar + 1.0 - at), amplitude_bits)
                                             : nearest_amplitude_index(ar, amplitude_bits);
    }
    // an occupied face keeps one amplitude level on its strongest element
    auto lift = [&](bool reflect_side, int avoid) {
        const Cvec& row = reflect_side ? in.reflect : in.transmit;
        const int target = reflect_side ? 0 : n;
        if (std::any_of(kr.begin(), kr.end(), [&](int k) { return k != target; })) return -1;
        int best = -1;
        for (Eigen::Index m = 0; m < M; ++m)
            if (static_cast<int>(m) != avoid && (best < 0 || std::abs(row(m)) > std::abs(row(best)))) best = static_cast<int>(m);
        if (best < 0) best = 0;
        kr[best] = reflect_side ? 1 : n - 1;
        return best;
    };
    const int lifted = keep_reflect ? lift(true, -1) : -1;
    if (keep_transmit) lift(false, M > 1 ? lifted : -1);
    SurfaceProfile out{Cvec(M), Cvec(M)};
    for (Eigen::Index m = 0; m < M; ++m) {
        const double br = static_cast<double>(kr[m]) / n;
        const double bt = static_cast<double>(n - kr[m]) / n;
        const double pr = 2.0 * kPi * nearest_phase_index(std::arg(in.reflect(m)), phase_bits) / np;
        const double pt = 2.0 * kPi * nearest_phase_index(std::arg(in.transmit(m)), phase_bits) / np;
        out.reflect(m) = std::polar(br, pr);
        out.transmit(m) = std::polar(bt, pt);
    }
    return out;
}

/// Keeps the phases and imposes fixed amplitudes (reflect share beta_r).
inline SurfaceProfile fix_amplitudes(const SurfaceProfile& in, double beta_r) {
    SurfaceProfile out = in;
    for (Eigen::Index m = 0; m < in.size(); ++m) {
        out.reflect(m) = std::polar(beta_r, std::arg(in.reflect(m)));
        out.transmit(m) = std::polar(1.0 - beta_r, std::arg(in.transmit(m)));
    }
    return out;
}

/// Quantizes phases only, keeping the amplitudes.
inline SurfaceProfile quantize_phases(const SurfaceProfile& in, int phase_bits) {
    const int np = 1 << phase_bits;
    SurfaceProfile out = in;
    for (Eigen::Index m = 0; m < in.size(); ++m) {
        out.reflect(m) = std::polar(std::abs(in.reflect(m)),
                                    2.0 * kPi * nearest_phase_index(std::arg(in.reflect(m)), phase_bits) / np);
        out.transmit(m) = std::polar(std::abs(in.transmit(m)),
                                     2.0 * kPi * nearest_phase_index(std::arg(in.transmit(m)), phase_bits) / np);
    }
    return out;
}

/// Co-phasing profile: each face aligns every element with the cascade of the
/// strongest user it serves (reflect face with reflect users, transmit face with
/// transmit users). Elements with a zero cascade keep phase 0.
inline SurfaceProfile init_passive(const ChannelSet& ch, const std::vector<int>& users, const Cvec& w, double beta_r) {
    const int M = ch.n_elements();
    SurfaceProfile out = uniform_profile(M, beta_r);
    for (Side side : {Side::reflect, Side::transmit}) {
        int best = -1;
        double best_v = -1.0;
        for (int k : users) {
            if (k < 0 || ch.user_state[static_cast<std::size_t>(k)] != side) continue;
            const double v = ch.surface_to_user[static_cast<std::size_t>(k)].squaredNorm();
            if (v > best_v) {
                best_v = v;
                best = k;
            }
        }
        if (best < 0) continue;
        const Cvec e = element_cascade(ch.surface_to_user[static_cast<std::size_t>(best)], ch.bs_to_surface, w);
        const double amp = side == Side::reflect ? beta_r : 1.0 - beta_r;
        Cvec& row = out.row(side);
        for (int m = 0; m < M; ++m) row(m) = std::abs(e(m)) > 0.0 ? amp * std::conj(e(m)) / std::abs(e(m)) : cd(amp, 0.0);
    }
    return out;
}

namespace detail {

/// Row of user k in the stacked variable x = [u^r; u^t], normalized by the noise std.
inline RowCvec stacked_row(const StageContext& ctx, int k, const Cvec& w) {
    const int M = ctx.ch.n_elements();
    const auto ku = static_cast<std::size_t>(k);
    const Cvec e = element_cascade(ctx.ch.surface_to_user[ku], ctx.ch.bs_to_surface, w) / std::sqrt(ctx.noise_power);
    RowCvec row = RowCvec::Zero(2 * M);
    const int off = ctx.ch.user_state[ku] == Side::reflect ? 0 : M;
    row.segment(off, M) = e.transpose();
    return row;
}

inline Cvec stack(const SurfaceProfile& p) {
    Cvec x(2 * p.size());
    x << p.reflect, p.transmit;
    return x;
}

inline SurfaceProfile unstack(const Cvec& x) {
    const Eigen::Index M = x.size() / 2;
    return {x.head(M), x.tail(M)};
}

inline void add_couplings(SinrProblem& prob, int M) {
    for (int m = 0; m < M; ++m) prob.couplings.emplace_back(m, M + m);
}

} // namespace detail

/// Passive surrogate for cluster c (time-multiplexed case).
inline SinrProblem build_passive_problem(const StageContext& ctx, int c) {
    const auto members = members_by_order(ctx.plan, c);
    const int M = ctx.ch.n_elements();
    SinrProblem prob;
    prob.dim = 2 * M;
    prob.users = detail::cluster_terms(ctx, c, members);
    const Cvec& w = ctx.beams.w[static_cast<std::size_t>(c)];
    for (std::size_t a = 0; a < members.size(); ++a) prob.users[a].h = detail::stacked_row(ctx, members[a], w);
    detail::add_couplings(prob, M);
    return prob;
}

/// Passive surrogate over one shared profile serving every cluster at once;
/// inter-cluster interference is held at its expansion value.
inline SinrProblem build_shared_passive_problem(const StageContext& ctx) {
    const int M = ctx.ch.n_elements();
    SinrProblem prob;
    prob.dim = 2 * M;
    for (int c = 0; c < ctx.plan.n_clusters(); ++c) {
        const auto members = members_by_order(ctx.plan, c);
        auto terms = detail::cluster_terms(ctx, c, members);
        const Cvec& w = ctx.beams.w[static_cast<std::size_t>(c)];
        for (std::size_t a = 0; a < members.size(); ++a) {
            terms[a].h = detail::stacked_row(ctx, members[a], w);
            const RowCvec h = user_channel(ctx.ch, ctx.beams.profile.front(), members[a]);
            terms[a].noise = 1.0 + detail::inter_cluster_power(ctx, h, c) / ctx.noise_power;
            prob.users.push_back(terms[a]);
        }
    }
    detail::add_couplings(prob, M);
    return prob;
}

/// One SCA step on the surface profiles; returns continuous (unquantized) profiles.
/// A cluster whose subproblem is infeasible keeps its previous profile.
inline StageResult optimize_passive(const StageContext& ctx) {
    StageResult out;
    out.beams = ctx.beams;
    auto run = [&](const SinrProblem& prob, std::size_t slot, const std::string& tag) {
        SinrSolution sol = solve_sinr_subproblem(prob, detail::stack(ctx.beams.profile[slot]), ctx.solver);
        for (const auto& d : sol.diagnostics) out.diagnostics.push_back("passive " + tag + ": " + d);
        if (sol.status == SolverStatus::infeasible) ++out.infeasible;
        else out.beams.profile[slot] = detail::unstack(sol.x);
        out.solutions.push_back(std::move(sol));
    };
    if (ctx.simultaneous) {
        run(build_shared_passive_problem(ctx), 0, "shared");
        for (auto& p : out.beams.profile) p = out.beams.profile.front();
    } else {
        for (int c = 0; c < ctx.plan.n_clusters(); ++c)
            run(build_passive_problem(ctx, c), static_cast<std::size_t>(c), "c" + std::to_string(c));
    }
    return out;
}

} // namespace starnoma
