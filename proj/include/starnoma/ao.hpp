// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "active_bf.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "pairing.hpp"
#include "passive_bf.hpp"
#include "random.hpp"
#include "rates.hpp"
#include "resource_alloc.hpp"
#include "state.hpp"

namespace starnoma {

// random: random pairs, decoded in order of channel strength; random_order: random pairs and order.
enum class PairingMode : std::uint8_t { algorithm1, random, random_order, singleton };
// fixed_split: weak user gets fixed_weak_power, equal time per cluster.
enum class AllocationMode : std::uint8_t { optimized, random, fixed_split };

struct AoOptions {
    PairingMode pairing = PairingMode::algorithm1;
    AllocationMode allocation = AllocationMode::optimized;
    bool optimize_active = true;
    bool optimize_passive = true;
    bool simultaneous = false;                    // all clusters share the frame and one profile
    std::optional<double> fixed_reflect_amplitude; // reflection-only surface
    double fixed_weak_power = 0.5;
    bool random_init = false; // start from random beams and codebook profiles
    bool record_timing = false;
    std::uint64_t trial = 0;
    SolverOptions solver{};
};

struct AoIterate {
    int iteration = 0;
    double sum_rate = 0.0;
    double continuous_sum_rate = 0.0; // before the codebook projection
    double quantization_gap = 0.0;    // max(0, continuous - quantized)
    bool active_accepted = false;
    bool passive_accepted = false;
    int active_infeasible = 0;
    int passive_infeasible = 0;
    double min_qos_residual = 0.0;
    bool qos_feasible = true;
    double qos_scale = 1.0;
    double wall_seconds = 0.0;
};

enum class AoStatus : std::uint8_t { converged, max_iter };

inline const char* to_string(AoStatus s) { return s == AoStatus::converged ? "converged" : "max_iter"; }

struct AoTrace {
    std::vector<AoIterate> iterations;
    double initial_sum_rate = 0.0;
    AoStatus status = AoStatus::max_iter;
    ClusterPlan plan;
    BeamState beams;
    ResourcePlan resources;
    RateReport report;
    double sum_rate = 0.0;
    int order_violations = 0; // clusters where the later-decoded user has the weaker effective gain
    std::vector<std::string> diagnostics;

    int iterations_run() const { return static_cast<int>(iterations.size()); }
};

namespace detail {

inline std::vector<UserLink> user_links(const ChannelSet& ch, const ClusterPlan& plan, const BeamState& beams,
                                        double noise_power, bool simultaneous) {
    const int K = ch.n_users();
    std::vector<UserLink> out(static_cast<std::size_t>(K));
    const auto cl = plan.cluster_of();
    for (int k = 0; k < K; ++k) {
        const auto c = static_cast<std::size_t>(cl[k]);
        const RowCvec h = user_channel(ch, simultaneous ? beams.profile.front() : beams.profile[c], k);
        out[k].gain = std::norm(apply_row(h, beams.w[c]));
        out[k].noise = noise_power;
        out[k].strength = h.squaredNorm();
        if (simultaneous) {
            for (int c2 = 0; c2 < plan.n_clusters(); ++c2)
                if (c2 != cl[k]) out[k].noise += std::norm(apply_row(h, beams.w[static_cast<std::size_t>(c2)]));
        }
    }
    return out;
}

} // namespace detail

/// Full-frame allocation for simultaneously served clusters: power recursion at t = 1,
/// clamped into [0, 1].
inline ResourcePlan allocate_simultaneous(const ClusterPlan& plan, const std::vector<UserLink>& link,
                                          const std::vector<double>& qos) {
    ResourcePlan out;
    out.power.assign(link.size(), 0.0);
    out.time.assign(static_cast<std::size_t>(plan.n_clusters()), 1.0);
    for (int c = 0; c < plan.n_clusters(); ++c) {
        const auto m = members_by_order(plan, c);
        double used = 0.0;
        for (std::size_t a = 0; a + 1 < m.size(); ++a) {
            const auto k = static_cast<std::size_t>(m[a]);
            const double frac = 1.0 - std::exp2(-qos[k]);
            double p = link[k].gain > 0.0 ? frac * (1.0 + link[k].noise / link[k].gain - used) : 0.0;
            if (p > 1.0 - used) {
                out.feasible = false;
                p = 1.0 - used;
            }
            out.power[k] = std::max(0.0, p);
            used += out.power[k];
        }
        out.power[static_cast<std::size_t>(m.back())] = std::max(0.0, 1.0 - used);
    }
    if (!out.feasible) out.diagnostics.push_back("qos infeasible: power coefficients clamped");
    return out;
}

/// Random feasible power split per cluster and random time fractions.
inline ResourcePlan random_resources(const ClusterPlan& plan, int n_users, Rng& rng) {
    ResourcePlan out;
    out.power.assign(static_cast<std::size_t>(n_users), 0.0);
    for (int c = 0; c < plan.n_clusters(); ++c) {
        const auto m = members_by_order(plan, c);
        const auto p = random_simplex(rng, m.size());
        for (std::size_t a = 0; a < m.size(); ++a) out.power[static_cast<std::size_t>(m[a])] = p[a];
    }
    out.time = random_simplex(rng, static_cast<std::size_t>(plan.n_clusters()));
    out.feasible = false;
    return out;
}

/// Weak users get `weak_power`, strong users the rest; equal time per cluster.
inline ResourcePlan split_resources(const ClusterPlan& plan, int n_users, double weak_power) {
    if (!(weak_power >= 0.0 && weak_power <= 1.0)) throw InvalidArgument("split_resources: weak power outside [0, 1]");
    ResourcePlan out;
    out.power.assign(static_cast<std::size_t>(n_users), 0.0);
    for (int c = 0; c < plan.n_clusters(); ++c) {
        const auto m = members_by_order(plan, c);
        if (m.size() == 1) {
            out.power[static_cast<std::size_t>(m[0])] = 1.0;
            continue;
        }
        out.power[static_cast<std::size_t>(m[0])] = weak_power;
        out.power[static_cast<std::size_t>(m[1])] = 1.0 - weak_power;
    }
    out.time.assign(static_cast<std::size_t>(plan.n_clusters()), 1.0 / plan.n_clusters());
    out.feasible = false;
    return out;
}

/// Sum-rate machinery shared by every stage of one run.
class AoEngine {
public:
    AoEngine(const SystemConfig& cfg, const ChannelSet& ch, const AoOptions& opt)
        : cfg_(cfg), ch_(ch), opt_(opt) {
        budget_ = opt.simultaneous ? cfg.tx_power_max / std::max(1, cfg.n_clusters) : cfg.tx_power_max;
    }

    double power_budget() const { return budget_; }

    ResourcePlan allocate(const ClusterPlan& plan, const BeamState& beams) const {
        const auto links = detail::user_links(ch_, plan, beams, cfg_.noise_power, opt_.simultaneous);
        if (opt_.simultaneous) return allocate_simultaneous(plan, links, cfg_.qos_min_rates);
        return allocate_all(plan, links, cfg_.qos_min_rates, cfg_.case1_tolerance);
    }

    RateReport report(const ClusterPlan& plan, const BeamState& beams, const ResourcePlan& res) const {
        if (opt_.simultaneous)
            return evaluate_gains(plan, res,
                                  simultaneous_gains(ch_, plan, beams, beams.profile.front(), cfg_.noise_power, res.power),
                                  cfg_.qos_min_rates);
        return evaluate(ch_, plan, beams, res, cfg_.qos_min_rates, cfg_.noise_power);
    }

    StageContext context(const ClusterPlan& plan, const BeamState& beams, const ResourcePlan& res) const {
        return StageContext{ch_, plan, beams, res, cfg_.qos_min_rates, cfg_.noise_power, budget_,
                            opt_.simultaneous, cfg_.enforce_decoding_order, opt_.solver};
    }

    /// Codebook projection (or amplitude pinning for a reflection-only surface).
    SurfaceProfile project(const SurfaceProfile& p, bool keep_reflect = false, bool keep_transmit = false) const {
        if (opt_.fixed_reflect_amplitude) return quantize_phases(fix_amplitudes(p, *opt_.fixed_reflect_amplitude), cfg_.phase_bits);
        return quantize_profile(p, cfg_.phase_bits, cfg_.amplitude_bits, AmplitudeRule::joint, keep_reflect, keep_transmit);
    }

    /// Which sides of profile `slot` serve at least one user.
    std::pair<bool, bool> occupied_sides(const ClusterPlan& plan, std::size_t slot) const {
        bool r = false, t = false;
        for (int ci = 0; ci < plan.n_clusters(); ++ci) {
            if (!opt_.simultaneous && static_cast<std::size_t>(ci) != slot) continue;
            for (int k : plan.clusters[static_cast<std::size_t>(ci)]) {
                if (k < 0) continue;
                (ch_.user_state[static_cast<std::size_t>(k)] == Side::reflect ? r : t) = true;
            }
        }
        return {r, t};
    }

    /// Projects every profile, keeping a nonzero amplitude on each side that serves a
    /// user, then polishes the codebook entries when enabled.
    void project_all(BeamState& beams, const ClusterPlan& plan, const ResourcePlan* fixed = nullptr) const {
        for (std::size_t c = 0; c < beams.profile.size(); ++c) {
            const auto [r, t] = occupied_sides(plan, c);
            beams.profile[c] = project(beams.profile[c], r, t);
        }
        if (cfg_.discrete_polish && opt_.optimize_passive) polish(beams, plan, fixed);
    }

    /// Coordinate ascent over codebook entries: one element and one coordinate at a
    /// time, a move kept only when the allocated objective improves.
    void polish(BeamState& beams, const ClusterPlan& plan, const ResourcePlan* fixed, int max_sweeps = 3) const {
        const int K = ch_.n_users();
        const int M = ch_.n_elements();
        const auto cl = plan.cluster_of();
        const std::size_t slots = opt_.simultaneous ? 1 : beams.profile.size();
        auto slot_of = [&](int k) { return opt_.simultaneous ? std::size_t{0} : static_cast<std::size_t>(cl[k]); };

        std::vector<RowCvec> h(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) h[k] = user_channel(ch_, beams.profile[slot_of(k)], k);

        struct Score {
            bool feasible = false;
            double scale = 0.0;
            double rate = -1.0;
        };
        auto score = [&]() {
            std::vector<UserLink> links(static_cast<std::size_t>(K));
            LinkGains lg;
            lg.gain.assign(static_cast<std::size_t>(K), 0.0);
            lg.noise.assign(static_cast<std::size_t>(K), cfg_.noise_power);
            std::vector<std::vector<double>> cross(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k) {
                const auto c = static_cast<std::size_t>(cl[k]);
                links[k].gain = std::norm(apply_row(h[k], beams.w[c]));
                links[k].noise = cfg_.noise_power;
                links[k].strength = h[k].squaredNorm();
                lg.gain[k] = links[k].gain;
                if (!opt_.simultaneous) continue;
                cross[k].assign(beams.w.size(), 0.0);
                for (std::size_t c2 = 0; c2 < beams.w.size(); ++c2) {
                    if (c2 == c) continue;
                    cross[k][c2] = std::norm(apply_row(h[k], beams.w[c2]));
                    links[k].noise += cross[k][c2];
                }
            }
            Score s;
            ResourcePlan res;
            if (fixed) res = *fixed;
            else if (opt_.simultaneous) res = allocate_simultaneous(plan, links, cfg_.qos_min_rates);
            else res = allocate_all(plan, links, cfg_.qos_min_rates, cfg_.case1_tolerance);
            if (opt_.simultaneous) {
                for (int k = 0; k < K; ++k)
                    for (std::size_t c2 = 0; c2 < cross[k].size(); ++c2) {
                        double pc = 0.0;
                        for (int j : plan.clusters[c2])
                            if (j >= 0) pc += res.power[static_cast<std::size_t>(j)];
                        lg.noise[k] += cross[k][c2] * pc;
                    }
            }
            s.feasible = fixed ? true : res.feasible;
            s.scale = fixed ? 1.0 : res.qos_scale;
            s.rate = evaluate_gains(plan, res, lg, cfg_.qos_min_rates).sum_rate;
            return s;
        };
        auto better = [](const Score& a, const Score& b) {
            if (a.feasible != b.feasible) return a.feasible;
            if (!a.feasible && std::abs(a.scale - b.scale) > 1e-12) return a.scale > b.scale;
            return a.rate > b.rate + 1e-12 * std::max(1.0, std::abs(b.rate));
        };

        const int n = (1 << cfg_.amplitude_bits) - 1;
        const int np = 1 << cfg_.phase_bits;
        // a profile move that fails with the current beam is retried with the cluster's beam re-aligned
        const bool realign = cfg_.beam_realign && opt_.optimize_active && !opt_.simultaneous;
        Score best = score();
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            bool moved = false;
            for (std::size_t slot = 0; slot < slots; ++slot) {
                const auto [keep_r, keep_t] = occupied_sides(plan, slot);
                SurfaceProfile& prof = beams.profile[slot];
                for (int m = 0; m < M; ++m) {
                    auto attempt = [&](cd nr, cd nt) {
                        const cd dr = nr - prof.reflect(m);
                        const cd dt = nt - prof.transmit(m);
                        std::vector<std::pair<int, RowCvec>> saved;
                        for (int k = 0; k < K; ++k) {
                            if (slot_of(k) != slot) continue;
                            const cd d = ch_.user_state[k] == Side::reflect ? dr : dt;
                            if (d == cd(0.0, 0.0)) continue;
                            saved.emplace_back(k, h[k]);
                            h[k] += d * std::conj(ch_.surface_to_user[k](m)) * ch_.bs_to_surface.row(m);
                        }
                        const cd or_ = prof.reflect(m), ot = prof.transmit(m);
                        prof.reflect(m) = nr;
                        prof.transmit(m) = nt;
                        const Score s = score();
                        if (better(s, best)) {
                            best = s;
                            moved = true;
                            return;
                        }
                        if (realign) {
                            const Cvec w0 = beams.w[slot];
                            for (const Cvec& w : pareto_beams(plan, static_cast<int>(slot), h)) {
                                beams.w[slot] = w;
                                const Score t = score();
                                if (better(t, best)) {
                                    best = t;
                                    moved = true;
                                    return;
                                }
                            }
                            beams.w[slot] = w0;
                        }
                        prof.reflect(m) = or_;
                        prof.transmit(m) = ot;
                        for (auto& [k, row] : saved) h[k] = std::move(row);
                    };
                    for (int side = 0; side < 2; ++side) {
                        const cd cur = side == 0 ? prof.reflect(m) : prof.transmit(m);
                        const double amp = std::abs(cur);
                        if (amp == 0.0) continue;
                        const int level = nearest_phase_index(std::arg(cur), cfg_.phase_bits);
                        for (int l = 0; l < np; ++l) {
                            if (l == level) continue;
                            const cd v = std::polar(amp, 2.0 * kPi * l / np);
                            if (side == 0) attempt(v, prof.transmit(m));
                            else attempt(prof.reflect(m), v);
                        }
                    }
                    if (opt_.fixed_reflect_amplitude) continue;
                    const int kr = static_cast<int>(std::lround(std::abs(prof.reflect(m)) * n));
                    const double pr = std::arg(prof.reflect(m)), pt = std::arg(prof.transmit(m));
                    bool other_r = false, other_t = false;
                    for (int e = 0; e < M; ++e) {
                        if (e == m) continue;
                        other_r = other_r || std::abs(prof.reflect(e)) > 0.0;
                        other_t = other_t || std::abs(prof.transmit(e)) > 0.0;
                    }
                    for (int a = 0; a <= n; ++a) {
                        if (a == kr || (a == 0 && keep_r && !other_r) || (a == n && keep_t && !other_t)) continue;
                        attempt(std::polar(static_cast<double>(a) / n, pr), std::polar(static_cast<double>(n - a) / n, pt));
                    }
                }
            }
            if (!moved) break;
        }
        if (opt_.simultaneous)
            for (auto& p : beams.profile) p = beams.profile.front();
    }

    /// Full-power beams on the two-user Pareto family lambda*s + (1-lambda)*e^{j theta}*v,
    /// with s, v the unit matched filters of the strong and weak user and theta aligning
    /// both contributions; a singleton cluster gets its matched filter.
    std::vector<Cvec> pareto_beams(const ClusterPlan& plan, int c, const std::vector<RowCvec>& h) const {
        const auto m = members_by_order(plan, c);
        const double root_p = std::sqrt(budget_);
        const RowCvec& hs = h[static_cast<std::size_t>(m.back())];
        if (hs.norm() == 0.0) return {};
        const Cvec s = hs.adjoint() / hs.norm();
        if (m.size() == 1) return {s * root_p};
        const RowCvec& hw = h[static_cast<std::size_t>(m.front())];
        if (hw.norm() == 0.0) return {s * root_p};
        const Cvec v = hw.adjoint() / hw.norm();
        const cd rot = std::polar(1.0, -std::arg(apply_row(hs, v)));
        std::vector<Cvec> out;
        constexpr int steps = 8;
        for (int i = 0; i <= steps; ++i) {
            const double lambda = static_cast<double>(i) / steps;
            const Cvec w = lambda * s + (1.0 - lambda) * rot * v;
            const double nw = w.norm();
            if (nw > 0.0) out.push_back(w * (root_p / nw));
        }
        return out;
    }

    /// Continuous-domain projection applied before quantization.
    SurfaceProfile relax(const SurfaceProfile& p) const {
        if (opt_.fixed_reflect_amplitude) return fix_amplitudes(p, *opt_.fixed_reflect_amplitude);
        return p;
    }

private:
    const SystemConfig& cfg_;
    const ChannelSet& ch_;
    AoOptions opt_;
    double budget_ = 1.0;
};

/// Feasible starting point: MRT toward each cluster's strongest user, then a
/// co-phasing profile per cluster.
inline BeamState initial_beams(const ChannelSet& ch, const ClusterPlan& plan, double beta_r, double power_budget,
                               bool simultaneous, Rng& rng, std::vector<std::string>* diag = nullptr) {
    const int M = ch.n_elements();
    BeamState b;
    const SurfaceProfile flat = uniform_profile(M, beta_r);
    for (int c = 0; c < plan.n_clusters(); ++c) {
        std::vector<RowCvec> rows;
        std::vector<int> members;
        for (int k : plan.clusters[static_cast<std::size_t>(c)])
            if (k >= 0) {
                rows.push_back(user_channel(ch, flat, k));
                members.push_back(k);
            }
        bool fallback = false;
        b.w.push_back(init_active(rows, power_budget, rng, &fallback));
        if (fallback && diag) diag->push_back("cluster " + std::to_string(c) + ": zero channel, random beam");
        b.profile.push_back(init_passive(ch, members, b.w.back(), beta_r));
    }
    if (simultaneous) {
        std::vector<int> all(static_cast<std::size_t>(ch.n_users()));
        for (int k = 0; k < ch.n_users(); ++k) all[k] = k;
        const SurfaceProfile shared = init_passive(ch, all, b.w.front(), beta_r);
        for (auto& p : b.profile) p = shared;
    }
    return b;
}

/// Beams uniform on the power sphere and profiles uniform over the codebooks
/// (reflect amplitude level drawn, transmit level its complement).
inline BeamState random_beams(const ChannelSet& ch, const ClusterPlan& plan, double power_budget, int phase_bits,
                              int amplitude_bits, Rng& rng) {
    const int M = ch.n_elements();
    const int np = 1 << phase_bits;
    const int na = (1 << amplitude_bits) - 1;
    BeamState b;
    for (int c = 0; c < plan.n_clusters(); ++c) {
        b.w.push_back(random_unit_vector(rng, ch.n_antennas()) * std::sqrt(power_budget));
        SurfaceProfile p{Cvec(M), Cvec(M)};
        for (int m = 0; m < M; ++m) {
            const int kr = std::uniform_int_distribution<int>(0, na)(rng);
            const int pr = std::uniform_int_distribution<int>(0, np - 1)(rng);
            const int pt = std::uniform_int_distribution<int>(0, np - 1)(rng);
            p.reflect(m) = std::polar(static_cast<double>(kr) / na, 2.0 * kPi * pr / np);
            p.transmit(m) = std::polar(static_cast<double>(na - kr) / na, 2.0 * kPi * pt / np);
        }
        b.profile.push_back(std::move(p));
    }
    return b;
}

/// Alternating optimization over beamformers, surface profiles and power/time.
inline AoTrace run_ao(const SystemConfig& cfg, const ChannelSet& ch, const AoOptions& opt = {}) {
    using clock = std::chrono::steady_clock;
    AoTrace tr;
    AoEngine eng(cfg, ch, opt);
    Rng init_rng = make_rng(cfg.seed, opt.trial, Stream::init);
    Rng pair_rng = make_rng(cfg.seed, opt.trial, Stream::pairing);
    const int K = ch.n_users();
    const double beta_r = opt.fixed_reflect_amplitude.value_or(cfg.initial_reflect_share);

    // Initial channels: random pairing, MRT + co-phasing, then compose.
    ClusterPlan plan;
    if (opt.pairing == PairingMode::singleton) {
        plan = singleton_plan(K);
    } else {
        const ClusterPlan seed_plan = random_plan(K, pair_rng);
        const BeamState seed_beams = initial_beams(ch, seed_plan, beta_r, eng.power_budget(), opt.simultaneous, init_rng);
        const auto h0 = clustered_channels(ch, seed_plan, seed_beams.profile);
        if (opt.pairing == PairingMode::algorithm1) plan = plan_clusters(h0, ch.user_state);
        else if (opt.pairing == PairingMode::random_order) plan = random_plan(K, pair_rng);
        else plan = random_plan_by_strength(h0, pair_rng);
    }
    for (const auto& d : plan.diagnostics) tr.diagnostics.push_back("pairing: " + d);

    BeamState beams = opt.random_init
                          ? random_beams(ch, plan, eng.power_budget(), cfg.phase_bits, cfg.amplitude_bits, init_rng)
                          : initial_beams(ch, plan, beta_r, eng.power_budget(), opt.simultaneous, init_rng, &tr.diagnostics);
    if (opt.random_init && opt.simultaneous)
        for (auto& p : beams.profile) p = beams.profile.front();

    const bool fixed_alloc = opt.allocation != AllocationMode::optimized;
    ResourcePlan fixed_res;
    if (opt.allocation == AllocationMode::random) fixed_res = random_resources(plan, K, init_rng);
    if (opt.allocation == AllocationMode::fixed_split) fixed_res = split_resources(plan, K, opt.fixed_weak_power);
    auto allocate = [&](const BeamState& b) { return fixed_alloc ? fixed_res : eng.allocate(plan, b); };
    const ResourcePlan* pinned = fixed_alloc ? &fixed_res : nullptr;
    if (cfg.quantize_every_iteration || opt.fixed_reflect_amplitude)
        eng.project_all(beams, plan, pinned);

    ResourcePlan res = allocate(beams);
    double current = eng.report(plan, beams, res).sum_rate;
    tr.initial_sum_rate = current;

    const bool guard = cfg.monotone_guard;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const auto t0 = clock::now();
        AoIterate rec;
        rec.iteration = it;
        const double previous = current;

        if (opt.optimize_active) {
            const StageResult st = optimize_active(eng.context(plan, beams, res));
            rec.active_infeasible = st.infeasible;
            const ResourcePlan r2 = allocate(st.beams);
            const double v = eng.report(plan, st.beams, r2).sum_rate;
            if (!guard || v >= current) {
                beams = st.beams;
                res = r2;
                current = v;
                rec.active_accepted = true;
            }
        }

        double continuous = current;
        if (opt.optimize_passive) {
            const StageResult st = optimize_passive(eng.context(plan, beams, res));
            rec.passive_infeasible = st.infeasible;
            BeamState cand = st.beams;
            for (auto& p : cand.profile) p = eng.relax(p);
            const ResourcePlan r2 = allocate(cand);
            const double v = eng.report(plan, cand, r2).sum_rate;
            if (!guard || v >= current) {
                beams = cand;
                res = r2;
                continuous = v;
                rec.passive_accepted = true;
            }
        }
        if (cfg.quantize_every_iteration || opt.fixed_reflect_amplitude || it == cfg.max_iterations) {
            eng.project_all(beams, plan, pinned);
            res = allocate(beams);
        }
        current = eng.report(plan, beams, res).sum_rate;
        rec.continuous_sum_rate = continuous;
        rec.quantization_gap = std::max(0.0, continuous - current);
        rec.sum_rate = current;
        rec.qos_feasible = res.feasible;
        rec.qos_scale = res.qos_scale;
        const RateReport rep = eng.report(plan, beams, res);
        rec.min_qos_residual = rep.qos_residuals.empty()
                                   ? 0.0
                                   : *std::min_element(rep.qos_residuals.begin(), rep.qos_residuals.end());
        if (opt.record_timing) rec.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        tr.iterations.push_back(rec);

        const double d = current - previous;
        if (d * d <= cfg.convergence_threshold) {
            if (!cfg.quantize_every_iteration && !opt.fixed_reflect_amplitude && it < cfg.max_iterations) {
                eng.project_all(beams, plan, pinned);
                res = allocate(beams);
                current = eng.report(plan, beams, res).sum_rate;
                tr.iterations.back().sum_rate = current;
            }
            tr.status = AoStatus::converged;
            break;
        }
    }

    tr.plan = plan;
    tr.beams = beams;
    tr.resources = res;
    tr.report = eng.report(plan, beams, res);
    tr.sum_rate = tr.report.sum_rate;
    const auto links = detail::user_links(ch, plan, beams, cfg.noise_power, opt.simultaneous);
    for (int c = 0; c < plan.n_clusters(); ++c) {
        const auto m = members_by_order(plan, c);
        if (m.size() == 2 && links[static_cast<std::size_t>(m[1])].gain < links[static_cast<std::size_t>(m[0])].gain)
            ++tr.order_violations;
    }
    for (const auto& d : res.diagnostics) tr.diagnostics.push_back("allocation: " + d);
    return tr;
}

} // namespace starnoma
