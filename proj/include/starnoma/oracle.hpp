// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force references for tests. Deliberately independent of the modules they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace starnoma::oracle {

struct PairingResult {
    std::vector<int> column_of; // weak user matched to each strong user
    double value = 0.0;          // sum of scores, accumulated in row order
    int allowed_pairs = 0;       // pairs with allowed(i, column_of[i])
    long long matchings = 0;     // number of matchings enumerated
};

using Mask = std::vector<std::vector<char>>;

namespace detail {

inline double row_order_value(const Rmat& score, const std::vector<int>& col) {
    double v = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) v += score(static_cast<Eigen::Index>(i), col[i]);
    return v;
}

inline int allowed_count(const Mask& allowed, const std::vector<int>& col) {
    int n = 0;
    for (std::size_t i = 0; i < col.size(); ++i) n += allowed[i][static_cast<std::size_t>(col[i])] ? 1 : 0;
    return n;
}

inline bool better(int n_allowed, double value, const PairingResult& best) {
    if (best.column_of.empty()) return true;
    if (n_allowed != best.allowed_pairs) return n_allowed > best.allowed_pairs;
    return value > best.value;
}

inline void recurse(const Rmat& score, const Mask& allowed, std::vector<int>& col, std::vector<char>& taken,
                    std::size_t row, PairingResult& best) {
    const std::size_t n = col.size();
    if (row == n) {
        ++best.matchings;
        const int a = allowed_count(allowed, col);
        const double v = row_order_value(score, col);
        if (better(a, v, best)) {
            const long long m = best.matchings;
            best = {col, v, a, m};
        }
        return;
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (taken[j]) continue;
        taken[j] = 1;
        col[row] = static_cast<int>(j);
        recurse(score, allowed, col, taken, row + 1, best);
        taken[j] = 0;
    }
}

} // namespace detail

/// Exhaustive matching of strong rows to weak columns: most allowed pairs first,
/// then the largest total score. An empty mask allows every pair.
inline PairingResult brute_force_pairing(const Rmat& score, Mask allowed = {}) {
    const auto n = static_cast<std::size_t>(score.rows());
    if (score.cols() != score.rows()) throw InvalidArgument("brute_force_pairing: square score required");
    if (n > 4) throw InvalidArgument("brute_force_pairing: at most 8 users");
    if (allowed.empty()) allowed.assign(n, std::vector<char>(n, 1));
    PairingResult best;
    std::vector<int> col(n, 0);
    std::vector<char> taken(n, 0);
    detail::recurse(score, allowed, col, taken, 0, best);
    return best;
}

/// Same search in lexicographic permutation order, as an independent cross-check.
inline PairingResult brute_force_pairing_lex(const Rmat& score, Mask allowed = {}) {
    const auto n = static_cast<std::size_t>(score.rows());
    if (score.cols() != score.rows()) throw InvalidArgument("brute_force_pairing_lex: square score required");
    if (allowed.empty()) allowed.assign(n, std::vector<char>(n, 1));
    std::vector<int> col(n);
    std::iota(col.begin(), col.end(), 0);
    PairingResult best;
    long long count = 0;
    do {
        ++count;
        const int a = detail::allowed_count(allowed, col);
        const double v = detail::row_order_value(score, col);
        if (detail::better(a, v, best)) best = {col, v, a, 0};
    } while (std::next_permutation(col.begin(), col.end()));
    best.matchings = count;
    return best;
}

/// Number of perfect matchings of 2n users into pairs: (2n - 1)!!.
inline long long perfect_matchings(int n_users) {
    long long r = 1;
    for (int k = n_users - 1; k > 1; k -= 2) r *= k;
    return r;
}

/// Bisection to an absolute bracket width of `tol`.
inline double numeric_root(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw InvalidArgument("numeric_root: no sign change on bracket");
    for (int it = 0; it < 2000 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct GridBeam {
    Cvec w;
    double value = -std::numeric_limits<double>::infinity();
};

/// Dense search over w in the ball ||w||^2 <= P for dim <= 2:
/// w = sqrt(P) r (cos a, sin a e^{j phi}), with r, a, phi on uniform grids.
/// The common phase of w is irrelevant to every |h w|^2 and is fixed to zero.
inline GridBeam grid_beamformer(const std::function<double(const Cvec&)>& objective, int dim, double power,
                                int resolution, int radii = 1) {
    if (dim < 1 || dim > 2) throw InvalidArgument("grid_beamformer: dim must be 1 or 2");
    if (resolution < 2 || radii < 1) throw InvalidArgument("grid_beamformer: bad resolution");
    GridBeam best;
    const double root_p = std::sqrt(power);
    for (int ir = 1; ir <= radii; ++ir) {
        const double r = root_p * ir / radii;
        if (dim == 1) {
            Cvec w(1);
            w(0) = r;
            const double v = objective(w);
            if (v > best.value) best = {w, v};
            continue;
        }
        for (int ia = 0; ia <= resolution; ++ia) {
            const double a = 0.5 * kPi * ia / resolution;
            for (int ip = 0; ip < 2 * resolution; ++ip) {
                const double phi = kPi * ip / resolution;
                Cvec w(2);
                w(0) = r * std::cos(a);
                w(1) = std::polar(r * std::sin(a), phi);
                const double v = objective(w);
                if (v > best.value) best = {w, v};
            }
        }
    }
    return best;
}

/// Local refinement of a 2-antenna unit-power beam by shrinking pattern search in (a, phi).
inline GridBeam refine_beam(const std::function<double(const Cvec&)>& objective, const GridBeam& start, double power,
                            double step, double min_step = 1e-7) {
    if (start.w.size() != 2) return start;
    const double root_p = std::sqrt(power);
    double a = std::atan2(std::abs(start.w(1)), std::abs(start.w(0)));
    double phi = std::arg(start.w(1)) - std::arg(start.w(0));
    auto make = [&](double aa, double pp) {
        Cvec w(2);
        w(0) = root_p * std::cos(aa);
        w(1) = std::polar(root_p * std::sin(aa), pp);
        return w;
    };
    GridBeam best{make(a, phi), objective(make(a, phi))};
    while (step > min_step) {
        bool moved = false;
        for (const auto& d : {std::pair{1.0, 0.0}, std::pair{-1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{0.0, -1.0}}) {
            const double na = std::clamp(a + d.first * step, 0.0, 0.5 * kPi);
            const double np = phi + d.second * step;
            const Cvec w = make(na, np);
            const double v = objective(w);
            if (v > best.value) {
                best = {w, v};
                a = na;
                phi = np;
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }
    return best;
}

struct CodebookProfile {
    Cvec reflect;
    Cvec transmit;
    double value = -std::numeric_limits<double>::infinity();
    long long evaluated = 0;
};

/// Full enumeration of coupled codebook profiles for M <= 2: per element a reflect
/// amplitude level k (transmit level 2^B2 - 1 - k) and two phase levels.
/// With `fix_first_phases`, element 0 has both phases pinned to zero; valid when the
/// objective depends only on |h w| (a common rotation of a face leaves it unchanged).
inline CodebookProfile exhaustive_codebook(const std::function<double(const Cvec&, const Cvec&)>& objective, int M,
                                           int phase_bits, int amplitude_bits, bool fix_first_phases = false) {
    if (M < 1 || M > 2) throw InvalidArgument("exhaustive_codebook: M must be 1 or 2");
    if (phase_bits < 1 || amplitude_bits < 1 || phase_bits + amplitude_bits > 8)
        throw InvalidArgument("exhaustive_codebook: combinatorial budget exceeded");
    const int np = 1 << phase_bits;
    const int na = (1 << amplitude_bits) - 1;
    std::vector<std::array<int, 3>> per_element; // (amplitude index, reflect phase, transmit phase)
    for (int k = 0; k <= na; ++k)
        for (int pr = 0; pr < np; ++pr)
            for (int pt = 0; pt < np; ++pt) per_element.push_back({k, pr, pt});
    std::vector<std::array<int, 3>> first;
    for (const auto& e : per_element)
        if (!fix_first_phases || (e[1] == 0 && e[2] == 0)) first.push_back(e);

    CodebookProfile best;
    Cvec r(M), t(M);
    auto set = [&](int m, const std::array<int, 3>& e) {
        r(m) = std::polar(static_cast<double>(e[0]) / na, 2.0 * kPi * e[1] / np);
        t(m) = std::polar(static_cast<double>(na - e[0]) / na, 2.0 * kPi * e[2] / np);
    };
    auto consider = [&]() {
        ++best.evaluated;
        const double v = objective(r, t);
        if (v > best.value) {
            best.value = v;
            best.reflect = r;
            best.transmit = t;
        }
    };
    for (const auto& e0 : first) {
        set(0, e0);
        if (M == 1) {
            consider();
            continue;
        }
        for (const auto& e1 : per_element) {
            set(1, e1);
            consider();
        }
    }
    return best;
}

/// Inputs of the tiny joint problem: one two-user cluster served for the whole frame.
struct TinyInstance {
    Cmat H;                     // M x N_t
    std::vector<Cvec> g;        // two surface-to-user vectors
    std::vector<bool> reflect;  // side of each user
    double noise = 1.0;
    double power = 1.0;
    std::vector<double> qos;    // two targets
    int phase_bits = 2;
    int amplitude_bits = 2;
    int first_decoded = -1;     // user decoded first; -1 tries both orders
};

/// End-to-end row of user k written as explicit sums: h_n = sum_m conj(g_m) u_m H(m, n).
inline RowCvec tiny_channel(const TinyInstance& in, int k, const Cvec& reflect, const Cvec& transmit) {
    const Cvec& u = in.reflect[static_cast<std::size_t>(k)] ? reflect : transmit;
    RowCvec h = RowCvec::Zero(in.H.cols());
    for (Eigen::Index n = 0; n < in.H.cols(); ++n)
        for (Eigen::Index m = 0; m < in.H.rows(); ++m)
            h(n) += std::conj(in.g[static_cast<std::size_t>(k)](m)) * u(m) * in.H(m, n);
    return h;
}

/// Best sum-rate of a two-user cluster at t = 1 for fixed gains: the first-decoded user
/// gets exactly its target and the rest of the power goes to the other; both orders tried.
/// Returns -inf when neither order meets both targets. `only_first` in {0, 1} fixes the order.
inline double tiny_sum_rate(double g0, double g1, double noise, double r0, double r1, int only_first = -1) {
    double best = -std::numeric_limits<double>::infinity();
    const double g[2] = {g0, g1};
    const double r[2] = {r0, r1};
    for (int first = 0; first < 2; ++first) {
        if (only_first >= 0 && first != only_first) continue;
        const int second = 1 - first;
        if (!(g[first] > 0.0) || !(g[second] > 0.0)) continue;
        const double p = (1.0 - std::pow(2.0, -r[first])) * (1.0 + noise / g[first]);
        if (p > 1.0) continue;
        const double rate2 = std::log2(1.0 + g[second] * (1.0 - p) / noise);
        if (rate2 < r[second]) continue;
        best = std::max(best, r[first] + rate2);
    }
    return best;
}

struct TinyOptimum {
    double value = -std::numeric_limits<double>::infinity();
    Cvec w;
    Cvec reflect;
    Cvec transmit;
};

/// Joint optimum over the codebook profiles and a refined beam grid.
inline TinyOptimum tiny_joint_optimum(const TinyInstance& in, int resolution = 24, int refine_top = 6) {
    const int M = static_cast<int>(in.H.rows());
    const int dim = static_cast<int>(in.H.cols());
    struct Cand {
        double value;
        Cvec r, t, w;
    };
    std::vector<Cand> cands;
    auto beam_objective = [&](const RowCvec& h0, const RowCvec& h1) {
        return [&in, h0, h1](const Cvec& w) {
            cd a(0.0, 0.0), b(0.0, 0.0);
            for (Eigen::Index n = 0; n < w.size(); ++n) {
                a += h0(n) * w(n);
                b += h1(n) * w(n);
            }
            return tiny_sum_rate(std::norm(a), std::norm(b), in.noise, in.qos[0], in.qos[1], in.first_decoded);
        };
    };
    exhaustive_codebook(
        [&](const Cvec& r, const Cvec& t) {
            const RowCvec h0 = tiny_channel(in, 0, r, t);
            const RowCvec h1 = tiny_channel(in, 1, r, t);
            const GridBeam gb = grid_beamformer(beam_objective(h0, h1), dim, in.power, resolution);
            cands.push_back({gb.value, r, t, gb.w});
            return gb.value;
        },
        M, in.phase_bits, in.amplitude_bits, true);
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.value > b.value; });
    TinyOptimum best;
    const int top = std::min<int>(refine_top, static_cast<int>(cands.size()));
    for (int i = 0; i < top; ++i) {
        if (!std::isfinite(cands[i].value)) break;
        const RowCvec h0 = tiny_channel(in, 0, cands[i].r, cands[i].t);
        const RowCvec h1 = tiny_channel(in, 1, cands[i].r, cands[i].t);
        const GridBeam gb = refine_beam(beam_objective(h0, h1), {cands[i].w, cands[i].value}, in.power,
                                        0.5 * kPi / resolution);
        if (gb.value > best.value) best = {gb.value, gb.w, cands[i].r, cands[i].t};
    }
    return best;
}

} // namespace starnoma::oracle
