// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "core.hpp"

namespace starnoma {

// ---------------------------------------------------------------------------
// Taylor surrogates. For a row h, |h x|^2 is convex in x; its first-order
// expansion at x~ is a global under-estimator.
// ---------------------------------------------------------------------------

/// x -> 2 Re(conj(h x~) h x) - |h x~|^2, tight at x~ and <= |h x|^2 everywhere.
struct QuadraticLowerBound {
    RowCvec h;
    cd anchor; // h x~

    double operator()(const Cvec& x) const {
        const cd v = apply_row(h, x);
        return 2.0 * (std::conj(anchor) * v).real() - std::norm(anchor);
    }
};

inline QuadraticLowerBound taylor_lb_quadratic(const RowCvec& h, const Cvec& x_tilde) {
    return {h, apply_row(h, x_tilde)};
}

/// (x, aux) -> 2 Re(conj(h x~) h x)/aux~ - (|h x~|/aux~)^2 aux, tight at (x~, aux~) and
/// <= |h x|^2 / aux for every aux > 0.
struct RatioLowerBound {
    RowCvec h;
    cd anchor;
    double aux_tilde;

    double operator()(const Cvec& x, double aux) const {
        const cd v = apply_row(h, x);
        return 2.0 * (std::conj(anchor) * v).real() / aux_tilde - std::norm(anchor) / (aux_tilde * aux_tilde) * aux;
    }
};

inline RatioLowerBound taylor_lb_ratio(const RowCvec& h, const Cvec& x_tilde, double aux_tilde) {
    if (!(aux_tilde > 0.0)) throw InvalidArgument("taylor_lb_ratio: expansion auxiliary must be positive");
    return {h, apply_row(h, x_tilde), aux_tilde};
}

// ---------------------------------------------------------------------------
// Generic barrier problem over a real vector z.
// Every constraint has the shape
//   f(z) = c0 + lin.z - sum_q s_q (r_q.z)^2 - ball * sum_{i in S} z_i^2 >= 0,
// which is concave, so -log f is convex.
// ---------------------------------------------------------------------------

struct SparseVec {
    std::vector<int> idx;
    std::vector<double> val;

    void add(int i, double v) {
        if (v == 0.0) return;
        idx.push_back(i);
        val.push_back(v);
    }
    double dot(const Rvec& z) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) acc += val[k] * z(idx[k]);
        return acc;
    }
    bool empty() const { return idx.empty(); }
};

enum class ConstraintKind : std::uint8_t { qos, ratio, interference, power, coupling, order, phase1_cap };

inline const char* to_string(ConstraintKind k) {
    switch (k) {
    case ConstraintKind::qos: return "qos";
    case ConstraintKind::ratio: return "ratio";
    case ConstraintKind::interference: return "interference";
    case ConstraintKind::power: return "power";
    case ConstraintKind::coupling: return "coupling";
    case ConstraintKind::order: return "order";
    case ConstraintKind::phase1_cap: return "phase1_cap";
    }
    return "?";
}

struct ConcaveConstraint {
    ConstraintKind kind = ConstraintKind::qos;
    int user = -1;
    double c0 = 0.0;
    SparseVec lin;
    std::vector<double> quad_scale;
    std::vector<SparseVec> quad_dir;
    double ball = 0.0;
    std::vector<int> ball_idx;
    bool soft = true; // participates in the phase-I slack

    double value(const Rvec& z) const {
        double f = c0 + lin.dot(z);
        for (std::size_t q = 0; q < quad_dir.size(); ++q) {
            const double t = quad_dir[q].dot(z);
            f -= quad_scale[q] * t * t;
        }
        for (int i : ball_idx) f -= ball * z(i) * z(i);
        return f;
    }

    /// Adds scale * grad f into g.
    void add_gradient(const Rvec& z, double scale, Rvec& g) const {
        for (std::size_t k = 0; k < lin.idx.size(); ++k) g(lin.idx[k]) += scale * lin.val[k];
        for (std::size_t q = 0; q < quad_dir.size(); ++q) {
            const double t = -2.0 * quad_scale[q] * quad_dir[q].dot(z) * scale;
            for (std::size_t k = 0; k < quad_dir[q].idx.size(); ++k) g(quad_dir[q].idx[k]) += t * quad_dir[q].val[k];
        }
        for (int i : ball_idx) g(i) -= scale * 2.0 * ball * z(i);
    }

    std::vector<int> support() const {
        std::vector<int> s = lin.idx;
        for (const auto& d : quad_dir) s.insert(s.end(), d.idx.begin(), d.idx.end());
        s.insert(s.end(), ball_idx.begin(), ball_idx.end());
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        return s;
    }
};

/// maximize  sum_k weight_k * ln(1 + z[log_index_k]) + linear_objective.z
/// subject to every constraint >= 0. Indices below n_block_vars are grouped
/// into `blocks` (every index belongs to exactly one block); the remaining
/// "core" indices are treated as one dense block.
struct BarrierProblem {
    int n_vars = 0;
    int n_block_vars = 0;
    std::vector<std::vector<int>> blocks;
    std::vector<int> log_index;
    std::vector<double> log_weight; // already divided by ln 2 when the caller wants bits
    SparseVec linear_objective;
    std::vector<ConcaveConstraint> constraints;

    double objective(const Rvec& z) const {
        double f = linear_objective.dot(z);
        for (std::size_t k = 0; k < log_index.size(); ++k) f += log_weight[k] * std::log1p(z(log_index[k]));
        return f;
    }
    bool in_domain(const Rvec& z) const {
        for (int i : log_index)
            if (!(z(i) > -1.0)) return false;
        return true;
    }
};

enum class SolverStatus : std::uint8_t { optimal, max_iter, infeasible };

inline const char* to_string(SolverStatus s) {
    switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::max_iter: return "max_iter";
    case SolverStatus::infeasible: return "infeasible";
    }
    return "?";
}

struct SolverOptions {
    double kkt_tolerance = 1e-7;
    double mu = 10.0;
    double t0 = 1.0;
    double newton_tolerance = 1e-9;
    int max_outer = 50;
    int max_inner = 100;
    double infeasible_slack = -1e-8;
    double armijo = 0.25;
    enum class Linear : std::uint8_t { automatic, dense, structured } linear = Linear::automatic;
    int dense_threshold = 48;
};

struct BarrierResult {
    Rvec z;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0; // Newton steps
    int outer_iterations = 0;
    SolverStatus status = SolverStatus::optimal;
    bool degenerate = false;
    std::vector<double> outer_objectives;
    std::string note;
};

namespace detail {

/// Hessian of the barrier in the form blockdiag(D_blocks, D_core) + V V^T.
struct StructuredHessian {
    std::vector<Rmat> block;
    Rmat core;
    std::vector<Rvec> lowrank; // full-length columns
};

class BarrierSystem {
public:
    BarrierSystem(const BarrierProblem& p, const SolverOptions& opt) : p_(p), opt_(opt) {
        block_of_.assign(static_cast<std::size_t>(p.n_vars), -1);
        pos_in_block_.assign(static_cast<std::size_t>(p.n_vars), 0);
        for (std::size_t b = 0; b < p.blocks.size(); ++b)
            for (std::size_t j = 0; j < p.blocks[b].size(); ++j) {
                block_of_[static_cast<std::size_t>(p.blocks[b][j])] = static_cast<int>(b);
                pos_in_block_[static_cast<std::size_t>(p.blocks[b][j])] = static_cast<int>(j);
            }
        const int core_block = static_cast<int>(p.blocks.size());
        for (int i = p.n_block_vars; i < p.n_vars; ++i) {
            block_of_[static_cast<std::size_t>(i)] = core_block;
            pos_in_block_[static_cast<std::size_t>(i)] = i - p.n_block_vars;
        }
        for (int i = 0; i < p.n_vars; ++i)
            if (block_of_[static_cast<std::size_t>(i)] < 0) throw InvalidArgument("BarrierProblem: index outside every block");
        local_block_.reserve(p.constraints.size());
        for (const auto& c : p.constraints) {
            const auto s = c.support();
            int b = s.empty() ? core_block : block_of_[static_cast<std::size_t>(s.front())];
            for (int i : s)
                if (block_of_[static_cast<std::size_t>(i)] != b) b = -1;
            local_block_.push_back(b);
        }
        use_dense_ = opt.linear == SolverOptions::Linear::dense ||
                     (opt.linear == SolverOptions::Linear::automatic && p.n_vars <= opt.dense_threshold);
    }

    /// Barrier value t*(-objective) - sum log f; +inf outside the domain.
    double phi(const Rvec& z, double t) const {
        if (!p_.in_domain(z)) return std::numeric_limits<double>::infinity();
        double acc = -t * p_.objective(z);
        for (const auto& c : p_.constraints) {
            const double f = c.value(z);
            if (!(f > 0.0)) return std::numeric_limits<double>::infinity();
            acc -= std::log(f);
        }
        return acc;
    }

    bool strictly_feasible(const Rvec& z) const {
        if (!p_.in_domain(z)) return false;
        for (const auto& c : p_.constraints)
            if (!(c.value(z) > 0.0)) return false;
        return true;
    }

    Rvec gradient(const Rvec& z, double t) const {
        Rvec g = Rvec::Zero(p_.n_vars);
        for (std::size_t k = 0; k < p_.linear_objective.idx.size(); ++k)
            g(p_.linear_objective.idx[k]) -= t * p_.linear_objective.val[k];
        for (std::size_t k = 0; k < p_.log_index.size(); ++k) {
            const int i = p_.log_index[k];
            g(i) -= t * p_.log_weight[k] / (1.0 + z(i));
        }
        for (const auto& c : p_.constraints) c.add_gradient(z, -1.0 / c.value(z), g);
        return g;
    }

    /// Newton direction solving H d = -g.
    Rvec newton_direction(const Rvec& z, double t, const Rvec& g, bool* used_fallback = nullptr) const {
        StructuredHessian h = assemble(z, t);
        if (used_fallback) *used_fallback = false;
        if (!use_dense_) {
            Rvec d;
            if (solve_structured(h, -g, d)) return d;
            if (used_fallback) *used_fallback = true;
        }
        return solve_dense(h, -g);
    }

    bool dense() const { return use_dense_; }

    Rmat dense_hessian(const Rvec& z, double t) const { return to_dense(assemble(z, t)); }

private:
    StructuredHessian assemble(const Rvec& z, double t) const {
        StructuredHessian h;
        h.block.reserve(p_.blocks.size());
        for (const auto& b : p_.blocks) h.block.push_back(Rmat::Zero(static_cast<Eigen::Index>(b.size()), static_cast<Eigen::Index>(b.size())));
        const int nc = p_.n_vars - p_.n_block_vars;
        h.core = Rmat::Zero(nc, nc);
        for (std::size_t k = 0; k < p_.log_index.size(); ++k) {
            const int i = p_.log_index[k];
            const double d = 1.0 + z(i);
            add_entry(h, i, i, t * p_.log_weight[k] / (d * d));
        }
        Rvec grad = Rvec::Zero(p_.n_vars);
        for (std::size_t ci = 0; ci < p_.constraints.size(); ++ci) {
            const auto& c = p_.constraints[ci];
            const double f = c.value(z);
            grad.setZero();
            c.add_gradient(z, 1.0, grad);
            for (int i : c.ball_idx) add_entry(h, i, i, 2.0 * c.ball / f);
            if (local_block_[ci] >= 0) {
                const auto s = c.support();
                for (int a : s)
                    for (int b : s) add_entry(h, a, b, grad(a) * grad(b) / (f * f));
                for (std::size_t q = 0; q < c.quad_dir.size(); ++q) {
                    const auto& r = c.quad_dir[q];
                    const double w = 2.0 * c.quad_scale[q] / f;
                    for (std::size_t a = 0; a < r.idx.size(); ++a)
                        for (std::size_t b = 0; b < r.idx.size(); ++b) add_entry(h, r.idx[a], r.idx[b], w * r.val[a] * r.val[b]);
                }
            } else {
                h.lowrank.push_back(grad / f);
                for (std::size_t q = 0; q < c.quad_dir.size(); ++q) {
                    const auto& r = c.quad_dir[q];
                    Rvec v = Rvec::Zero(p_.n_vars);
                    const double w = std::sqrt(2.0 * c.quad_scale[q] / f);
                    for (std::size_t a = 0; a < r.idx.size(); ++a) v(r.idx[a]) += w * r.val[a];
                    h.lowrank.push_back(std::move(v));
                }
            }
        }
        return h;
    }

    void add_entry(StructuredHessian& h, int a, int b, double v) const {
        const int ba = block_of_[static_cast<std::size_t>(a)];
        const int pa = pos_in_block_[static_cast<std::size_t>(a)];
        const int pb = pos_in_block_[static_cast<std::size_t>(b)];
        if (ba == static_cast<int>(p_.blocks.size())) h.core(pa, pb) += v;
        else h.block[static_cast<std::size_t>(ba)](pa, pb) += v;
    }

    Rmat to_dense(const StructuredHessian& h) const {
        Rmat H = Rmat::Zero(p_.n_vars, p_.n_vars);
        for (std::size_t b = 0; b < p_.blocks.size(); ++b)
            for (std::size_t i = 0; i < p_.blocks[b].size(); ++i)
                for (std::size_t j = 0; j < p_.blocks[b].size(); ++j)
                    H(p_.blocks[b][i], p_.blocks[b][j]) += h.block[b](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const int nb = p_.n_block_vars;
        H.bottomRightCorner(p_.n_vars - nb, p_.n_vars - nb) += h.core;
        for (const auto& v : h.lowrank) H.noalias() += v * v.transpose();
        return H;
    }

    Rvec solve_dense(const StructuredHessian& h, const Rvec& rhs) const {
        Rmat H = to_dense(h);
        Eigen::LDLT<Rmat> ldlt(H);
        Rvec d = ldlt.solve(rhs);
        if (ldlt.info() == Eigen::Success && d.allFinite()) return d;
        const double ridge = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
        H.diagonal().array() += ridge;
        return Eigen::LDLT<Rmat>(H).solve(rhs);
    }

    bool solve_structured(const StructuredHessian& h, const Rvec& rhs, Rvec& out) const {
        const int nb = p_.n_block_vars;
        const int nc = p_.n_vars - nb;
        const auto r = static_cast<Eigen::Index>(h.lowrank.size());
        std::vector<Eigen::LLT<Rmat>> fac;
        fac.reserve(h.block.size());
        for (const auto& b : h.block) {
            fac.emplace_back(b);
            if (fac.back().info() != Eigen::Success) return false;
        }
        auto apply_dinv = [&](const Rvec& y) {
            Rvec x = Rvec::Zero(nb);
            for (std::size_t b = 0; b < p_.blocks.size(); ++b) {
                const auto& idx = p_.blocks[b];
                Rvec loc(static_cast<Eigen::Index>(idx.size()));
                for (std::size_t i = 0; i < idx.size(); ++i) loc(static_cast<Eigen::Index>(i)) = y(idx[i]);
                loc = fac[b].solve(loc);
                for (std::size_t i = 0; i < idx.size(); ++i) x(idx[i]) = loc(static_cast<Eigen::Index>(i));
            }
            return x;
        };
        Rmat Vx(nb, r), Vc(nc, r);
        for (Eigen::Index j = 0; j < r; ++j) {
            Vx.col(j) = h.lowrank[static_cast<std::size_t>(j)].head(nb);
            Vc.col(j) = h.lowrank[static_cast<std::size_t>(j)].tail(nc);
        }
        Rmat G(nb, r);
        for (Eigen::Index j = 0; j < r; ++j) G.col(j) = apply_dinv(Vx.col(j));
        Rmat cap = Rmat::Identity(r, r) + Vx.transpose() * G;
        Eigen::LDLT<Rmat> cap_f(cap);
        if (cap_f.info() != Eigen::Success) return false;
        auto apply_ainv = [&](const Rvec& y) {
            Rvec x = apply_dinv(y);
            if (r > 0) x -= G * cap_f.solve(Vx.transpose() * x);
            return x;
        };
        const Rvec gx = rhs.head(nb);
        const Rvec gc = rhs.tail(nc);
        const Rvec y = apply_ainv(gx);
        Rvec dc = Rvec::Zero(nc);
        if (nc > 0) {
            Rmat S = h.core;
            if (r > 0) S += Vc * cap_f.solve(Vc.transpose());
            Eigen::LDLT<Rmat> s_f(S);
            if (s_f.info() != Eigen::Success) return false;
            Rvec rc = gc;
            if (r > 0) rc -= Vc * (Vx.transpose() * y);
            dc = s_f.solve(rc);
        }
        Rvec dx = y;
        if (r > 0 && nc > 0) dx -= G * cap_f.solve(Vc.transpose() * dc);
        out.resize(p_.n_vars);
        out.head(nb) = dx;
        out.tail(nc) = dc;
        return out.allFinite();
    }

    const BarrierProblem& p_;
    SolverOptions opt_;
    std::vector<int> block_of_;
    std::vector<int> pos_in_block_;
    std::vector<int> local_block_;
    bool use_dense_ = false;
};

} // namespace detail

/// Log-barrier interior point with damped Newton steps. z0 must be strictly
/// feasible; use solve_with_phase1 otherwise.
inline BarrierResult solve_barrier(const BarrierProblem& p, const Rvec& z0, const SolverOptions& opt = {}) {
    BarrierResult res;
    res.z = z0;
    detail::BarrierSystem sys(p, opt);
    if (!sys.strictly_feasible(z0)) {
        res.status = SolverStatus::infeasible;
        res.note = "start point not strictly feasible";
        return res;
    }
    const double m = static_cast<double>(std::max<std::size_t>(1, p.constraints.size()));
    double t = opt.t0;
    Rvec z = z0;
    bool converged = false;
    for (int outer = 0; outer < opt.max_outer; ++outer) {
        ++res.outer_iterations;
        for (int inner = 0; inner < opt.max_inner; ++inner) {
            const Rvec g = sys.gradient(z, t);
            const Rvec d = sys.newton_direction(z, t, g);
            const double lambda2 = -g.dot(d);
            ++res.iterations;
            if (!(lambda2 >= 0.0) || !d.allFinite()) break;
            if (lambda2 / 2.0 <= opt.newton_tolerance) break;
            const double phi0 = sys.phi(z, t);
            double step = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 80; ++ls) {
                const Rvec zn = z + step * d;
                const double phin = sys.phi(zn, t);
                if (std::isfinite(phin) && phin <= phi0 + opt.armijo * step * g.dot(d)) {
                    z = zn;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        res.outer_objectives.push_back(p.objective(z));
        if (m / t < opt.kkt_tolerance) {
            converged = true;
            break;
        }
        t *= opt.mu;
    }
    res.z = z;
    res.objective = p.objective(z);
    const Rvec g = sys.gradient(z, t);
    res.kkt_residual = std::max(m / t, g.norm() / t);
    res.status = converged ? SolverStatus::optimal : SolverStatus::max_iter;
    return res;
}

/// Phase I (maximize a common slack s on soft constraints) followed by phase II.
/// Returns `infeasible` when the best slack is below opt.infeasible_slack, and
/// returns z0 itself, flagged degenerate, when no strictly interior point exists.
inline BarrierResult solve_with_phase1(const BarrierProblem& p, const Rvec& z0, const SolverOptions& opt = {}) {
    detail::BarrierSystem sys(p, opt);
    if (sys.strictly_feasible(z0)) return solve_barrier(p, z0, opt);

    BarrierProblem q = p;
    const int s_idx = p.n_vars;
    q.n_vars = p.n_vars + 1;
    q.log_index.clear();
    q.log_weight.clear();
    q.linear_objective = {};
    q.linear_objective.add(s_idx, 1.0);
    double min_soft = std::numeric_limits<double>::infinity();
    for (auto& c : q.constraints) {
        if (!c.soft) continue;
        c.lin.add(s_idx, -1.0);
        min_soft = std::min(min_soft, c.value(z0));
    }
    for (std::size_t k = 0; k < p.log_index.size(); ++k) {
        ConcaveConstraint dom;
        dom.kind = ConstraintKind::phase1_cap;
        dom.soft = false;
        dom.c0 = 1.0;
        dom.lin.add(p.log_index[k], 1.0);
        q.constraints.push_back(dom);
    }
    ConcaveConstraint cap;
    cap.kind = ConstraintKind::phase1_cap;
    cap.soft = false;
    cap.c0 = 1.0;
    cap.lin.add(s_idx, -1.0);
    q.constraints.push_back(cap);

    Rvec w0(q.n_vars);
    w0.head(p.n_vars) = z0;
    w0(s_idx) = std::min(min_soft, 1.0) - 1.0;

    BarrierResult res;
    res.z = z0;
    BarrierResult ph1 = solve_barrier(q, w0, opt);
    if (ph1.status == SolverStatus::infeasible) {
        res.status = SolverStatus::infeasible;
        res.note = "phase I could not start: hard constraints violated";
        return res;
    }
    res.iterations = ph1.iterations;
    const double slack = ph1.z(s_idx);
    if (slack < opt.infeasible_slack) {
        res.status = SolverStatus::infeasible;
        res.note = "phase I slack " + std::to_string(slack);
        return res;
    }
    const Rvec start = ph1.z.head(p.n_vars);
    if (!sys.strictly_feasible(start)) {
        res.degenerate = true;
        res.objective = p.in_domain(z0) ? p.objective(z0) : -std::numeric_limits<double>::infinity();
        res.status = SolverStatus::optimal;
        res.note = "empty interior; warm start returned";
        return res;
    }
    BarrierResult ph2 = solve_barrier(p, start, opt);
    ph2.iterations += res.iterations;
    return ph2;
}

// ---------------------------------------------------------------------------
// SINR subproblem shared by the active and passive beamforming stages.
// Decision: complex x (dim n); per user: gamma_k, nu_k.
//   maximize   sum_k weight_k * log2(1 + gamma_k)
//   subject to rho_k * T_k(x) >= r_k * noise_k                  (qos)
//              power_k * T_k(x, nu_k) >= gamma_k                 (ratio)
//              intra_k * |h_k x|^2 + noise_k <= nu_k             (interference)
//              ||x||^2 <= 1                                      (power, optional)
//              |x_a|^2 + |x_b|^2 <= 1 for each coupled pair      (coupling)
//              T_j(x) >= |h_i x|^2 for each ordered pair (i, j)  (order, optional)
// All quantities are normalized by the noise power.
// ---------------------------------------------------------------------------

struct UserTerm {
    RowCvec h;
    double power = 0.0;   // p_k
    double intra = 0.0;   // sum of powers decoded after k
    double qos_snr = 0.0; // r_k = 2^{R_min} - 1; 0 disables the qos constraint
    double noise = 1.0;   // normalized noise plus any interference held fixed
    double weight = 1.0;  // time fraction t_c
};

struct SinrProblem {
    int dim = 0;
    std::vector<UserTerm> users;
    bool norm_ball = false;
    std::vector<std::pair<int, int>> couplings;
    std::vector<std::pair<int, int>> order_pairs; // (weaker i, stronger j): enforce |h_j x|^2 >= |h_i x|^2
};

struct SinrSubproblem {
    BarrierProblem barrier;
    Rvec start;
    std::vector<std::string> diagnostics;
    int gamma_offset = 0;
    int nu_offset = 0;

    int count(ConstraintKind kind) const {
        return static_cast<int>(std::count_if(barrier.constraints.begin(), barrier.constraints.end(),
                                              [&](const ConcaveConstraint& c) { return c.kind == kind; }));
    }
};

struct SinrSolution {
    Cvec x;
    std::vector<double> gamma;
    std::vector<double> nu;
    double objective = 0.0;      // surrogate objective in bits/s/Hz
    double warm_objective = 0.0; // same objective at the expansion point
    double kkt_residual = 0.0;
    int iterations = 0;
    SolverStatus status = SolverStatus::optimal;
    bool degenerate = false;
    std::vector<double> barrier_objectives;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline void row_parts(const RowCvec& h, SparseVec& re, SparseVec& im) {
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        const double hr = h(i).real();
        const double hi = h(i).imag();
        const int a = static_cast<int>(2 * i);
        re.add(a, hr);
        re.add(a + 1, -hi);
        im.add(a, hi);
        im.add(a + 1, hr);
    }
}

inline Rvec realify(const Cvec& x) {
    Rvec z(2 * x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        z(2 * i) = x(i).real();
        z(2 * i + 1) = x(i).imag();
    }
    return z;
}

inline Cvec complexify(const Rvec& z, Eigen::Index n) {
    Cvec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = cd(z(2 * i), z(2 * i + 1));
    return x;
}

/// Linear part of the Taylor bound: 2 Re(conj(c) h x) as a sparse vector.
inline SparseVec taylor_linear(const RowCvec& h, cd anchor) {
    SparseVec re, im, out;
    row_parts(h, re, im);
    for (std::size_t k = 0; k < re.idx.size(); ++k) out.add(re.idx[k], 2.0 * anchor.real() * re.val[k]);
    for (std::size_t k = 0; k < im.idx.size(); ++k) out.add(im.idx[k], 2.0 * anchor.imag() * im.val[k]);
    return out;
}

inline SparseVec scaled(SparseVec v, double s) {
    for (auto& x : v.val) x *= s;
    return v;
}

} // namespace detail

/// Builds the convex surrogate at the expansion point x_tilde.
inline SinrSubproblem build_sinr_subproblem(const SinrProblem& prob, const Cvec& x_tilde) {
    if (x_tilde.size() != prob.dim) throw InvalidArgument("build_sinr_subproblem: expansion point has wrong size");
    for (const auto& u : prob.users)
        if (u.h.size() != prob.dim) throw InvalidArgument("build_sinr_subproblem: user channel has wrong size");

    SinrSubproblem sp;
    BarrierProblem& bp = sp.barrier;
    const int nx = 2 * prob.dim;
    const int U = static_cast<int>(prob.users.size());
    sp.gamma_offset = nx;
    sp.nu_offset = nx + U;
    bp.n_vars = nx + 2 * U;
    bp.n_block_vars = nx;

    // Blocks: coupled pairs share a 4x4 block, all other coordinates are singletons.
    std::vector<int> paired(static_cast<std::size_t>(prob.dim), -1);
    for (const auto& [a, b] : prob.couplings) {
        if (a < 0 || b < 0 || a >= prob.dim || b >= prob.dim || a == b || paired[a] >= 0 || paired[b] >= 0)
            throw InvalidArgument("build_sinr_subproblem: invalid coupling");
        paired[a] = b;
        paired[b] = a;
        bp.blocks.push_back({2 * a, 2 * a + 1, 2 * b, 2 * b + 1});
    }
    for (int i = 0; i < prob.dim; ++i)
        if (paired[i] < 0) {
            bp.blocks.push_back({2 * i});
            bp.blocks.push_back({2 * i + 1});
        }

    // Interior start: shrink x slightly off the norm boundaries.
    const Cvec x0 = x_tilde * (1.0 - 1e-4);
    sp.start = Rvec::Zero(bp.n_vars);
    sp.start.head(nx) = detail::realify(x0);

    for (int k = 0; k < U; ++k) {
        const UserTerm& u = prob.users[static_cast<std::size_t>(k)];
        const cd c = apply_row(u.h, x_tilde);
        const double g_tilde = std::norm(c);
        const double nu_tilde = u.noise + u.intra * g_tilde;
        const int gi = sp.gamma_offset + k;
        const int ni = sp.nu_offset + k;
        bp.log_index.push_back(gi);
        bp.log_weight.push_back(u.weight / kLn2);

        const SparseVec lin = detail::taylor_linear(u.h, c);

        // qos: rho * (lin.x - |c|^2) >= r * noise
        const double rho = u.power - u.qos_snr * u.intra;
        if (u.qos_snr > 0.0) {
            if (!(rho > 0.0)) {
                sp.diagnostics.push_back("user " + std::to_string(k) + ": qos constraint dropped (rho <= 0)");
            } else {
                double rhs = u.qos_snr * u.noise;
                const double at_warm = rho * g_tilde;
                if (at_warm <= rhs) {
                    rhs = (1.0 - 1e-3) * at_warm;
                    sp.diagnostics.push_back("user " + std::to_string(k) +
                                             ": qos target above the expansion point; relaxed to it");
                }
                ConcaveConstraint q;
                q.kind = ConstraintKind::qos;
                q.user = k;
                q.c0 = -rho * g_tilde - rhs;
                q.lin = detail::scaled(lin, rho);
                if (rhs > 0.0 || at_warm > 0.0) bp.constraints.push_back(std::move(q));
            }
        }

        // ratio: power * (lin.x / nu~ - |c|^2/nu~^2 * nu) - gamma >= 0
        {
            ConcaveConstraint r;
            r.kind = ConstraintKind::ratio;
            r.user = k;
            r.lin = detail::scaled(lin, u.power / nu_tilde);
            r.lin.add(ni, -u.power * g_tilde / (nu_tilde * nu_tilde));
            r.lin.add(gi, -1.0);
            bp.constraints.push_back(std::move(r));
        }

        // interference: nu - noise - intra |h x|^2 >= 0
        {
            ConcaveConstraint q;
            q.kind = ConstraintKind::interference;
            q.user = k;
            q.c0 = -u.noise;
            q.lin.add(ni, 1.0);
            if (u.intra > 0.0) {
                SparseVec re, im;
                detail::row_parts(u.h, re, im);
                q.quad_scale = {u.intra, u.intra};
                q.quad_dir = {re, im};
            }
            bp.constraints.push_back(std::move(q));
        }

        const double g0 = std::norm(apply_row(u.h, x0));
        const double nu0 = (u.noise + u.intra * g0) * (1.0 + 1e-6) + 1e-12;
        const double tau0 = (2.0 * (std::conj(c) * apply_row(u.h, x0)).real() - g_tilde * nu0 / nu_tilde) / nu_tilde;
        const double gmax = u.power * tau0;
        sp.start(ni) = nu0;
        sp.start(gi) = gmax > 0.0 ? 0.5 * gmax : std::max(-0.5, gmax - 0.25);
    }

    if (prob.norm_ball) {
        ConcaveConstraint b;
        b.kind = ConstraintKind::power;
        b.soft = false;
        b.c0 = 1.0;
        b.ball = 1.0;
        for (int i = 0; i < nx; ++i) b.ball_idx.push_back(i);
        bp.constraints.push_back(std::move(b));
    }
    for (const auto& [a, b] : prob.couplings) {
        ConcaveConstraint c;
        c.kind = ConstraintKind::coupling;
        c.soft = false;
        c.c0 = 1.0;
        c.ball = 1.0;
        c.ball_idx = {2 * a, 2 * a + 1, 2 * b, 2 * b + 1};
        bp.constraints.push_back(std::move(c));
    }
    for (const auto& [i, j] : prob.order_pairs) {
        const UserTerm& ui = prob.users.at(static_cast<std::size_t>(i));
        const UserTerm& uj = prob.users.at(static_cast<std::size_t>(j));
        const cd cj = apply_row(uj.h, x_tilde);
        const double slack = std::norm(cj) - std::norm(apply_row(ui.h, x_tilde));
        if (!(slack > 0.0)) {
            sp.diagnostics.push_back("order constraint skipped: expansion point violates it");
            continue;
        }
        ConcaveConstraint c;
        c.kind = ConstraintKind::order;
        c.c0 = -std::norm(cj);
        c.lin = detail::taylor_linear(uj.h, cj);
        SparseVec re, im;
        detail::row_parts(ui.h, re, im);
        c.quad_scale = {1.0, 1.0};
        c.quad_dir = {re, im};
        bp.constraints.push_back(std::move(c));
    }
    return sp;
}

/// Surrogate objective sum_k weight_k log2(1 + gamma_k).
inline double sinr_objective(const SinrProblem& prob, const std::vector<double>& gamma) {
    double acc = 0.0;
    for (std::size_t k = 0; k < prob.users.size(); ++k) acc += prob.users[k].weight * log2p1(gamma[k]);
    return acc;
}

/// True SINRs at x: power |h x|^2 / (intra |h x|^2 + noise).
inline std::vector<double> true_sinr(const SinrProblem& prob, const Cvec& x) {
    std::vector<double> out;
    for (const auto& u : prob.users) {
        const double g = std::norm(apply_row(u.h, x));
        out.push_back(u.power * g / (u.intra * g + u.noise));
    }
    return out;
}

inline SinrSolution solve_sinr_subproblem(const SinrProblem& prob, const Cvec& x_tilde, const SolverOptions& opt = {}) {
    SinrSubproblem sp = build_sinr_subproblem(prob, x_tilde);
    SinrSolution sol;
    sol.diagnostics = sp.diagnostics;
    sol.warm_objective = sinr_objective(prob, true_sinr(prob, x_tilde));
    const BarrierResult r = solve_with_phase1(sp.barrier, sp.start, opt);
    sol.status = r.status;
    sol.iterations = r.iterations;
    sol.kkt_residual = r.kkt_residual;
    sol.barrier_objectives = r.outer_objectives;
    sol.degenerate = r.degenerate;
    if (!r.note.empty()) sol.diagnostics.push_back(r.note);
    const int U = static_cast<int>(prob.users.size());
    if (r.status == SolverStatus::infeasible || r.degenerate) {
        sol.x = x_tilde;
        sol.gamma = true_sinr(prob, x_tilde);
        for (int k = 0; k < U; ++k) {
            const auto& u = prob.users[static_cast<std::size_t>(k)];
            sol.nu.push_back(u.noise + u.intra * std::norm(apply_row(u.h, x_tilde)));
        }
        sol.objective = sol.warm_objective;
        return sol;
    }
    sol.x = detail::complexify(r.z, prob.dim);
    for (int k = 0; k < U; ++k) {
        sol.gamma.push_back(r.z(sp.gamma_offset + k));
        sol.nu.push_back(r.z(sp.nu_offset + k));
    }
    sol.objective = sinr_objective(prob, sol.gamma);
    return sol;
}

} // namespace starnoma
