// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "starnoma/starnoma.hpp"

using namespace starnoma;

namespace {

RowCvec random_row(Rng& rng, int n) {
    RowCvec h(n);
    for (int i = 0; i < n; ++i) h(i) = complex_gaussian(rng, 1.0);
    return h;
}

Cvec random_vec(Rng& rng, int n) {
    Cvec x(n);
    for (int i = 0; i < n; ++i) x(i) = complex_gaussian(rng, 1.0);
    return x;
}

} // namespace

TEST(Taylor, QuadraticBoundIsTightAndBelow) {
    Rng rng = make_rng(1, 0, Stream::instance);
    for (int rep = 0; rep < 200; ++rep) {
        const RowCvec h = random_row(rng, 5);
        const Cvec xt = random_vec(rng, 5);
        const auto lb = taylor_lb_quadratic(h, xt);
        EXPECT_NEAR(lb(xt), std::norm(apply_row(h, xt)), 1e-10 * (1.0 + std::norm(apply_row(h, xt))));
        const Cvec x = random_vec(rng, 5);
        EXPECT_LE(lb(x), std::norm(apply_row(h, x)) + 1e-10);
    }
}

TEST(Taylor, ZeroAnchorGivesZeroFunctional) {
    Rng rng = make_rng(2, 0, Stream::instance);
    const RowCvec h = random_row(rng, 4);
    const auto lb = taylor_lb_quadratic(h, Cvec::Zero(4));
    EXPECT_EQ(lb(random_vec(rng, 4)), 0.0);
}

TEST(Taylor, PhaseInvariance) {
    Rng rng = make_rng(3, 0, Stream::instance);
    const RowCvec h = random_row(rng, 4);
    const Cvec xt = random_vec(rng, 4);
    const Cvec x = random_vec(rng, 4);
    const cd rot = std::polar(1.0, 0.77);
    EXPECT_NEAR(taylor_lb_quadratic(h, xt)(x), taylor_lb_quadratic(h, rot * xt)(rot * x), 1e-10);
}

TEST(Taylor, RatioBound) {
    Rng rng = make_rng(4, 0, Stream::instance);
    for (int rep = 0; rep < 200; ++rep) {
        const RowCvec h = random_row(rng, 3);
        const Cvec xt = random_vec(rng, 3);
        const double at = 0.1 + uniform01(rng);
        const auto lb = taylor_lb_ratio(h, xt, at);
        EXPECT_NEAR(lb(xt, at), std::norm(apply_row(h, xt)) / at, 1e-9 * (1.0 + std::norm(apply_row(h, xt)) / at));
        const Cvec x = random_vec(rng, 3);
        const double a = 0.05 + 2.0 * uniform01(rng);
        EXPECT_LE(lb(x, a), std::norm(apply_row(h, x)) / a + 1e-9);
    }
    EXPECT_THROW(taylor_lb_ratio(RowCvec::Ones(2), Cvec::Ones(2), 0.0), InvalidArgument);
}

TEST(Sca, SingleUserConvergesToMatchedFilter) {
    Rng rng = make_rng(5, 0, Stream::instance);
    const RowCvec h = random_row(rng, 4);
    SinrProblem prob;
    prob.dim = 4;
    prob.norm_ball = true;
    UserTerm u;
    u.h = h;
    u.power = 1.0;
    prob.users.push_back(u);
    Cvec x = random_unit_vector(rng, 4) * 0.5;
    double last = -1.0;
    for (int it = 0; it < 30; ++it) {
        const SinrSolution s = solve_sinr_subproblem(prob, x);
        ASSERT_NE(s.status, SolverStatus::infeasible);
        EXPECT_GE(s.objective, s.warm_objective - 1e-7);
        x = s.x;
        const double now = std::norm(apply_row(h, x));
        EXPECT_GE(now, last - 1e-7);
        last = now;
    }
    EXPECT_LE(x.squaredNorm(), 1.0 + 1e-9);
    EXPECT_NEAR(last / h.squaredNorm(), 1.0, 1e-4);
}

TEST(Sca, QosConstraintRespected) {
    Rng rng = make_rng(6, 0, Stream::instance);
    SinrProblem prob;
    prob.dim = 3;
    prob.norm_ball = true;
    UserTerm weak, strong;
    weak.h = random_row(rng, 3);
    weak.power = 0.8;
    weak.intra = 0.2;
    weak.qos_snr = 0.5;
    strong.h = random_row(rng, 3) * 2.0;
    strong.power = 0.2;
    prob.users = {weak, strong};
    Cvec x = weak.h.adjoint() / weak.h.norm();
    for (int it = 0; it < 10; ++it) {
        const SinrSolution s = solve_sinr_subproblem(prob, x);
        ASSERT_NE(s.status, SolverStatus::infeasible);
        x = s.x;
        const double g = std::norm(apply_row(weak.h, x));
        EXPECT_GE(g * 0.8 / (g * 0.2 + 1.0), 0.5 - 1e-6);
    }
}
