#include "mfgip/forward_solver.hpp"
#include "mfgip/linearized_solver.hpp"
#include "mfgip/probes.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfgip;

TEST(ModalExponents, HandComputedFixture) {
    const auto e = ModalExponents::of(1.0, 3.0);
    EXPECT_DOUBLE_EQ(e.lambda, 2.0);
    EXPECT_DOUBLE_EQ(e.k, -1.0);
    EXPECT_THROW(ModalExponents::of(1.0, -2.0), Error);
}

// Homogeneous modal problems are solved exactly by the exponential scheme;
// the combined probe is an independent closed form with nu(T) = 0.
TEST(ModalPropagator, ExponentialSchemeReproducesCombinedProbe) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(33), 4);
    const TimeGrid time(0.1, 25);
    for (std::size_t i = 1; i <= 3; ++i)
        for (double c : {0.5, 2.0, 5.0}) {
            const auto p = make_forward_probe(i, c, ProbeFamily::forward_combined, time, basis);
            const auto s = solve_modal_bvp(basis.eigenvalue(i), c, time, TimeScheme::exponential, p.mu_at(0.0), 0.0);
            for (std::size_t n = 0; n < time.nodes(); ++n) {
                EXPECT_NEAR(s.nu[n], p.nu_at(time.node(n)), 1e-11);
                EXPECT_NEAR(s.mu[n], p.mu_at(time.node(n)), 1e-11);
            }
        }
}

TEST(ModalPropagator, CrankNicolsonConvergesAtSecondOrder) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(33), 3);
    const double beta = basis.eigenvalue(1), c = 2.0;
    std::vector<double> err;
    for (std::size_t m : {20u, 40u, 80u}) {
        const TimeGrid time(0.1, m);
        const auto p = make_forward_probe(1, c, ProbeFamily::forward_combined, time, basis);
        const auto s = solve_modal_bvp(beta, c, time, TimeScheme::crank_nicolson, p.mu_at(0.0), 0.0);
        double e = 0.0;
        for (std::size_t n = 0; n < time.nodes(); ++n)
            e = std::max({e, std::abs(s.nu[n] - p.nu_at(time.node(n))), std::abs(s.mu[n] - p.mu_at(time.node(n)))});
        err.push_back(e);
    }
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.1);
    EXPECT_NEAR(std::log2(err[1] / err[2]), 2.0, 0.1);
}

TEST(ModalPropagator, ZeroEigenvalueWithSource) {
    // beta = 0: -nu' - c mu = h, mu' = g. With g = 1, h = 0, mu(0) = 0, nu(T) = 0:
    // mu = t, nu = c (T^2 - t^2) / 2.
    const TimeGrid time(1.0, 50);
    const std::vector<double> h(time.nodes(), 0.0), g(time.nodes(), 1.0);
    const double c = 1.5;
    for (auto scheme : {TimeScheme::exponential, TimeScheme::crank_nicolson}) {
        const auto s = solve_modal_bvp(0.0, c, time, scheme, 0.0, 0.0, h, g);
        for (std::size_t n = 0; n < time.nodes(); ++n) {
            const double t = time.node(n);
            EXPECT_NEAR(s.mu[n], t, 1e-12);
            EXPECT_NEAR(s.nu[n], c * (1.0 - t * t) / 2.0, 1e-10);
        }
    }
}

TEST(LinearSolver, SuperpositionHolds) {
    const auto space = SpaceGrid::unit_interval(33);
    const TimeGrid time(0.1, 20);
    const auto model = LinearModel::grid_consistent(space, time);
    const auto a = cosine_mode(space, 1), b = cosine_mode(space, 5);
    GridFunction mix(space.size());
    for (std::size_t j = 0; j < mix.size(); ++j) mix[j] = 2.0 * a[j] - 0.5 * b[j];
    const auto sa = solve_first_order(1.3, a, model), sb = solve_first_order(1.3, b, model);
    const auto sm = solve_first_order(1.3, mix, model);
    for (std::size_t q = 0; q < sm.u.values().size(); ++q) {
        EXPECT_NEAR(sm.u.values()[q], 2.0 * sa.u.values()[q] - 0.5 * sb.u.values()[q], 1e-13);
        EXPECT_NEAR(sm.m.values()[q], 2.0 * sa.m.values()[q] - 0.5 * sb.m.values()[q], 1e-13);
    }
}

TEST(LinearSolver, BoundaryDataAreHonoured) {
    const auto space = SpaceGrid::unit_interval(33);
    const TimeGrid time(0.1, 20);
    const auto model = LinearModel::grid_consistent(space, time);
    const auto f = cosine_mode(space, 2);
    const auto sol = solve_first_order(2.0, f, model);
    for (std::size_t j = 0; j < space.size(); ++j) {
        EXPECT_NEAR(sol.m(0, j), f[j], 1e-13);
        EXPECT_NEAR(sol.u(time.steps(), j), 0.0, 1e-13);
    }
    EXPECT_NEAR(quadrature(space, sol.m.slice(time.steps())), 0.0, 1e-13);
}

TEST(LinearSolver, RejectsNonZeroMeanAndUnrepresentableData) {
    const auto space = SpaceGrid::unit_interval(33);
    const TimeGrid time(0.1, 10);
    EXPECT_THROW(solve_first_order(1.0, GridFunction(space.size(), 0.1), LinearModel::grid_consistent(space, time)),
                 Error);
    try {
        solve_first_order(1.0, cosine_mode(space, 6), LinearModel::continuum(space, time, 4));
        FAIL() << "expected not_in_basis";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_in_basis);
    }
}

TEST(LinearSolver, ContinuumAndGridModelsAgreeToDiscretisationError) {
    const auto space = SpaceGrid::unit_interval(129);
    const TimeGrid time(0.1, 200);
    const auto f = cosine_mode(space, 1);
    const auto a = solve_first_order(1.0, f, LinearModel::continuum(space, time, 4));
    const auto b = solve_first_order(1.0, f, LinearModel::grid_consistent(space, time));
    EXPECT_LT(sup_distance(a.m.values(), b.m.values()), 1e-4);
    EXPECT_LT(sup_distance(a.u.values(), b.u.values()), 1e-4);
}

TEST(LinearSolver, AdjointSatisfiesTheBackwardSystem) {
    const auto space = SpaceGrid::unit_interval(65);
    const TimeGrid time(0.1, 20);
    const auto basis = build_interval_basis(space, 4);
    const LinearModel model{basis, time, TimeScheme::exponential};
    const double c = 2.0;
    const auto adj = solve_adjoint(c, basis.values(1), model);
    // rho(T) = mbar_1, v(0) = 0, matching the backward combined probe up to scale.
    const auto probe = make_backward_probe(1, c, ProbeFamily::backward_combined, time, basis);
    const double s = 1.0 / probe.mu_at(time.horizon());
    for (std::size_t n = 0; n < time.nodes(); ++n) {
        const double t = time.node(n);
        for (std::size_t j = 0; j < space.size(); j += 8) {
            EXPECT_NEAR(adj.rho(n, j), s * probe.mu_at(t) * basis.values(1)[j], 1e-10);
            EXPECT_NEAR(adj.v(n, j), s * probe.nu_at(t) * basis.values(1)[j], 1e-10);
        }
    }
}

namespace {

struct StencilErrors {
    std::vector<double> first, second;
};

StencilErrors stencil_errors(const std::vector<double>& eps) {
    const auto space = SpaceGrid::unit_interval(33);
    const TimeGrid time(0.1, 20);
    const double c = 1.0;
    const RunningCost cost(c, {cosine_mode(space, 1)});
    ForwardConfig cfg;
    cfg.picard_tol = 1e-13;
    const auto model = LinearModel::grid_consistent(space, time);
    const auto f1 = cosine_mode(space, 1), f2 = cosine_mode(space, 3);
    const auto l1 = solve_first_order(c, f1, model);
    const auto l2 = solve_first_order(c, f2, model);
    const auto second = solve_second_order(c, cost.coefficient(2), l1, l2, model);
    auto run = [&](double a, double b) {
        GridFunction m0(space.size());
        for (std::size_t j = 0; j < m0.size(); ++j) m0[j] = 1.0 + a * f1[j] + b * f2[j];
        return solve_mfg(cost, cfg, m0, space, time);
    };
    StencilErrors out;
    for (double e : eps) {
        const auto p = run(e, 0), m = run(-e, 0);
        double err = 0.0;
        for (std::size_t q = 0; q < p.m.values().size(); ++q) {
            err = std::max(err, std::abs((p.m.values()[q] - m.m.values()[q]) / (2 * e) - l1.m.values()[q]));
            err = std::max(err, std::abs((p.u.values()[q] - m.u.values()[q]) / (2 * e) - l1.u.values()[q]));
        }
        out.first.push_back(err);
        const auto pp = run(e, e), pm = run(e, -e), mp = run(-e, e), mm = run(-e, -e);
        err = 0.0;
        for (std::size_t q = 0; q < pp.m.values().size(); ++q) {
            const auto d = [&](auto get) { return (get(pp) - get(pm) - get(mp) + get(mm)) / (4 * e * e); };
            err = std::max(err, std::abs(d([&](const MFGSolution& s) { return s.m.values()[q]; }) - second.m.values()[q]));
            err = std::max(err, std::abs(d([&](const MFGSolution& s) { return s.u.values()[q]; }) - second.u.values()[q]));
        }
        out.second.push_back(err);
    }
    return out;
}

} // namespace

// The grid-consistent solves are the exact derivatives of solve_mfg, so the
// stencils converge at the stencil's own order.
TEST(LinearSolver, EpsilonStencilsConvergeToDirectSolves) {
    const auto r = stencil_errors({1e-2, 5e-3, 2.5e-3});
    for (std::size_t q = 0; q + 1 < 3; ++q) {
        EXPECT_NEAR(std::log2(r.first[q] / r.first[q + 1]), 2.0, 0.2);
        EXPECT_GE(std::log2(r.second[q] / r.second[q + 1]), 1.8);
    }
    EXPECT_LT(r.first.back(), 1e-6);
    EXPECT_LT(r.second.back(), 1e-5);
}

TEST(LinearSolver, ReflectTimeIsAnInvolution) {
    const auto space = SpaceGrid::unit_interval(9);
    const TimeGrid time(1.0, 4);
    SpaceTimeField f(space, time);
    for (std::size_t n = 0; n < time.nodes(); ++n)
        for (std::size_t j = 0; j < space.size(); ++j) f(n, j) = 10.0 * n + j;
    const auto r = reflect_time(f);
    EXPECT_EQ(r(0, 3), f(4, 3));
    const auto back = reflect_time(r);
    EXPECT_EQ(back.values()[17], f.values()[17]);
}
