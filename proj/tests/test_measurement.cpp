#include "mfgip/linearized_solver.hpp"
#include "mfgip/measurement.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfgip;

namespace {

struct Fixture {
    SpaceGrid space = SpaceGrid::unit_interval(33);
    TimeGrid time{0.1, 20};
    ForwardConfig cfg = [] {
        ForwardConfig c;
        c.picard_tol = 1e-13;
        return c;
    }();
    RunningCost truth{1.5, {GridFunction(33, 0.4)}};
};

} // namespace

TEST(Measurement, UniformStateRecordsTheTerminalCostAndUnitDensity) {
    Fixture f;
    f.cfg.terminal_cost = 2.5;
    const auto rec = measure(f.truth, f.cfg, GridFunction(f.space.size(), 1.0), f.space, f.time);
    for (double v : rec.u0) EXPECT_NEAR(v, 2.5, 1e-12);
    for (double v : rec.mT) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Measurement, NoiseIsDeterministicPerSeedAndCall) {
    const Fixture f;
    const auto m0 = [&] {
        const auto s = cosine_mode(f.space, 1);
        GridFunction m(f.space.size());
        for (std::size_t j = 0; j < m.size(); ++j) m[j] = 1.0 + 0.01 * s[j];
        return m;
    }();
    const SolverOracle a(f.truth, f.cfg, f.space, f.time, NoiseModel{1e-3, 7});
    const SolverOracle b(f.truth, f.cfg, f.space, f.time, NoiseModel{1e-3, 7});
    const SolverOracle other(f.truth, f.cfg, f.space, f.time, NoiseModel{1e-3, 8});
    const SolverOracle clean(f.truth, f.cfg, f.space, f.time);
    const auto ra = a.measure(m0), rb = b.measure(m0), ro = other.measure(m0), rc = clean.measure(m0);
    EXPECT_EQ(ra.u0, rb.u0);
    EXPECT_EQ(ra.mT, rb.mT);
    EXPECT_NE(ra.mT, ro.mT);
    // A second call draws fresh noise.
    EXPECT_NE(a.measure(m0).mT, ra.mT);
    EXPECT_EQ(a.calls(), 2u);
    // Noise scale follows the record's deviation from the uniform state.
    double dev = 0.0, noise = 0.0;
    for (std::size_t j = 0; j < rc.mT.size(); ++j) {
        dev = std::max(dev, std::abs(rc.mT[j] - 1.0));
        noise = std::max(noise, std::abs(ra.mT[j] - rc.mT[j]));
    }
    EXPECT_GT(noise, 0.0);
    EXPECT_LT(noise, 6.0 * 1e-3 * dev);
}

TEST(Extraction, FirstOrderMatchesTheDirectSolve) {
    const Fixture f;
    const SolverOracle oracle(f.truth, f.cfg, f.space, f.time);
    const auto dir = cosine_mode(f.space, 2);
    const auto data = extract_order1(oracle, dir);
    const auto direct = solve_first_order(f.truth.c1(), dir, LinearModel::grid_consistent(f.space, f.time));
    EXPECT_LT(sup_distance(data.mT, direct.m.slice(f.time.steps())), 1e-9);
    EXPECT_LT(sup_distance(data.u0, direct.u.slice(0)), 1e-9);
    EXPECT_FALSE(data.noisy);
    EXPECT_EQ(data.per_epsilon.size(), 3u);
    EXPECT_NEAR(data.nominal_ratio, 4.0, 1e-12);
}

TEST(Extraction, SecondOrderMatchesTheDirectSolve) {
    const Fixture f;
    const SolverOracle oracle(f.truth, f.cfg, f.space, f.time);
    const auto a = cosine_mode(f.space, 1), b = cosine_mode(f.space, 2);
    const auto data = extract_order2(oracle, a, b);
    const auto model = LinearModel::grid_consistent(f.space, f.time);
    const auto la = solve_first_order(f.truth.c1(), a, model), lb = solve_first_order(f.truth.c1(), b, model);
    const auto direct = solve_second_order(f.truth.c1(), f.truth.coefficient(2), la, lb, model);
    EXPECT_LT(sup_distance(data.mT, direct.m.slice(f.time.steps())), 1e-7);
    EXPECT_LT(sup_distance(data.u0, direct.u.slice(0)), 1e-7);
}

TEST(Extraction, OneSidedStencilIsFirstOrderAccurate) {
    const Fixture f;
    const SolverOracle oracle(f.truth, f.cfg, f.space, f.time);
    EpsilonStencil st;
    st.scheme = StencilScheme::one_sided;
    const auto dir = cosine_mode(f.space, 1);
    const auto data = extract_order1(oracle, dir, st);
    EXPECT_NEAR(data.nominal_ratio, 2.0, 1e-12);
    const auto direct = solve_first_order(f.truth.c1(), dir, LinearModel::grid_consistent(f.space, f.time));
    EXPECT_LT(sup_distance(data.mT, direct.m.slice(f.time.steps())), 1e-6);
}

TEST(Extraction, RejectsBadDirections) {
    const Fixture f;
    const SolverOracle oracle(f.truth, f.cfg, f.space, f.time);
    EXPECT_THROW(extract_order1(oracle, GridFunction(f.space.size(), 0.1)), Error);
    EpsilonStencil wide;
    wide.epsilons = {0.5, 0.25};
    EXPECT_THROW(extract_order1(oracle, cosine_mode(f.space, 1), wide), Error);
    EpsilonStencil negative;
    negative.epsilons = {-1e-2};
    EXPECT_THROW(extract_order1(oracle, cosine_mode(f.space, 1), negative), Error);
}

TEST(Extraction, NoisyDataAreFlagged) {
    const Fixture f;
    const SolverOracle oracle(f.truth, f.cfg, f.space, f.time, NoiseModel{1e-2, 3});
    const auto data = extract_order1(oracle, cosine_mode(f.space, 1));
    EXPECT_TRUE(data.noisy);
    EXPECT_FALSE(data.warning.empty());
}
