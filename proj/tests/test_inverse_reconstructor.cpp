#include "mfgip/inverse_reconstructor.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfgip;

namespace {

struct Small {
    SpaceGrid space = SpaceGrid::unit_interval(33);
    TimeGrid time{0.1, 30};
    ForwardConfig cfg = [] {
        ForwardConfig c;
        c.picard_tol = 1e-13;
        return c;
    }();
    ReconstructionSettings settings = [] {
        ReconstructionSettings s;
        s.modes = 5;
        return s;
    }();
};

} // namespace

class FirstOrderRoundTrip : public ::testing::TestWithParam<double> {};

TEST_P(FirstOrderRoundTrip, RecoversTheCoupling) {
    const Small s;
    const SolverOracle oracle(RunningCost(GetParam()), s.cfg, s.space, s.time);
    for (std::size_t i : {1u, 2u}) {
        const auto est = recover_F1(oracle, i, s.settings);
        EXPECT_NEAR(est.c, GetParam(), 1e-6 * GetParam()) << "mode " << i;
        EXPECT_NEAR(est.c_from_value, GetParam(), 1e-2 * GetParam());
        EXPECT_EQ(est.mode, i);
    }
}

INSTANTIATE_TEST_SUITE_P(Couplings, FirstOrderRoundTrip, ::testing::Values(0.3, 2.0, 7.5));

TEST(FirstOrder, DensityResponseIsMonotoneInTheCoupling) {
    // Injectivity of c -> mu_1(T; c): larger coupling, stronger damping.
    const Small s;
    double previous = std::numeric_limits<double>::infinity();
    for (double c : {0.5, 1.0, 2.0, 4.0}) {
        const auto model = LinearModel::grid_consistent(s.space, s.time);
        const auto sol = solve_first_order(c, cosine_mode(s.space, 1), model);
        const double mu = model.basis.coefficient(sol.m.slice(s.time.steps()), 1);
        EXPECT_LT(mu, previous);
        previous = mu;
    }
}

TEST(FirstOrder, NonPositiveCouplingFailsTheBracket) {
    const Small s;
    const SolverOracle oracle(RunningCost(-0.5), s.cfg, s.space, s.time);
    try {
        recover_F1(oracle, 1, s.settings);
        FAIL() << "expected bracket_failure";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::bracket_failure);
    }
}

TEST(SecondOrder, RecoversCoefficientsInTheBasis) {
    const Small s;
    const auto basis = grid_eigenbasis(s.space);
    const std::vector<double> truth = {0.1, 0.4, 0.0, -0.2, 0.0};
    const RunningCost cost(1.5, {basis.synthesize(truth)});
    const SolverOracle oracle(cost, s.cfg, s.space, s.time);
    const auto est = recover_F2(oracle, 1.5, s.settings);
    ASSERT_EQ(est.coefficients.size(), truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) EXPECT_NEAR(est.coefficients[i], truth[i], 1e-4) << i;
    EXPECT_FALSE(est.truncation_flagged);
    EXPECT_LT(est.condition, 1e3);
}

TEST(SecondOrder, ZeroTruthGivesZero) {
    const Small s;
    const SolverOracle oracle(RunningCost(1.5), s.cfg, s.space, s.time);
    const auto est = recover_F2(oracle, 1.5, s.settings);
    for (double a : est.coefficients) EXPECT_NEAR(a, 0.0, 1e-5);
}

TEST(SecondOrder, EnergyOutsideTheBasisIsFlagged) {
    const Small s;
    const auto basis = grid_eigenbasis(s.space);
    std::vector<double> truth(11, 0.0);
    truth[1] = 0.3;
    truth[10] = 0.5;
    const RunningCost cost(1.5, {basis.synthesize(truth)});
    const SolverOracle oracle(cost, s.cfg, s.space, s.time);
    const auto est = recover_F2(oracle, 1.5, s.settings);
    EXPECT_TRUE(est.truncation_flagged);
}

TEST(SecondOrder, WrongCouplingInflatesTheResidual) {
    const Small s;
    const auto basis = grid_eigenbasis(s.space);
    const RunningCost cost(1.5, {basis.synthesize(std::vector<double>{0.0, 0.3})});
    const SolverOracle oracle(cost, s.cfg, s.space, s.time);
    const auto right = recover_F2(oracle, 1.5, s.settings);
    const auto wrong = recover_F2(oracle, 1.8, s.settings);
    EXPECT_GT(wrong.residual, 10.0 * right.residual);
}

TEST(HigherOrder, DefaultTuplesAreNonDecreasing) {
    const auto t3 = detail::default_tuples(3);
    for (const auto& t : t3) {
        EXPECT_EQ(t.size(), 3u);
        for (std::size_t q = 1; q < t.size(); ++q) EXPECT_LE(t[q - 1], t[q]);
    }
    EXPECT_THROW(recover_Fk(SolverOracle(RunningCost(1.0), ForwardConfig{}, SpaceGrid::unit_interval(9), TimeGrid(0.1, 5)),
                            RunningCost(1.0), 1, ReconstructionSettings{}),
                 Error);
}

TEST(Pipeline, RecoversThirdOrderCoefficients) {
    Small s;
    s.settings.modes = 4;
    const auto basis = grid_eigenbasis(s.space);
    const RunningCost cost(2.0, {basis.synthesize(std::vector<double>{0.0, 0.3}),
                                 basis.synthesize(std::vector<double>{0.0, 0.0, 0.2})});
    const SolverOracle oracle(cost, s.cfg, s.space, s.time);
    const auto report = recover_running_cost(oracle, s.settings);
    EXPECT_NEAR(report.c1, 2.0, 1e-6);
    ASSERT_EQ(report.higher.size(), 2u);
    EXPECT_NEAR(report.higher[0].coefficients[1], 0.3, 1e-4);
    EXPECT_NEAR(report.higher[1].coefficients[2], 0.2, 2e-3);
    const auto recovered = report.as_running_cost();
    EXPECT_EQ(recovered.max_order(), 3u);
}
