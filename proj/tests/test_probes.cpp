#include "mfgip/probes.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfgip;

TEST(ProbeParameters, HandComputedFixture) {
    // beta = 1, c = 3: lambda = sqrt(1 + 3) = 2, k = -1, D = 3 / (-1 * 2).
    const auto p = probe_parameters(1.0, 3.0, ProbeFamily::forward_decay, 1.0);
    EXPECT_DOUBLE_EQ(p.lambda, 2.0);
    EXPECT_DOUBLE_EQ(p.k, -1.0);
    EXPECT_DOUBLE_EQ(p.D, -1.5);
    EXPECT_DOUBLE_EQ(p.identity_defect(), 0.0);
}

TEST(ProbeParameters, IdentityHoldsAcrossModesAndCouplings) {
    for (std::size_t i = 1; i <= 40; ++i)
        for (double c : {1e-3, 0.5, 1.0, 2.0, 5.0, 100.0}) {
            const double beta = analytic_eigenvalue(i);
            const auto p = probe_parameters(beta, c, ProbeFamily::forward_combined, 0.1);
            // k = beta - lambda gives k (k - 2 beta) = lambda^2 - beta^2 = c beta.
            EXPECT_NEAR(p.lambda * p.lambda, beta * beta + c * beta, 1e-13 * (beta * beta + c * beta));
            EXPECT_NEAR(p.k * (p.k - 2.0 * beta), c * beta, 1e-12 * c * beta) << i << " " << c;
            EXPECT_LE(std::abs(p.identity_defect()), 1e-12 * std::max(1.0, c));
            EXPECT_LT(p.k, 0.0);
            EXPECT_GT(p.c + p.k, 0.0);
        }
}

TEST(ProbeParameters, RejectsModeZero) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(33), 4);
    EXPECT_THROW(make_forward_probe(0, 1.0, ProbeFamily::forward_decay, TimeGrid(0.1, 10), basis), Error);
    EXPECT_THROW(make_forward_probe(4, 1.0, ProbeFamily::forward_decay, TimeGrid(0.1, 10), basis), Error);
    EXPECT_THROW(make_forward_probe(1, 1.0, ProbeFamily::backward_decay, TimeGrid(0.1, 10), basis), Error);
}

// Closed-form modal residuals, written out from the PDEs rather than taken
// from the certificate code.
class ModalRows : public ::testing::TestWithParam<ProbeFamily> {};

TEST_P(ModalRows, ProfilesSolveTheirSystem) {
    const auto family = GetParam();
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(65), 4);
    const TimeGrid time(0.1, 40);
    for (std::size_t i = 1; i <= 3; ++i)
        for (double c : {0.5, 2.0}) {
            const double beta = basis.eigenvalue(i);
            const auto p = is_backward(family) ? make_backward_probe(i, c, family, time, basis)
                                               : make_forward_probe(i, c, family, time, basis);
            for (double t : {0.0, 0.013, 0.05, 0.1}) {
                const double nu = p.nu_at(t), mu = p.mu_at(t), dnu = p.nu_rate_at(t), dmu = p.mu_rate_at(t);
                const double scale = std::max({1.0, std::abs(nu) * beta, std::abs(mu) * beta});
                if (!is_backward(family)) {
                    // -u_t - Delta u - c m = 0 and m_t - Delta m - Delta u = 0
                    EXPECT_NEAR(-dnu + beta * nu - c * mu, 0.0, 1e-12 * scale);
                    EXPECT_NEAR(dmu + beta * mu + beta * nu, 0.0, 1e-12 * scale);
                } else {
                    // v_t - Delta v = c rho and -rho_t - Delta rho - Delta v = 0
                    EXPECT_NEAR(dnu + beta * nu - c * mu, 0.0, 1e-12 * scale);
                    EXPECT_NEAR(-dmu + beta * mu + beta * nu, 0.0, 1e-12 * scale);
                }
            }
        }
}

INSTANTIATE_TEST_SUITE_P(Families, ModalRows,
                         ::testing::Values(ProbeFamily::forward_decay, ProbeFamily::forward_growth,
                                           ProbeFamily::forward_combined, ProbeFamily::backward_decay,
                                           ProbeFamily::backward_combined));

TEST(Probes, RatesMatchFiniteDifferences) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(33), 3);
    const TimeGrid time(0.2, 10);
    for (auto family : {ProbeFamily::forward_combined, ProbeFamily::backward_combined}) {
        const auto p = is_backward(family) ? make_backward_probe(2, 1.0, family, time, basis)
                                           : make_forward_probe(2, 1.0, family, time, basis);
        const double t = 0.07, h = 1e-5;
        EXPECT_NEAR(p.nu_rate_at(t), (p.nu_at(t + h) - p.nu_at(t - h)) / (2 * h), 1e-5 * std::abs(p.nu_rate_at(t)) + 1e-8);
        EXPECT_NEAR(p.mu_rate_at(t), (p.mu_at(t + h) - p.mu_at(t - h)) / (2 * h), 1e-5 * std::abs(p.mu_rate_at(t)) + 1e-8);
    }
}

TEST(Probes, BackwardDecayIsTheStatedExponential) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(33), 3);
    const TimeGrid time(0.1, 10);
    const double c = 2.0;
    const auto p = make_backward_probe(1, c, ProbeFamily::backward_decay, time, basis);
    for (double t : {0.0, 0.04, 0.1}) {
        EXPECT_NEAR(p.mu_at(t), std::exp(-p.params.lambda * t), 1e-14);
        EXPECT_NEAR(p.nu_at(t), c / p.params.k * std::exp(-p.params.lambda * t), 1e-13);
    }
}

TEST(Probes, CombinedValueVanishesAtTheTerminalTime) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(33), 4);
    const TimeGrid time(0.1, 10);
    for (std::size_t i = 1; i <= 3; ++i) {
        const auto f = make_forward_probe(i, 1.0, ProbeFamily::forward_combined, time, basis);
        EXPECT_NEAR(f.nu_at(0.1), 0.0, 1e-13);
        const auto b = make_backward_probe(i, 1.0, ProbeFamily::backward_combined, time, basis);
        EXPECT_NEAR(b.nu_at(0.0), 0.0, 1e-13);
    }
}

TEST(Certificates, AllFamiliesPassAtSecondOrderInSpace) {
    const TimeGrid time(0.1, 20);
    for (auto family : {ProbeFamily::forward_decay, ProbeFamily::forward_growth, ProbeFamily::backward_decay,
                        ProbeFamily::forward_combined, ProbeFamily::backward_combined}) {
        std::vector<double> res;
        for (std::size_t n : {65u, 129u, 257u}) {
            const auto basis = build_interval_basis(SpaceGrid::unit_interval(n), 4);
            const auto p = is_backward(family) ? make_backward_probe(2, 1.0, family, time, basis)
                                               : make_forward_probe(2, 1.0, family, time, basis);
            const auto cert = certify_probe(p, basis, time);
            EXPECT_TRUE(cert.passed) << to_string(family);
            EXPECT_LE(cert.modal_residual, 1e-10);
            EXPECT_EQ(cert.terminal_residual.has_value(), is_combined(family));
            res.push_back(cert.grid_residual);
        }
        EXPECT_NEAR(std::log2(res[0] / res[1]), 2.0, 0.1);
        EXPECT_NEAR(std::log2(res[1] / res[2]), 2.0, 0.1);
    }
}

TEST(Certificates, GammaEqualsDMissesTheTerminalCondition) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(65), 3);
    const TimeGrid time(0.1, 20);
    const auto p = make_forward_probe(1, 1.0, ProbeFamily::forward_combined, time, basis, CombinedRule::gamma_equals_D);
    const auto cert = certify_probe(p, basis, time);
    ASSERT_TRUE(cert.terminal_residual.has_value());
    EXPECT_GT(*cert.terminal_residual, 1e-3);
    EXPECT_FALSE(cert.passed);
    // Still an exact solution of the PDE rows.
    EXPECT_LE(cert.modal_residual, 1e-10);
}

TEST(Certificates, DegenerateProbeIsFlagged) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(33), 3);
    const TimeGrid time(0.1, 10);
    const auto zero = scaled(make_forward_probe(1, 1.0, ProbeFamily::forward_growth, time, basis), 0.0);
    const auto cert = certify_probe(zero, basis, time);
    EXPECT_TRUE(cert.degenerate);
    EXPECT_EQ(cert.amplitude, 0.0);
}

TEST(Certificates, ScalingIsLinear) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(33), 3);
    const TimeGrid time(0.1, 10);
    const auto p = make_forward_probe(1, 1.0, ProbeFamily::forward_combined, time, basis);
    const auto q = scaled(p, -3.0);
    for (double t : {0.0, 0.05}) {
        EXPECT_NEAR(q.nu_at(t), -3.0 * p.nu_at(t), 1e-14);
        EXPECT_NEAR(q.mu_at(t), -3.0 * p.mu_at(t), 1e-14);
    }
    EXPECT_TRUE(certify_probe(q, basis, time).passed);
}
