#include "mfgip/spectral_basis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mfgip;

TEST(SpaceGrid, TrapezoidIntegratesPolynomialsOfDegreeOne) {
    const auto g = SpaceGrid::unit_interval(33);
    GridFunction f(g.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = 3.0 * g.coordinate(j) - 0.5;
    EXPECT_NEAR(quadrature(g, f), 1.0, 1e-14);

    const auto sq = SpaceGrid::unit_square(17);
    EXPECT_NEAR(quadrature(sq, GridFunction(sq.size(), 1.0)), 1.0, 1e-14);
}

TEST(SpaceGrid, RejectsTooFewPoints) {
    EXPECT_THROW(SpaceGrid::unit_interval(1), Error);
}

TEST(SpectralBasis, CosinesAreOrthonormalUnderTheGridQuadrature) {
    const auto g = SpaceGrid::unit_interval(129);
    const auto basis = build_interval_basis(g, 10);
    for (std::size_t i = 0; i < basis.count(); ++i)
        for (std::size_t j = 0; j < basis.count(); ++j) {
            GridFunction p(g.size());
            for (std::size_t q = 0; q < p.size(); ++q) p[q] = basis.values(i)[q] * basis.values(j)[q];
            EXPECT_NEAR(quadrature(g, p), i == j ? 1.0 : 0.0, 1e-12) << i << "," << j;
        }
}

TEST(SpectralBasis, AnalyticEigenvaluesAreSquaredWavenumbers) {
    const auto basis = build_interval_basis(SpaceGrid::unit_interval(65), 5);
    for (std::size_t i = 0; i < 5; ++i)
        EXPECT_DOUBLE_EQ(basis.eigenvalue(i), std::pow(std::numbers::pi * static_cast<double>(i), 2));
}

TEST(SpectralBasis, ProjectSynthesizeRoundTrip) {
    const auto g = SpaceGrid::unit_interval(65);
    const auto basis = build_interval_basis(g, 6);
    const std::vector<double> a = {0.0, 0.3, -0.2, 0.0, 0.05, 1.0};
    const auto f = basis.synthesize(a);
    const auto back = basis.project(f);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(back[i], a[i], 1e-13);
    EXPECT_LT(basis.truncation_residual(f), 1e-13);

    const auto outside = cosine_mode(g, 9);
    EXPECT_NEAR(basis.truncation_residual(outside), std::sqrt(2.0), 1e-12);
}

TEST(SpectralBasis, NyquistLimitIsEnforced) {
    EXPECT_THROW(build_interval_basis(SpaceGrid::unit_interval(9), 12), Error);
}

TEST(SpectralBasis, GridEigenbasisDiagonalisesTheGridLaplacian) {
    const auto g = SpaceGrid::unit_interval(33);
    const auto basis = grid_eigenbasis(g);
    ASSERT_EQ(basis.count(), g.size());
    for (std::size_t i : {1u, 7u, 31u}) {
        const auto lap = neumann_laplacian_apply(g, basis.values(i));
        for (std::size_t j = 0; j < g.size(); ++j)
            EXPECT_NEAR(lap[j], -basis.eigenvalue(i) * basis.values(i)[j], 1e-9 * basis.eigenvalue(i));
    }
    // Discrete eigenvalues approach the continuum ones at second order.
    const double h = 1.0 / 32.0;
    const double exact = std::pow(std::numbers::pi, 2);
    EXPECT_NEAR(basis.eigenvalue(1), exact, exact * exact * h * h / 12.0 * 1.01);
}

TEST(NeumannLaplacian, SecondOrderOnACosine) {
    std::vector<double> err;
    for (std::size_t n : {33u, 65u, 129u}) {
        const auto g = SpaceGrid::unit_interval(n);
        const auto f = cosine_mode(g, 2);
        const auto lap = neumann_laplacian_apply(g, f);
        const double beta = std::pow(2.0 * std::numbers::pi, 2);
        double e = 0.0;
        for (std::size_t j = 0; j < n; ++j) e = std::max(e, std::abs(lap[j] + beta * f[j]));
        err.push_back(e);
    }
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.05);
    EXPECT_NEAR(std::log2(err[1] / err[2]), 2.0, 0.05);
}

TEST(NeumannLaplacian, QuadraticHasConstantInteriorLaplacian) {
    const auto g = SpaceGrid::unit_interval(41);
    GridFunction f(g.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = g.coordinate(j) * g.coordinate(j);
    const auto lap = neumann_laplacian_apply(g, f);
    for (std::size_t j = 1; j + 1 < f.size(); ++j) EXPECT_NEAR(lap[j], 2.0, 1e-9);
}

TEST(SquareBasis, OrthonormalWithDegenerateEigenvalues) {
    const auto g = SpaceGrid::unit_square(33);
    const auto basis = build_square_basis(g, 6);
    for (std::size_t i = 0; i < basis.count(); ++i)
        for (std::size_t j = 0; j < basis.count(); ++j) {
            GridFunction p(g.size());
            for (std::size_t q = 0; q < p.size(); ++q) p[q] = basis.values(i)[q] * basis.values(j)[q];
            EXPECT_NEAR(quadrature(g, p), i == j ? 1.0 : 0.0, 1e-12);
        }
    // (1,0) and (0,1) share pi^2.
    EXPECT_DOUBLE_EQ(basis.eigenvalue(1), basis.eigenvalue(2));
    EXPECT_NEAR(basis.eigenvalue(1), std::pow(std::numbers::pi, 2), 1e-12);
}
