#pragma once

#include "mfgip/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

namespace mfgip {

/// Which eigenvalue accompanies each sampled cosine mode.
///
/// `analytic` is the continuum value (i pi)^2. `discrete` is the exact
/// eigenvalue of neumann_laplacian_apply on the sampled mode,
/// (4 / h^2) sin^2(i pi h / 2); use it when a computation must agree with the
/// grid operator to round-off.
enum class Spectrum { analytic, discrete };

struct NeumannMode {
    std::array<std::size_t, 2> index{0, 0};
    double eigenvalue = 0.0;
    GridFunction values;
};

inline double analytic_eigenvalue(std::size_t i) {
    const double k = std::numbers::pi * static_cast<double>(i);
    return k * k;
}

inline double discrete_eigenvalue(std::size_t i, double spacing) {
    const double s = std::sin(0.5 * std::numbers::pi * static_cast<double>(i) * spacing);
    return 4.0 * s * s / (spacing * spacing);
}

namespace detail {

// cos(i pi x_j) with the argument reduced exactly on the integer lattice.
inline double lattice_cosine(std::size_t i, std::size_t j, std::size_t points) {
    const std::size_t period = 2 * (points - 1);
    const std::size_t r = (i * j) % period;
    return std::cos(std::numbers::pi * static_cast<double>(r) / static_cast<double>(points - 1));
}

inline double axis_eigenvalue(std::size_t i, double spacing, Spectrum spectrum) {
    return spectrum == Spectrum::analytic ? analytic_eigenvalue(i) : discrete_eigenvalue(i, spacing);
}

} // namespace detail

/// Neumann Laplacian eigenpairs (beta_i, mbar_i) sampled on a grid, ordered by
/// eigenvalue. Mode 0 is the constant 1; every mode has unit trapezoid norm.
class SpectralBasis {
public:
    SpectralBasis(SpaceGrid grid, Spectrum spectrum, std::vector<NeumannMode> modes)
        : grid_(std::move(grid)), spectrum_(spectrum), modes_(std::move(modes)) {}

    const SpaceGrid& grid() const noexcept { return grid_; }
    Spectrum spectrum() const noexcept { return spectrum_; }
    std::size_t count() const noexcept { return modes_.size(); }
    const NeumannMode& mode(std::size_t i) const { return modes_.at(i); }
    double eigenvalue(std::size_t i) const { return modes_.at(i).eigenvalue; }
    std::span<const double> values(std::size_t i) const { return modes_.at(i).values; }

    /// <f, mbar_i> under the trapezoid rule.
    double coefficient(std::span<const double> f, std::size_t i) const {
        require_shape(grid_, f, "SpectralBasis::coefficient");
        const auto& m = modes_.at(i).values;
        auto w = grid_.weights();
        double sum = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) sum += w[j] * f[j] * m[j];
        return sum;
    }

    std::vector<double> project(std::span<const double> f) const {
        std::vector<double> a(count());
        for (std::size_t i = 0; i < count(); ++i) a[i] = coefficient(f, i);
        return a;
    }

    GridFunction synthesize(std::span<const double> coefficients) const {
        require(coefficients.size() <= count(), ErrorKind::shape_mismatch, "synthesize: too many coefficients");
        GridFunction f(grid_.size(), 0.0);
        for (std::size_t i = 0; i < coefficients.size(); ++i) {
            if (coefficients[i] == 0.0) continue;
            const auto& m = modes_[i].values;
            for (std::size_t j = 0; j < f.size(); ++j) f[j] += coefficients[i] * m[j];
        }
        return f;
    }

    /// Sup-norm distance between f and its projection onto the basis.
    double truncation_residual(std::span<const double> f) const {
        const auto a = project(f);
        return sup_distance(f, synthesize(a));
    }

    /// |d mbar_i / d nu| on the boundary, evaluated from the closed form.
    double boundary_normal_derivative(std::size_t i) const {
        const auto& idx = modes_.at(i).index;
        double worst = 0.0;
        for (std::size_t axis = 0; axis < static_cast<std::size_t>(grid_.dimension()); ++axis) {
            const double k = std::numbers::pi * static_cast<double>(idx[axis]);
            for (double x : {0.0, 1.0}) worst = std::max(worst, std::abs(std::sqrt(2.0) * k * std::sin(k * x)));
        }
        return worst;
    }

private:
    SpaceGrid grid_;
    Spectrum spectrum_;
    std::vector<NeumannMode> modes_;
};

/// Analytic Neumann eigenpairs of the unit interval: beta_i = (i pi)^2,
/// mbar_i = sqrt(2) cos(i pi x), mbar_0 = 1. `count` includes mode 0.
inline SpectralBasis build_interval_basis(const SpaceGrid& grid, std::size_t count,
                                          Spectrum spectrum = Spectrum::analytic) {
    require(grid.dimension() == 1, ErrorKind::invalid_argument, "build_interval_basis needs a 1-D grid");
    require(count >= 1, ErrorKind::invalid_argument, "basis needs at least one mode");
    const std::size_t n = grid.points_per_axis();
    // At least 4 points per wavelength 2/i.
    require(2 * (count - 1) <= n - 1, ErrorKind::resolution,
            "mode " + std::to_string(count - 1) + " is under-resolved on a grid with " + std::to_string(n) +
                " points (need at least 4 points per wavelength)");

    std::vector<NeumannMode> modes;
    modes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        NeumannMode m;
        m.index = {i, 0};
        m.eigenvalue = detail::axis_eigenvalue(i, grid.spacing(), spectrum);
        m.values.resize(n);
        const double scale = i == 0 ? 1.0 : std::sqrt(2.0);
        for (std::size_t j = 0; j < n; ++j) m.values[j] = scale * detail::lattice_cosine(i, j, n);
        modes.push_back(std::move(m));
    }
    return SpectralBasis(grid, spectrum, std::move(modes));
}

/// Tensor-product cosine modes on the unit square, ordered by eigenvalue
/// (ties broken by index). Degenerate pairs (p,q), (q,p) share an eigenvalue.
inline SpectralBasis build_square_basis(const SpaceGrid& grid, std::size_t count,
                                        Spectrum spectrum = Spectrum::analytic) {
    require(grid.dimension() == 2, ErrorKind::invalid_argument, "build_square_basis needs a 2-D grid");
    require(count >= 1, ErrorKind::invalid_argument, "basis needs at least one mode");
    const std::size_t n = grid.points_per_axis();
    const std::size_t max_index = (n - 1) / 2;

    std::vector<std::tuple<double, std::size_t, std::size_t>> pool;
    for (std::size_t p = 0; p <= max_index; ++p)
        for (std::size_t q = 0; q <= max_index; ++q)
            pool.emplace_back(detail::axis_eigenvalue(p, grid.spacing(), spectrum) +
                                  detail::axis_eigenvalue(q, grid.spacing(), spectrum),
                              p, q);
    require(count <= pool.size(), ErrorKind::resolution,
            "requested " + std::to_string(count) + " modes but only " + std::to_string(pool.size()) +
                " are resolved on this grid");
    std::sort(pool.begin(), pool.end());

    std::vector<NeumannMode> modes;
    modes.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
        const auto [beta, p, q] = pool[m];
        NeumannMode mode;
        mode.index = {p, q};
        mode.eigenvalue = beta;
        mode.values.resize(n * n);
        const double scale = (p == 0 ? 1.0 : std::sqrt(2.0)) * (q == 0 ? 1.0 : std::sqrt(2.0));
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix)
                mode.values[ix + n * iy] =
                    scale * detail::lattice_cosine(p, ix, n) * detail::lattice_cosine(q, iy, n);
        modes.push_back(std::move(mode));
    }
    return SpectralBasis(grid, spectrum, std::move(modes));
}

/// The complete eigenbasis of neumann_laplacian_apply on a 1-D grid: all N
/// sampled cosines with their discrete eigenvalues. Projection onto it is an
/// exact change of coordinates (a scaled DCT-I).
inline SpectralBasis grid_eigenbasis(const SpaceGrid& grid) {
    require(grid.dimension() == 1, ErrorKind::invalid_argument, "grid_eigenbasis needs a 1-D grid");
    const std::size_t n = grid.points_per_axis();
    std::vector<NeumannMode> modes;
    modes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        NeumannMode m;
        m.index = {i, 0};
        m.eigenvalue = discrete_eigenvalue(i, grid.spacing());
        m.values.resize(n);
        const double scale = (i == 0 || i == n - 1) ? 1.0 : std::sqrt(2.0);
        for (std::size_t j = 0; j < n; ++j) m.values[j] = scale * detail::lattice_cosine(i, j, n);
        modes.push_back(std::move(m));
    }
    return SpectralBasis(grid, Spectrum::discrete, std::move(modes));
}

/// Samples sqrt(2) cos(i pi x) (or 1 for i = 0) on a 1-D grid.
inline GridFunction cosine_mode(const SpaceGrid& grid, std::size_t i) {
    require(grid.dimension() == 1, ErrorKind::invalid_argument, "cosine_mode needs a 1-D grid");
    const std::size_t n = grid.points_per_axis();
    GridFunction f(n);
    const double scale = i == 0 ? 1.0 : std::sqrt(2.0);
    for (std::size_t j = 0; j < n; ++j) f[j] = scale * detail::lattice_cosine(i, j, n);
    return f;
}

} // namespace mfgip
