#pragma once

#include "mfgip/grid.hpp"

#include <span>
#include <vector>

namespace mfgip {

// 1-D finite-difference building blocks shared by the forward solver and the
// source assembly of the linearized systems. Any change here changes the
// discrete scheme both sides must agree on.

/// Central difference in the interior; zero at the two boundary nodes, which
/// is the ghost-point reflection value for a Neumann field.
inline GridFunction central_gradient(const SpaceGrid& space, std::span<const double> u) {
    require_shape(space, u, "central_gradient");
    require(space.dimension() == 1, ErrorKind::invalid_argument, "central_gradient is 1-D");
    const std::size_t n = u.size();
    const double inv_2h = 0.5 / space.spacing();
    GridFunction g(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) g[j] = (u[j + 1] - u[j - 1]) * inv_2h;
    return g;
}

/// div(m grad u) in conservative form: face fluxes m_{j+1/2} (u_{j+1}-u_j)/h
/// with m_{j+1/2} the face average, zero flux through the boundary faces and
/// half cells at the boundary nodes. Its trapezoid integral vanishes exactly.
inline GridFunction flux_divergence(const SpaceGrid& space, std::span<const double> m, std::span<const double> u) {
    require_shape(space, m, "flux_divergence");
    require_shape(space, u, "flux_divergence");
    require(space.dimension() == 1, ErrorKind::invalid_argument, "flux_divergence is 1-D");
    const std::size_t n = m.size();
    const double h = space.spacing();
    std::vector<double> flux(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) flux[j] = 0.5 * (m[j] + m[j + 1]) * (u[j + 1] - u[j]) / h;

    GridFunction div(n);
    div[0] = 2.0 * flux[0] / h;
    for (std::size_t j = 1; j + 1 < n; ++j) div[j] = (flux[j] - flux[j - 1]) / h;
    div[n - 1] = -2.0 * flux[n - 2] / h;
    return div;
}

/// Tridiagonal system with sub-, main and super-diagonal bands.
struct Tridiagonal {
    std::vector<double> lower; // lower[0] unused
    std::vector<double> diag;
    std::vector<double> upper; // upper[n-1] unused

    explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const noexcept { return diag.size(); }

    /// Thomas algorithm; the systems built here are diagonally dominant.
    std::vector<double> solve(std::span<const double> rhs) const {
        const std::size_t n = size();
        std::vector<double> c(n), d(n), x(n);
        double denom = diag[0];
        c[0] = upper[0] / denom;
        d[0] = rhs[0] / denom;
        for (std::size_t i = 1; i < n; ++i) {
            denom = diag[i] - lower[i] * c[i - 1];
            c[i] = i + 1 < n ? upper[i] / denom : 0.0;
            d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
        }
        x[n - 1] = d[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
        return x;
    }
};

/// Matrix of f -> Delta_h f (ghost-point Neumann), scaled by `scale`.
inline Tridiagonal laplacian_matrix(const SpaceGrid& space, double scale) {
    const std::size_t n = space.points_per_axis();
    const double s = scale / (space.spacing() * space.spacing());
    Tridiagonal a(n);
    a.diag[0] = -2.0 * s;
    a.upper[0] = 2.0 * s;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        a.lower[j] = s;
        a.diag[j] = -2.0 * s;
        a.upper[j] = s;
    }
    a.lower[n - 1] = 2.0 * s;
    a.diag[n - 1] = -2.0 * s;
    return a;
}

/// Matrix of m -> Delta_h m + flux_divergence(m, u) for a frozen u.
inline Tridiagonal drift_diffusion_matrix(const SpaceGrid& space, std::span<const double> u) {
    const std::size_t n = space.points_per_axis();
    const double h = space.spacing();
    Tridiagonal a = laplacian_matrix(space, 1.0);
    // face j+1/2 carries 0.5 (m_j + m_{j+1}) * g_j with g_j = (u_{j+1}-u_j)/h
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double g = (u[j + 1] - u[j]) / h;
        const double left_scale = j == 0 ? 2.0 / h : 1.0 / h;          // contribution to node j
        const double right_scale = j + 2 == n ? 2.0 / h : 1.0 / h;     // contribution to node j+1
        a.diag[j] += left_scale * 0.5 * g;
        a.upper[j] += left_scale * 0.5 * g;
        a.lower[j + 1] -= right_scale * 0.5 * g;
        a.diag[j + 1] -= right_scale * 0.5 * g;
    }
    return a;
}

inline std::vector<double> multiply(const Tridiagonal& a, std::span<const double> x) {
    const std::size_t n = a.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = a.diag[i] * x[i];
        if (i > 0) v += a.lower[i] * x[i - 1];
        if (i + 1 < n) v += a.upper[i] * x[i + 1];
        y[i] = v;
    }
    return y;
}

} // namespace mfgip
