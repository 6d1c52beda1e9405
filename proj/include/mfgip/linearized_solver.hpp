#pragma once

#include "mfgip/discrete_ops.hpp"
#include "mfgip/grid.hpp"
#include "mfgip/modal_propagator.hpp"
#include "mfgip/spectral_basis.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace mfgip {

/// Spectral discretisation used by the linear solvers.
///
/// `continuum` truncates to the first K analytic Neumann modes and integrates
/// in time exactly. `grid_consistent` uses the complete eigenbasis of the grid
/// Laplacian and Crank-Nicolson in time, which makes it the exact derivative
/// of solve_mfg at the uniform state.
struct LinearModel {
    SpectralBasis basis;
    TimeGrid time;
    TimeScheme scheme;

    static LinearModel continuum(const SpaceGrid& space, const TimeGrid& time, std::size_t modes) {
        return {build_interval_basis(space, modes, Spectrum::analytic), time, TimeScheme::exponential};
    }
    static LinearModel grid_consistent(const SpaceGrid& space, const TimeGrid& time) {
        return {grid_eigenbasis(space), time, TimeScheme::crank_nicolson};
    }

    const SpaceGrid& space() const noexcept { return basis.grid(); }
};

struct ModalState {
    std::size_t mode = 0;
    ModalSeries series;
};

struct LinearSolution {
    SpaceTimeField u;
    SpaceTimeField m;
    std::vector<ModalState> modal;
};

namespace detail {

inline std::vector<std::vector<double>> project_in_time(const LinearModel& model, const SpaceTimeField& f) {
    // result[i][n] = <f(., t_n), mbar_i>
    std::vector<std::vector<double>> coeffs(model.basis.count(), std::vector<double>(model.time.nodes()));
    for (std::size_t n = 0; n < model.time.nodes(); ++n) {
        const auto a = model.basis.project(f.slice(n));
        for (std::size_t i = 0; i < a.size(); ++i) coeffs[i][n] = a[i];
    }
    return coeffs;
}

inline void require_representable(const LinearModel& model, std::span<const double> f, const char* what) {
    if (model.basis.count() == model.space().size()) return; // complete basis
    const double tol = 1e-8 * std::max(1.0, sup_norm(f));
    const double r = model.basis.truncation_residual(f);
    require(r <= tol, ErrorKind::not_in_basis,
            std::string(what) + " is not representable in the truncated basis (residual " + std::to_string(r) + ")");
}

} // namespace detail

/// Solves the linear system around the uniform state
///
///   -u_t - Delta u - c m = h,   m_t - Delta m - Delta u = g,
///   Neumann on the boundary,    u(T) = u_terminal, m(0) = m_initial,
///
/// mode by mode. Empty spans / null sources mean zero.
inline LinearSolution solve_linear(double c, const LinearModel& model, std::span<const double> u_terminal,
                                   std::span<const double> m_initial, const SpaceTimeField* h = nullptr,
                                   const SpaceTimeField* g = nullptr) {
    const auto& space = model.space();
    const auto& time = model.time;
    if (!u_terminal.empty()) require_shape(space, u_terminal, "solve_linear terminal data");
    if (!m_initial.empty()) require_shape(space, m_initial, "solve_linear initial data");
    if (h) require_shape(space, time, *h, "solve_linear source h");
    if (g) require_shape(space, time, *g, "solve_linear source g");

    const std::size_t count = model.basis.count();
    std::vector<double> nu_T(count, 0.0), mu_0(count, 0.0);
    if (!u_terminal.empty()) nu_T = model.basis.project(u_terminal);
    if (!m_initial.empty()) mu_0 = model.basis.project(m_initial);
    std::vector<std::vector<double>> h_modes, g_modes;
    if (h) h_modes = detail::project_in_time(model, *h);
    if (g) g_modes = detail::project_in_time(model, *g);

    LinearSolution sol;
    sol.modal.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        sol.modal[i].mode = i;
        sol.modal[i].series = solve_modal_bvp(model.basis.eigenvalue(i), c, time, model.scheme, mu_0[i], nu_T[i],
                                              h ? std::span<const double>(h_modes[i]) : std::span<const double>{},
                                              g ? std::span<const double>(g_modes[i]) : std::span<const double>{});
    }

    sol.u = SpaceTimeField(space, time);
    sol.m = SpaceTimeField(space, time);
    std::vector<double> a(count), b(count);
    for (std::size_t n = 0; n < time.nodes(); ++n) {
        for (std::size_t i = 0; i < count; ++i) {
            a[i] = sol.modal[i].series.nu[n];
            b[i] = sol.modal[i].series.mu[n];
        }
        const auto un = model.basis.synthesize(a);
        const auto mn = model.basis.synthesize(b);
        std::copy(un.begin(), un.end(), sol.u.slice(n).begin());
        std::copy(mn.begin(), mn.end(), sol.m.slice(n).begin());
    }
    return sol;
}

/// First-order linearisation: u(T) = 0, m(0) = f1 with zero mean.
inline LinearSolution solve_first_order(double c, std::span<const double> f1, const LinearModel& model) {
    require_shape(model.space(), f1, "solve_first_order f1");
    const double mean = quadrature(model.space(), f1);
    require(std::abs(mean) <= 1e-10, ErrorKind::invalid_argument,
            "first-order perturbation must have zero mean (got " + std::to_string(mean) + ")");
    detail::require_representable(model, f1, "first-order perturbation");

    // Mode 0 is never excited by a zero-mean perturbation.
    GridFunction data(f1.begin(), f1.end());
    for (double& v : data) v -= mean;
    auto sol = solve_linear(c, model, {}, data);
    return sol;
}

/// Sources of the second-order system built from two first-order pairs.
///
/// h = F2 m1 m2 - grad u1 . grad u2 and g = div(m1 grad u2) + div(m2 grad u1),
/// using the same discrete gradient and flux divergence as solve_mfg.
inline std::pair<SpaceTimeField, SpaceTimeField> second_order_sources(std::span<const double> f2_coefficient,
                                                                      const LinearSolution& first_a,
                                                                      const LinearSolution& first_b,
                                                                      const LinearModel& model) {
    const auto& space = model.space();
    const auto& time = model.time;
    require_shape(space, time, first_a.u, "second_order_sources first pair A");
    require_shape(space, time, first_b.u, "second_order_sources first pair B");
    if (!f2_coefficient.empty()) require_shape(space, f2_coefficient, "second_order_sources F2");

    SpaceTimeField h(space, time), g(space, time);
    for (std::size_t n = 0; n < time.nodes(); ++n) {
        const auto ua = first_a.u.slice(n), ub = first_b.u.slice(n);
        const auto ma = first_a.m.slice(n), mb = first_b.m.slice(n);
        const auto ga = central_gradient(space, ua);
        const auto gb = central_gradient(space, ub);
        const auto div_ab = flux_divergence(space, ma, ub);
        const auto div_ba = flux_divergence(space, mb, ua);
        for (std::size_t j = 0; j < space.size(); ++j) {
            const double f2 = f2_coefficient.empty() ? 0.0 : f2_coefficient[j];
            h(n, j) = f2 * ma[j] * mb[j] - ga[j] * gb[j];
            g(n, j) = div_ab[j] + div_ba[j];
        }
    }
    return {std::move(h), std::move(g)};
}

/// Second-order linearisation with zero terminal / initial data.
/// An empty `f2_coefficient` means F^(2) = 0.
inline LinearSolution solve_second_order(double c, std::span<const double> f2_coefficient,
                                         const LinearSolution& first_a, const LinearSolution& first_b,
                                         const LinearModel& model) {
    auto [h, g] = second_order_sources(f2_coefficient, first_a, first_b, model);
    return solve_linear(c, model, {}, {}, &h, &g);
}

/// Reverses the time axis of a field: out(t) = f(T - t).
inline SpaceTimeField reflect_time(const SpaceTimeField& f) {
    SpaceTimeField out(f.time_nodes(), f.space_nodes());
    const std::size_t last = f.time_nodes() - 1;
    for (std::size_t n = 0; n <= last; ++n) {
        auto src = f.slice(last - n);
        std::copy(src.begin(), src.end(), out.slice(n).begin());
    }
    return out;
}

struct AdjointSolution {
    SpaceTimeField v;
    SpaceTimeField rho;
};

/// Backward system v_t - Delta v = c rho, -rho_t - Delta rho - Delta v = 0
/// with rho(T) = rho_terminal and v(0) = 0, obtained from the forward system
/// under t -> T - t.
inline AdjointSolution solve_adjoint(double c, std::span<const double> rho_terminal, const LinearModel& model) {
    require_shape(model.space(), rho_terminal, "solve_adjoint terminal data");
    detail::require_representable(model, rho_terminal, "adjoint terminal data");
    auto forward = solve_linear(c, model, {}, rho_terminal);
    return {reflect_time(forward.u), reflect_time(forward.m)};
}

} // namespace mfgip
