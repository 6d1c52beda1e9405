#pragma once

#include "mfgip/discrete_ops.hpp"
#include "mfgip/grid.hpp"
#include "mfgip/running_cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace mfgip {

struct ForwardConfig {
    double terminal_cost = 0.0;      // G
    double damping = 0.5;            // theta in (0, 1]
    double picard_tol = 1e-10;
    int picard_max_iters = 500;
    double perturbation_bound = 0.05; // declared small-data radius, not enforced
    double mass_tol = 1e-8;
    double positivity_tol = 1e-8;
};

struct MFGSolution {
    SpaceTimeField u;
    SpaceTimeField m;
    int iterations_used = 0;
    double final_residual = 0.0;
    std::vector<double> residual_history;
    bool contraction_monotone = true; // residual non-increasing after the first iterate
    double min_density = 0.0;
    double max_mass_error = 0.0;
};

/// True when ||m0 - 1||_inf is inside cfg.perturbation_bound.
inline bool within_small_data_regime(std::span<const double> m0, const ForwardConfig& cfg) {
    double dev = 0.0;
    for (double v : m0) dev = std::max(dev, std::abs(v - 1.0));
    return dev <= cfg.perturbation_bound * (1.0 + 1e-12); // cos samples can round just past the bound
}

namespace detail {

inline void check_forward_config(const ForwardConfig& cfg) {
    require(cfg.damping > 0.0 && cfg.damping <= 1.0, ErrorKind::invalid_argument, "damping must lie in (0, 1]");
    require(cfg.picard_tol > 0.0, ErrorKind::invalid_argument, "picard_tol must be positive");
    require(cfg.picard_max_iters >= 1, ErrorKind::invalid_argument, "picard_max_iters must be positive");
}

// Backward Crank-Nicolson sweep for -u_t - Delta u + H = F(x, m), with the
// Hamiltonian H = |grad u|^2 / 2 evaluated on the lagged iterate.
inline SpaceTimeField hjb_sweep(const RunningCost& cost, double terminal, const SpaceTimeField& m,
                                const SpaceTimeField& u_lagged, const SpaceGrid& space, const TimeGrid& time) {
    const std::size_t steps = time.steps();
    const std::size_t n = space.size();
    const double inv_dt = 1.0 / time.dt();

    Tridiagonal implicit_part = laplacian_matrix(space, -0.5);
    for (auto& d : implicit_part.diag) d += inv_dt;
    Tridiagonal explicit_part = laplacian_matrix(space, 0.5);
    for (auto& d : explicit_part.diag) d += inv_dt;

    // source_k = F(x, m^k) - |grad u_lagged^k|^2 / 2
    std::vector<GridFunction> source(time.nodes());
    for (std::size_t k = 0; k < time.nodes(); ++k) {
        source[k] = cost.evaluate(m.slice(k));
        const auto g = central_gradient(space, u_lagged.slice(k));
        for (std::size_t j = 0; j < n; ++j) source[k][j] -= 0.5 * g[j] * g[j];
    }

    SpaceTimeField u(space, time);
    std::fill(u.slice(steps).begin(), u.slice(steps).end(), terminal);
    for (std::size_t k = steps; k-- > 0;) {
        auto rhs = multiply(explicit_part, u.slice(k + 1));
        for (std::size_t j = 0; j < n; ++j) rhs[j] += 0.5 * (source[k][j] + source[k + 1][j]);
        const auto next = implicit_part.solve(rhs);
        std::copy(next.begin(), next.end(), u.slice(k).begin());
    }
    return u;
}

// Forward Crank-Nicolson sweep for m_t - Delta m - div(m grad u) = 0.
inline SpaceTimeField kfp_sweep(std::span<const double> m0, const SpaceTimeField& u, const SpaceGrid& space,
                                const TimeGrid& time) {
    const std::size_t n = space.size();
    const double inv_dt = 1.0 / time.dt();
    SpaceTimeField m(space, time);
    std::copy(m0.begin(), m0.end(), m.slice(0).begin());

    Tridiagonal current = drift_diffusion_matrix(space, u.slice(0));
    for (std::size_t k = 0; k < time.steps(); ++k) {
        Tridiagonal next = drift_diffusion_matrix(space, u.slice(k + 1));
        auto rhs = multiply(current, m.slice(k));
        for (std::size_t j = 0; j < n; ++j) rhs[j] = inv_dt * m(k, j) + 0.5 * rhs[j];
        Tridiagonal lhs = next;
        for (std::size_t j = 0; j < n; ++j) {
            lhs.lower[j] *= -0.5;
            lhs.diag[j] = inv_dt - 0.5 * lhs.diag[j];
            lhs.upper[j] *= -0.5;
        }
        const auto sol = lhs.solve(rhs);
        std::copy(sol.begin(), sol.end(), m.slice(k + 1).begin());
        current = std::move(next);
    }
    return m;
}

} // namespace detail

/// Per-time-node masses (t, integral of m(., t)).
inline std::vector<std::pair<double, double>> mass_trace(const MFGSolution& sol, const SpaceGrid& space,
                                                         const TimeGrid& time) {
    require_shape(space, time, sol.m, "mass_trace");
    std::vector<std::pair<double, double>> trace;
    trace.reserve(time.nodes());
    for (std::size_t k = 0; k < time.nodes(); ++k) trace.emplace_back(time.node(k), quadrature(space, sol.m.slice(k)));
    return trace;
}

/// Solves the coupled HJB / KFP system with Neumann conditions, u(T) = G and
/// m(0) = m0, by damped Picard iteration on the density.
///
/// Each pass runs a backward Crank-Nicolson HJB sweep (Hamiltonian lagged from
/// the previous pass) and a forward Crank-Nicolson KFP sweep in flux form, then
/// relaxes m with factor `damping`. The fixed point is the fully Crank-Nicolson
/// discretisation of the nonlinear system. Mass is conserved to round-off.
inline MFGSolution solve_mfg(const RunningCost& cost, const ForwardConfig& cfg, std::span<const double> m0,
                             const SpaceGrid& space, const TimeGrid& time) {
    detail::check_forward_config(cfg);
    require(space.dimension() == 1, ErrorKind::invalid_argument, "solve_mfg supports the unit interval");
    require_shape(space, m0, "solve_mfg m0");
    for (const auto& f : cost.higher()) require_shape(space, f, "solve_mfg running cost");
    const double mass0 = quadrature(space, m0);
    require(std::abs(mass0 - 1.0) <= 1e-10, ErrorKind::invalid_argument,
            "initial density must integrate to 1 (got " + std::to_string(mass0) + ")");
    for (double v : m0) require(v >= 0.0, ErrorKind::invalid_argument, "initial density must be non-negative");

    MFGSolution sol;
    sol.m = SpaceTimeField(space, time);
    for (std::size_t k = 0; k < time.nodes(); ++k) std::copy(m0.begin(), m0.end(), sol.m.slice(k).begin());
    sol.u = SpaceTimeField(space, time, cfg.terminal_cost);

    const double theta = cfg.damping;
    for (int it = 1; it <= cfg.picard_max_iters; ++it) {
        SpaceTimeField u_new = detail::hjb_sweep(cost, cfg.terminal_cost, sol.m, sol.u, space, time);
        SpaceTimeField m_star = detail::kfp_sweep(m0, u_new, space, time);

        double change = 0.0;
        auto m_old = sol.m.values();
        auto m_next = m_star.values();
        for (std::size_t q = 0; q < m_old.size(); ++q) {
            const double relaxed = (1.0 - theta) * m_old[q] + theta * m_next[q];
            change = std::max(change, std::abs(relaxed - m_old[q]));
            m_old[q] = relaxed;
        }
        change = std::max(change, sup_distance(u_new.values(), sol.u.values()));
        sol.u = std::move(u_new);

        sol.residual_history.push_back(change);
        sol.iterations_used = it;
        sol.final_residual = change;
        if (!std::isfinite(change))
            throw DivergedError("Picard iteration produced non-finite values", change, it);
        if (change < cfg.picard_tol) break;
        if (it == cfg.picard_max_iters)
            throw DivergedError("Picard iteration did not reach tolerance in " + std::to_string(it) +
                                    " iterations (residual " + std::to_string(change) + ")",
                                change, it);
    }

    const auto& h = sol.residual_history;
    for (std::size_t k = 2; k < h.size(); ++k)
        if (h[k] > h[k - 1] && h[k] > 1e-14) sol.contraction_monotone = false;

    sol.min_density = std::numeric_limits<double>::infinity();
    for (double v : sol.m.values()) sol.min_density = std::min(sol.min_density, v);
    for (const auto& [t, mass] : mass_trace(sol, space, time))
        sol.max_mass_error = std::max(sol.max_mass_error, std::abs(mass - 1.0));
    require(sol.max_mass_error <= cfg.mass_tol, ErrorKind::mass_drift,
            "discrete mass drifted by " + std::to_string(sol.max_mass_error));
    return sol;
}

} // namespace mfgip
