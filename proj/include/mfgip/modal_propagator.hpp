#pragma once

#include "mfgip/grid.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace mfgip {

/// Time treatment of the per-mode linear systems.
///
/// `exponential` integrates the 2x2 system exactly, with sources interpolated
/// linearly between time nodes. `crank_nicolson` reproduces, to round-off, the
/// linearisation of the forward solver's Crank-Nicolson scheme.
enum class TimeScheme { exponential, crank_nicolson };

/// Decay exponent and branch vectors of the mode-i system matrix
/// [[beta, -c], [-beta, -beta]], whose eigenvalues are +-lambda.
struct ModalExponents {
    double beta = 0.0;
    double c = 0.0;
    double lambda = 0.0; // sqrt(beta^2 + c beta)
    double k = 0.0;      // beta - lambda

    static ModalExponents of(double beta, double c) {
        const double disc = beta * beta + c * beta;
        require(disc >= 0.0, ErrorKind::invalid_argument,
                "beta^2 + c beta must be non-negative (c too negative for this mode)");
        ModalExponents e;
        e.beta = beta;
        e.c = c;
        e.lambda = std::sqrt(disc);
        e.k = beta - e.lambda;
        return e;
    }
};

/// Coefficients of one mode on the time grid: nu for the value function,
/// mu for the density.
struct ModalSeries {
    std::vector<double> nu;
    std::vector<double> mu;
};

namespace detail {

// phi1(x) = (1 - e^{-x}) / x and psi(x) = (1 - e^{-x}(1 + x)) / x^2.
inline void exponential_weights(double x, double& phi1, double& psi) {
    if (x < 0.5) {
        phi1 = 0.0;
        psi = 0.0;
        double term = 1.0; // (-x)^k / k!
        for (int k = 0; k < 24; ++k) {
            phi1 += term / (k + 1);
            psi += term / (k + 2);
            term *= -x / (k + 1);
        }
        return;
    }
    const double e = std::exp(-x);
    phi1 = (1.0 - e) / x;
    psi = (1.0 - e * (1.0 + x)) / (x * x);
}

inline double source_at(std::span<const double> s, std::size_t n) { return s.empty() ? 0.0 : s[n]; }

} // namespace detail

/// Solves, for one Neumann mode,
///
///   nu' =  beta nu - c mu - h(t),   nu(T) = nu_terminal,
///   mu' = -beta nu - beta mu + g(t), mu(0) = mu_initial,
///
/// on the nodes of `time`. For beta > 0 the solution is split along the
/// decaying and growing branches e^{-lambda t}, e^{lambda t}; the growing branch
/// is anchored at T so no exponential ever exceeds one. beta = 0 is the
/// nilpotent case and reduces to quadrature.
inline ModalSeries solve_modal_bvp(double beta, double c, const TimeGrid& time, TimeScheme scheme,
                                   double mu_initial, double nu_terminal, std::span<const double> h = {},
                                   std::span<const double> g = {}) {
    const std::size_t steps = time.steps();
    const std::size_t nodes = time.nodes();
    const double dt = time.dt();
    require(h.empty() || h.size() == nodes, ErrorKind::shape_mismatch, "modal source h has wrong length");
    require(g.empty() || g.size() == nodes, ErrorKind::shape_mismatch, "modal source g has wrong length");
    require(beta >= 0.0, ErrorKind::invalid_argument, "eigenvalue must be non-negative");

    ModalSeries out{std::vector<double>(nodes), std::vector<double>(nodes)};

    if (beta == 0.0) {
        out.mu[0] = mu_initial;
        for (std::size_t n = 0; n < steps; ++n)
            out.mu[n + 1] = out.mu[n] + 0.5 * dt * (detail::source_at(g, n) + detail::source_at(g, n + 1));
        out.nu[steps] = nu_terminal;
        for (std::size_t n = steps; n-- > 0;) {
            const double f0 = c * out.mu[n] + detail::source_at(h, n);
            const double f1 = c * out.mu[n + 1] + detail::source_at(h, n + 1);
            out.nu[n] = out.nu[n + 1] + 0.5 * dt * (f0 + f1);
        }
        return out;
    }

    const auto ex = ModalExponents::of(beta, c);
    const double lam = ex.lambda;
    const double x = lam * dt;

    double decay = 0.0, w_first = 0.0, w_second = 0.0;
    if (scheme == TimeScheme::exponential) {
        double phi1 = 0.0, psi = 0.0;
        detail::exponential_weights(x, phi1, psi);
        decay = std::exp(-x);
        w_first = dt * psi;           // weight of the source at the far end of the step
        w_second = dt * (phi1 - psi); // weight at the near end
    } else {
        decay = (1.0 - 0.5 * x) / (1.0 + 0.5 * x);
        w_first = w_second = 0.5 * dt / (1.0 + 0.5 * x);
    }

    // Branch vectors: w_minus = (c, beta + lambda), w_plus = (-(beta + lambda), beta).
    const double bl = beta + lam;
    const double det_w = c * beta + bl * bl;
    const bool forced = !h.empty() || !g.empty();
    std::vector<double> sig_minus(nodes, 0.0), sig_plus(nodes, 0.0);
    if (forced) {
        for (std::size_t n = 0; n < nodes; ++n) {
            const double s_nu = -detail::source_at(h, n);
            const double s_mu = detail::source_at(g, n);
            sig_minus[n] = (beta * s_nu + bl * s_mu) / det_w;
            sig_plus[n] = (-bl * s_nu + c * s_mu) / det_w;
        }
    }

    // a_n = decay^n a_0 + A_n ; b_n = decay^{M-n} b_M - B_n
    std::vector<double> A(nodes, 0.0), B(nodes, 0.0), powers(nodes, 1.0);
    for (std::size_t n = 1; n < nodes; ++n) powers[n] = powers[n - 1] * decay;
    if (forced) {
        for (std::size_t n = 0; n < steps; ++n)
            A[n + 1] = decay * A[n] + w_first * sig_minus[n] + w_second * sig_minus[n + 1];
        for (std::size_t n = steps; n-- > 0;)
            B[n] = decay * B[n + 1] + w_second * sig_plus[n] + w_first * sig_plus[n + 1];
    }

    const double eM = powers[steps];
    // [bl, beta eM; c eM, -bl] [a0; bM] = [mu0 + beta B_0; nuT - c A_M]
    const double r0 = mu_initial + beta * B[0];
    const double r1 = nu_terminal - c * A[steps];
    const double det = -bl * bl - c * beta * eM * eM;
    const double a0 = (r0 * (-bl) - beta * eM * r1) / det;
    const double bM = (bl * r1 - c * eM * r0) / det;

    for (std::size_t n = 0; n < nodes; ++n) {
        const double a = powers[n] * a0 + A[n];
        const double b = powers[steps - n] * bM - B[n];
        out.nu[n] = c * a - bl * b;
        out.mu[n] = bl * a + beta * b;
    }
    return out;
}

} // namespace mfgip
