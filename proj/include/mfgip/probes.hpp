#pragma once

#include "mfgip/grid.hpp"
#include "mfgip/modal_propagator.hpp"
#include "mfgip/spectral_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mfgip {

enum class ProbeFamily { forward_combined, forward_decay, forward_growth, backward_combined, backward_decay };

inline std::string to_string(ProbeFamily f) {
    switch (f) {
    case ProbeFamily::forward_combined: return "forward_combined";
    case ProbeFamily::forward_decay: return "forward_decay";
    case ProbeFamily::forward_growth: return "forward_growth";
    case ProbeFamily::backward_combined: return "backward_combined";
    case ProbeFamily::backward_decay: return "backward_decay";
    }
    return "?";
}

inline bool is_backward(ProbeFamily f) {
    return f == ProbeFamily::backward_combined || f == ProbeFamily::backward_decay;
}

inline bool is_combined(ProbeFamily f) {
    return f == ProbeFamily::forward_combined || f == ProbeFamily::backward_combined;
}

/// How the two-branch (combined) probes pick the weight of the growing branch.
/// `terminal_condition` solves u(T) = 0 for it; `gamma_equals_D` sets gamma = D_i directly.
enum class CombinedRule { terminal_condition, gamma_equals_D };

/// Scalars of one probing mode. alpha multiplies the decaying branch and gamma
/// the growing one, both written in the probe's own time variable (t for
/// forward probes, T - t for backward ones).
struct ProbingMode {
    std::size_t index = 0;
    ProbeFamily family = ProbeFamily::forward_decay;
    double c = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    double k = 0.0;
    double D = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;

    /// k + (c + k) beta / lambda, zero in exact arithmetic.
    double identity_defect() const { return k + (c + k) * beta / lambda; }
};

/// Probe scalars for a given eigenvalue. Split out of make_*_probe so the
/// algebra can be exercised with artificial eigenvalues.
inline ProbingMode probe_parameters(double beta, double c, ProbeFamily family, double horizon,
                                    CombinedRule rule = CombinedRule::terminal_condition) {
    require(beta > 0.0, ErrorKind::invalid_argument, "probes need a non-constant mode (beta > 0)");
    require(c > 0.0, ErrorKind::invalid_argument, "probes need c > 0");
    ProbingMode p;
    p.family = family;
    p.c = c;
    p.beta = beta;
    p.lambda = std::sqrt(beta * beta + c * beta);
    p.k = -c * beta / (beta + p.lambda); // beta - lambda without cancellation
    require(p.k < 0.0, ErrorKind::invalid_argument, "beta - lambda vanished although c > 0");
    p.D = c / (p.k * (c + p.k));

    switch (family) {
    case ProbeFamily::forward_decay:
        p.alpha = 1.0;
        break;
    case ProbeFamily::forward_growth:
        p.gamma = 1.0;
        break;
    case ProbeFamily::backward_decay:
        // rho = e^{-lambda t} = e^{-lambda T} e^{lambda s} with s = T - t
        p.gamma = std::exp(-p.lambda * horizon);
        break;
    case ProbeFamily::forward_combined:
    case ProbeFamily::backward_combined:
        p.alpha = -p.lambda;
        if (rule == CombinedRule::gamma_equals_D) p.gamma = p.D;
        else p.gamma = -p.alpha * (c + p.k) * p.k / (p.lambda * c) * std::exp(-2.0 * p.lambda * horizon);
        break;
    }
    return p;
}

/// Time profile nu(s) mbar_i, mu(s) mbar_i of a probe, s the probe's own time.
/// Each branch is stored as amplitude * e^{rate (s - anchor)} so that growing
/// branches can be anchored at the horizon and never overflow.
struct ModalProfile {
    struct Branch {
        double nu_amplitude;
        double mu_amplitude;
        double rate;
        double anchor;
    };
    std::vector<Branch> branches;

    double nu(double s) const { return sum(s, true, false); }
    double mu(double s) const { return sum(s, false, false); }
    double nu_rate(double s) const { return sum(s, true, true); }
    double mu_rate(double s) const { return sum(s, false, true); }

private:
    double sum(double s, bool want_nu, bool derivative) const {
        double total = 0.0;
        for (const auto& b : branches) {
            const double e = std::exp(b.rate * (s - b.anchor));
            const double a = want_nu ? b.nu_amplitude : b.mu_amplitude;
            total += (derivative ? b.rate : 1.0) * a * e;
        }
        return total;
    }
};

/// A sampled probe. For forward families (u, m) solve
///   -u_t - Delta u = c m,  m_t - Delta m - Delta u = 0;
/// for backward families the same members hold (v, rho) solving
///   v_t - Delta v = c rho, -rho_t - Delta rho - Delta v = 0.
struct Probe {
    ProbingMode params;
    ModalProfile profile;
    double horizon = 0.0;
    SpaceTimeField u;
    SpaceTimeField m;

    /// Coefficients at physical time t.
    double nu_at(double t) const { return profile.nu(own_time(t)); }
    double mu_at(double t) const { return profile.mu(own_time(t)); }
    /// d/dt of the coefficients at physical time t.
    double nu_rate_at(double t) const { return sign() * profile.nu_rate(own_time(t)); }
    double mu_rate_at(double t) const { return sign() * profile.mu_rate(own_time(t)); }

private:
    double own_time(double t) const { return is_backward(params.family) ? horizon - t : t; }
    double sign() const { return is_backward(params.family) ? -1.0 : 1.0; }
};

namespace detail {

inline ModalProfile profile_of(const ProbingMode& p, double horizon) {
    // decay branch: u = (c + k)/lambda m ; growth branch: u = c/k m
    const double decay_ratio = (p.c + p.k) / p.lambda;
    const double growth_ratio = p.c / p.k;
    ModalProfile prof;
    if (p.alpha != 0.0) prof.branches.push_back({p.alpha * decay_ratio, p.alpha, -p.lambda, 0.0});
    if (p.gamma != 0.0) {
        // gamma e^{lambda s} = (gamma e^{lambda T}) e^{lambda (s - T)}; fold the
        // factor in log space when gamma itself carries e^{-lambda T} or smaller.
        const double log_scaled = std::log(std::abs(p.gamma)) + p.lambda * horizon;
        const double scaled = std::copysign(std::exp(log_scaled), p.gamma);
        prof.branches.push_back({scaled * growth_ratio, scaled, p.lambda, horizon});
    }
    return prof;
}

inline void sample_probe(Probe& probe, const SpectralBasis& basis, const TimeGrid& time) {
    const auto shape = basis.values(probe.params.index);
    probe.u = SpaceTimeField(basis.grid(), time);
    probe.m = SpaceTimeField(basis.grid(), time);
    for (std::size_t n = 0; n < time.nodes(); ++n) {
        const double t = time.node(n);
        const double a = probe.nu_at(t), b = probe.mu_at(t);
        for (std::size_t j = 0; j < shape.size(); ++j) {
            probe.u(n, j) = a * shape[j];
            probe.m(n, j) = b * shape[j];
        }
    }
}

inline Probe make_probe(std::size_t i, double c, ProbeFamily family, const TimeGrid& time, const SpectralBasis& basis,
                        CombinedRule rule) {
    require(i >= 1, ErrorKind::invalid_argument, "probes are built on modes i >= 1 (mode 0 is constant)");
    require(i < basis.count(), ErrorKind::invalid_argument, "probe mode index exceeds the basis");
    Probe p;
    p.params = probe_parameters(basis.eigenvalue(i), c, family, time.horizon(), rule);
    p.params.index = i;
    p.horizon = time.horizon();
    p.profile = profile_of(p.params, p.horizon);
    sample_probe(p, basis, time);
    return p;
}

} // namespace detail

/// Forward probes: decay (e^{-lambda t}), growth (e^{lambda t}) or the
/// two-branch combination whose value component vanishes at t = T.
inline Probe make_forward_probe(std::size_t i, double c, ProbeFamily family, const TimeGrid& time,
                                const SpectralBasis& basis, CombinedRule rule = CombinedRule::terminal_condition) {
    require(!is_backward(family), ErrorKind::invalid_argument, "make_forward_probe needs a forward family");
    return detail::make_probe(i, c, family, time, basis, rule);
}

/// Backward probes, the forward ones under t -> T - t. backward_decay is
/// rho = e^{-lambda t} mbar_i with v = c/k rho.
inline Probe make_backward_probe(std::size_t i, double c, ProbeFamily family, const TimeGrid& time,
                                 const SpectralBasis& basis, CombinedRule rule = CombinedRule::terminal_condition) {
    require(is_backward(family), ErrorKind::invalid_argument, "make_backward_probe needs a backward family");
    return detail::make_probe(i, c, family, time, basis, rule);
}

/// Multiplies every component of a probe by s (s = 0 gives the degenerate probe).
inline Probe scaled(Probe p, double s) {
    for (auto& b : p.profile.branches) {
        b.nu_amplitude *= s;
        b.mu_amplitude *= s;
    }
    for (double& v : p.u.values()) v *= s;
    for (double& v : p.m.values()) v *= s;
    p.params.alpha *= s;
    p.params.gamma *= s;
    return p;
}

struct ProbeTolerances {
    double modal = 1e-10;
    double terminal = 1e-12;
    double boundary = 1e-10;
};

struct ProbeCertificate {
    double modal_residual = 0.0;    // both PDE rows, closed form in t and x (relative)
    double grid_residual = 0.0;     // both PDE rows with the grid Laplacian
    double boundary_residual = 0.0; // normal derivative of both components
    std::optional<double> terminal_residual; // combined families only
    double amplitude = 0.0;
    bool degenerate = false;
    bool passed = false;
};

/// Residual certificate for a probe.
///
/// The modal residual substitutes the closed-form profile into the per-mode
/// ODEs with the basis eigenvalue and is scaled by the size of the terms. The
/// grid residual applies neumann_laplacian_apply to the samples (analytic time
/// derivatives) and is O(spacing^2) for analytic eigenpairs. Only the modal,
/// boundary and terminal parts are asserted.
inline ProbeCertificate certify_probe(const Probe& probe, const SpectralBasis& basis, const TimeGrid& time,
                                      const ProbeTolerances& tol = {}) {
    const auto& p = probe.params;
    require_shape(basis.grid(), time, probe.u, "certify_probe u");
    require_shape(basis.grid(), time, probe.m, "certify_probe m");
    const double beta = basis.eigenvalue(p.index);
    const bool backward = is_backward(p.family);
    const double c = p.c;

    ProbeCertificate cert;
    cert.amplitude = std::max(sup_norm(probe.u.values()), sup_norm(probe.m.values()));
    cert.degenerate = cert.amplitude == 0.0;

    for (std::size_t n = 0; n < time.nodes(); ++n) {
        const double t = time.node(n);
        const double nu = probe.nu_at(t), mu = probe.mu_at(t);
        const double dnu = probe.nu_rate_at(t), dmu = probe.mu_rate_at(t);
        // forward:  -nu' + beta nu - c mu = 0,   mu' + beta mu + beta nu = 0
        // backward:  nu' + beta nu - c mu = 0,  -mu' + beta mu + beta nu = 0
        const double s = backward ? -1.0 : 1.0;
        const double r1 = -s * dnu + beta * nu - c * mu;
        const double r2 = s * dmu + beta * mu + beta * nu;
        const double scale1 = std::max({1.0, std::abs(dnu), std::abs(beta * nu), std::abs(c * mu)});
        const double scale2 = std::max({1.0, std::abs(dmu), std::abs(beta * mu), std::abs(beta * nu)});
        cert.modal_residual = std::max({cert.modal_residual, std::abs(r1) / scale1, std::abs(r2) / scale2});

        const auto shape = basis.values(p.index);
        const auto lap_u = neumann_laplacian_apply(basis.grid(), probe.u.slice(n));
        const auto lap_m = neumann_laplacian_apply(basis.grid(), probe.m.slice(n));
        for (std::size_t j = 0; j < shape.size(); ++j) {
            const double ut = dnu * shape[j], mt = dmu * shape[j];
            const double g1 = -s * ut - lap_u[j] - c * probe.m(n, j);
            const double g2 = s * mt - lap_m[j] - lap_u[j];
            cert.grid_residual = std::max({cert.grid_residual, std::abs(g1), std::abs(g2)});
        }
        const double normal = basis.boundary_normal_derivative(p.index);
        cert.boundary_residual = std::max(cert.boundary_residual, normal * std::max(std::abs(nu), std::abs(mu)));
    }

    if (is_combined(p.family)) {
        // forward: u(., T) = 0 ; backward: v(., 0) = 0
        const std::size_t n = backward ? 0 : time.steps();
        cert.terminal_residual = sup_norm(probe.u.slice(n));
    }

    cert.passed = cert.modal_residual <= tol.modal && cert.boundary_residual <= tol.boundary &&
                  (!cert.terminal_residual || *cert.terminal_residual <= tol.terminal * std::max(1.0, cert.amplitude));
    return cert;
}

} // namespace mfgip
