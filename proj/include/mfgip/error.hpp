#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfgip {

enum class ErrorKind {
    invalid_argument,
    shape_mismatch,
    resolution,        // basis asks for more modes than the grid resolves
    diverged,          // Picard iteration did not converge
    mass_drift,        // discrete mass left its tolerance band
    not_in_basis,      // data not representable by the truncated basis
    bracket_failure,   // no sign change in the root bracket
    inconsistent_data, // cross-validated estimates disagree
    ill_posed,         // least-squares system is rank deficient
    config,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::diverged: return "diverged";
    case ErrorKind::mass_drift: return "mass-drift";
    case ErrorKind::not_in_basis: return "not-in-basis";
    case ErrorKind::bracket_failure: return "bracket-failure";
    case ErrorKind::inconsistent_data: return "inconsistent-data";
    case ErrorKind::ill_posed: return "ill-posed";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Thrown by the forward solver when the fixed point is not reached.
class DivergedError : public Error {
public:
    DivergedError(const std::string& what, double last_residual, int iterations)
        : Error(ErrorKind::diverged, what), last_residual_(last_residual), iterations_(iterations) {}

    double last_residual() const noexcept { return last_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) throw Error(kind, what);
}

} // namespace mfgip
