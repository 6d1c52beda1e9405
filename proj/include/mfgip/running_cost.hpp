#pragma once

#include "mfgip/grid.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace mfgip {

/// Running cost F(x, m) = sum_{k=1..K} F^(k)(x) (m - 1)^k / k!.
///
/// F^(1) is a scalar; F^(k) for k >= 2 are grid functions. The series has no
/// constant term, so F(x, 1) = 0 identically.
class RunningCost {
public:
    RunningCost() = default;
    explicit RunningCost(double c1, std::vector<GridFunction> higher = {})
        : c1_(c1), higher_(std::move(higher)) {
        for (std::size_t k = 1; k < higher_.size(); ++k)
            require(higher_[k].size() == higher_[0].size(), ErrorKind::shape_mismatch,
                    "running cost coefficients must share one grid");
    }

    double c1() const noexcept { return c1_; }

    /// Highest order carried (1 when only F^(1) is present).
    std::size_t max_order() const noexcept { return 1 + higher_.size(); }

    /// F^(k) for k >= 2; an empty span when the order is not stored (zero).
    std::span<const double> coefficient(std::size_t k) const {
        require(k >= 2, ErrorKind::invalid_argument, "coefficient(k) is for k >= 2; use c1()");
        if (k - 2 >= higher_.size()) return {};
        return higher_[k - 2];
    }

    const std::vector<GridFunction>& higher() const noexcept { return higher_; }

    /// Copy with F^(k) replaced (padding intermediate orders with zeros).
    RunningCost with_coefficient(std::size_t k, GridFunction field) const {
        require(k >= 2, ErrorKind::invalid_argument, "with_coefficient(k) is for k >= 2");
        RunningCost out = *this;
        if (out.higher_.size() < k - 1) out.higher_.resize(k - 1, GridFunction(field.size(), 0.0));
        out.higher_[k - 2] = std::move(field);
        return out;
    }

    /// Copy keeping orders 1..k only.
    RunningCost truncated(std::size_t k) const {
        RunningCost out = *this;
        if (k < 2) out.higher_.clear();
        else if (out.higher_.size() > k - 1) out.higher_.resize(k - 1);
        return out;
    }

    GridFunction evaluate(std::span<const double> m) const {
        for (const auto& f : higher_)
            require(f.size() == m.size(), ErrorKind::shape_mismatch, "RunningCost::evaluate: shape mismatch");
        GridFunction out(m.size());
        for (std::size_t j = 0; j < m.size(); ++j) {
            const double z = m[j] - 1.0;
            double power = z;
            double sum = c1_ * z;
            double factorial = 1.0;
            for (std::size_t k = 0; k < higher_.size(); ++k) {
                power *= z;
                factorial *= static_cast<double>(k + 2);
                sum += higher_[k][j] * power / factorial;
            }
            out[j] = sum;
        }
        return out;
    }

private:
    double c1_ = 1.0;
    std::vector<GridFunction> higher_;
};

enum class AdmissibilityClause { holomorphic, vanishes_at_one, positive_first_coefficient };

inline std::string to_string(AdmissibilityClause clause) {
    switch (clause) {
    case AdmissibilityClause::holomorphic: return "(i) finite power-series coefficients";
    case AdmissibilityClause::vanishes_at_one: return "(ii) F(x,1) = 0";
    case AdmissibilityClause::positive_first_coefficient: return "(iii) F^(1) is a positive real number";
    }
    return "?";
}

struct AdmissibilityReport {
    bool admissible = true;
    std::vector<AdmissibilityClause> failed;

    bool fails(AdmissibilityClause clause) const {
        for (auto c : failed)
            if (c == clause) return true;
        return false;
    }
};

inline AdmissibilityReport check_admissible(const RunningCost& cost) {
    AdmissibilityReport report;
    bool finite = std::isfinite(cost.c1());
    for (const auto& f : cost.higher())
        for (double v : f) finite = finite && std::isfinite(v);
    if (!finite) report.failed.push_back(AdmissibilityClause::holomorphic);
    // (ii) holds structurally: the stored series has no constant term.
    if (!(cost.c1() > 0.0)) report.failed.push_back(AdmissibilityClause::positive_first_coefficient);
    report.admissible = report.failed.empty();
    return report;
}

} // namespace mfgip
