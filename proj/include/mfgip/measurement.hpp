#pragma once

#include "mfgip/forward_solver.hpp"
#include "mfgip/grid.hpp"
#include "mfgip/running_cost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mfgip {

/// (u(., 0), m(., T)) of one forward solve.
struct MeasurementRecord {
    GridFunction u0;
    GridFunction mT;
    std::string provenance;
};

inline MeasurementRecord measure(const RunningCost& cost, const ForwardConfig& cfg, std::span<const double> m0,
                                 const SpaceGrid& space, const TimeGrid& time) {
    const auto sol = solve_mfg(cost, cfg, m0, space, time);
    MeasurementRecord rec;
    rec.u0 = sol.u.slice_copy(0);
    rec.mT = sol.m.slice_copy(time.steps());
    rec.provenance = "solve_mfg N=" + std::to_string(space.points_per_axis()) + " M=" + std::to_string(time.steps()) +
                     " T=" + std::to_string(time.horizon());
    return rec;
}

/// Additive Gaussian noise on records. The standard deviation of each
/// component is `level` times the sup-norm of that component's deviation from
/// the uniform-state record (G, 1), so the level is relative to the signal the
/// initial perturbation produced.
struct NoiseModel {
    double level = 0.0;
    std::uint64_t seed = 0;
};

/// Anything that answers m0 -> N(m0). The inverse pipeline only talks to this.
class MeasurementOracle {
public:
    virtual ~MeasurementOracle() = default;
    virtual MeasurementRecord measure(std::span<const double> m0) const = 0;
    virtual const SpaceGrid& space() const = 0;
    virtual const TimeGrid& time() const = 0;
    virtual double terminal_cost() const = 0;
};

/// Oracle backed by solve_mfg with a hidden running cost.
class SolverOracle final : public MeasurementOracle {
public:
    SolverOracle(RunningCost truth, ForwardConfig cfg, SpaceGrid space, TimeGrid time, NoiseModel noise = {})
        : truth_(std::move(truth)), cfg_(cfg), space_(std::move(space)), time_(time), noise_(noise) {}

    MeasurementRecord measure(std::span<const double> m0) const override {
        auto rec = mfgip::measure(truth_, cfg_, m0, space_, time_);
        ++calls_;
        if (noise_.level > 0.0) add_noise(rec);
        return rec;
    }
    const SpaceGrid& space() const override { return space_; }
    const TimeGrid& time() const override { return time_; }
    double terminal_cost() const override { return cfg_.terminal_cost; }
    std::size_t calls() const noexcept { return calls_; }

private:
    void add_noise(MeasurementRecord& rec) const {
        // One stream per call so results do not depend on evaluation order of
        // other oracles; std::seed_seq fixes the mapping across platforms.
        std::seed_seq seq{static_cast<std::uint32_t>(noise_.seed), static_cast<std::uint32_t>(noise_.seed >> 32),
                          static_cast<std::uint32_t>(calls_)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        auto perturb = [&](GridFunction& f, double baseline) {
            double dev = 0.0;
            for (double v : f) dev = std::max(dev, std::abs(v - baseline));
            const double sigma = noise_.level * dev;
            for (double& v : f) v += sigma * normal(rng);
        };
        perturb(rec.u0, cfg_.terminal_cost);
        perturb(rec.mT, 1.0);
    }

    RunningCost truth_;
    ForwardConfig cfg_;
    SpaceGrid space_;
    TimeGrid time_;
    NoiseModel noise_;
    mutable std::size_t calls_ = 0;
};

enum class StencilScheme { central, one_sided };

struct EpsilonStencil {
    std::vector<double> epsilons{1e-2, 5e-3, 2.5e-3};
    StencilScheme scheme = StencilScheme::central;
    double small_data_bound = 0.05; // sup |m0 - 1| allowed for any stencil point
};

/// Derivative data extracted from records, with the Richardson diagnostics.
struct LinearizedData {
    GridFunction u0;
    GridFunction mT;
    std::vector<MeasurementRecord> per_epsilon; // raw difference quotients, one per epsilon
    double richardson_ratio = 0.0; // |D(e1) - D(e2)| / |D(e2) - D(e3)|, nominal (e1/e2)^p
    double nominal_ratio = 0.0;
    bool noisy = false;
    std::string warning;
};

namespace detail {

inline double combined_distance(const MeasurementRecord& a, const MeasurementRecord& b) {
    return std::max(sup_distance(a.u0, b.u0), sup_distance(a.mT, b.mT));
}

// Mixed central difference of order k along `directions`:
// sum over signs s of (prod s) N(1 + eps sum s_l f_l) / (2^k eps^k).
inline MeasurementRecord mixed_difference(const MeasurementOracle& oracle,
                                          const std::vector<std::span<const double>>& directions, double eps,
                                          StencilScheme scheme, double bound) {
    const auto& space = oracle.space();
    const std::size_t k = directions.size();
    const std::size_t n = space.size();
    MeasurementRecord acc{GridFunction(n, 0.0), GridFunction(n, 0.0), {}};

    auto evaluate = [&](const std::vector<int>& signs) {
        GridFunction m0(n, 1.0);
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < n; ++j) m0[j] += eps * signs[l] * directions[l][j];
        double dev = 0.0;
        for (double v : m0) dev = std::max(dev, std::abs(v - 1.0));
        require(dev <= bound, ErrorKind::invalid_argument,
                "stencil point leaves the small-data ball (|m0 - 1| = " + std::to_string(dev) + ")");
        return oracle.measure(m0);
    };

    if (scheme == StencilScheme::one_sided) {
        // prod over l of (shift_l - 1): signs in {+1, 0}
        for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
            std::vector<int> signs(k);
            int weight = 1;
            for (std::size_t l = 0; l < k; ++l) {
                signs[l] = (mask >> l) & 1U ? 1 : 0;
                if (!signs[l]) weight = -weight;
            }
            const auto rec = evaluate(signs);
            for (std::size_t j = 0; j < n; ++j) {
                acc.u0[j] += weight * rec.u0[j];
                acc.mT[j] += weight * rec.mT[j];
            }
        }
        const double scale = 1.0 / std::pow(eps, static_cast<double>(k));
        for (std::size_t j = 0; j < n; ++j) {
            acc.u0[j] *= scale;
            acc.mT[j] *= scale;
        }
        return acc;
    }

    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        std::vector<int> signs(k);
        int weight = 1;
        for (std::size_t l = 0; l < k; ++l) {
            signs[l] = (mask >> l) & 1U ? -1 : 1;
            weight *= signs[l];
        }
        const auto rec = evaluate(signs);
        for (std::size_t j = 0; j < n; ++j) {
            acc.u0[j] += weight * rec.u0[j];
            acc.mT[j] += weight * rec.mT[j];
        }
    }
    const double scale = 1.0 / std::pow(2.0 * eps, static_cast<double>(k));
    for (std::size_t j = 0; j < n; ++j) {
        acc.u0[j] *= scale;
        acc.mT[j] *= scale;
    }
    return acc;
}

} // namespace detail

/// Order-k derivative of the measurement map at the uniform state along the
/// given zero-mean directions, extrapolated across the epsilon list.
///
/// Central stencils have error O(eps^2) and one-sided ones O(eps); consecutive
/// estimates are combined by Richardson extrapolation for that order. A
/// Richardson ratio far from nominal (when differences are above round-off)
/// marks the result as noisy.
inline LinearizedData extract_orderk(const MeasurementOracle& oracle,
                                     const std::vector<std::span<const double>>& directions,
                                     const EpsilonStencil& stencil = {}) {
    const auto& space = oracle.space();
    require(!directions.empty(), ErrorKind::invalid_argument, "at least one direction is required");
    require(!stencil.epsilons.empty(), ErrorKind::invalid_argument, "the epsilon list is empty");
    for (auto d : directions) {
        require_shape(space, d, "extract_orderk direction");
        const double mean = quadrature(space, d);
        require(std::abs(mean) <= 1e-10, ErrorKind::invalid_argument,
                "perturbation directions must have zero mean (got " + std::to_string(mean) + ")");
    }
    for (double e : stencil.epsilons) require(e > 0.0, ErrorKind::invalid_argument, "epsilons must be positive");

    LinearizedData out;
    for (double e : stencil.epsilons)
        out.per_epsilon.push_back(
            detail::mixed_difference(oracle, directions, e, stencil.scheme, stencil.small_data_bound));

    const double p = stencil.scheme == StencilScheme::central ? 2.0 : 1.0;
    // Extrapolate along the list; keeps the last (finest) extrapolated value.
    std::vector<MeasurementRecord> level = out.per_epsilon;
    std::vector<double> eps = stencil.epsilons;
    if (level.size() >= 2) {
        std::vector<MeasurementRecord> next;
        for (std::size_t q = 0; q + 1 < level.size(); ++q) {
            const double r = std::pow(eps[q] / eps[q + 1], p);
            MeasurementRecord x{GridFunction(space.size()), GridFunction(space.size()), {}};
            for (std::size_t j = 0; j < space.size(); ++j) {
                x.u0[j] = (r * level[q + 1].u0[j] - level[q].u0[j]) / (r - 1.0);
                x.mT[j] = (r * level[q + 1].mT[j] - level[q].mT[j]) / (r - 1.0);
            }
            next.push_back(std::move(x));
        }
        out.u0 = next.back().u0;
        out.mT = next.back().mT;
    } else {
        out.u0 = level.back().u0;
        out.mT = level.back().mT;
    }

    if (level.size() >= 3) {
        const double d1 = detail::combined_distance(level[0], level[1]);
        const double d2 = detail::combined_distance(level[1], level[2]);
        out.nominal_ratio = std::pow(eps[0] / eps[1], p);
        out.richardson_ratio = d2 > 0.0 ? d1 / d2 : 0.0;
        const double scale = std::max({1.0, sup_norm(out.u0), sup_norm(out.mT)});
        const bool resolved = d1 > 1e-9 * scale; // below this the table is round-off
        if (resolved && (out.richardson_ratio < 0.5 * out.nominal_ratio || out.richardson_ratio > 2.0 * out.nominal_ratio)) {
            out.noisy = true;
            out.warning = "noisy derivative: Richardson ratio " + std::to_string(out.richardson_ratio) +
                          " (nominal " + std::to_string(out.nominal_ratio) + ")";
        }
    }
    return out;
}

inline LinearizedData extract_order1(const MeasurementOracle& oracle, std::span<const double> f1,
                                     const EpsilonStencil& stencil = {}) {
    return extract_orderk(oracle, {f1}, stencil);
}

inline LinearizedData extract_order2(const MeasurementOracle& oracle, std::span<const double> f1,
                                     std::span<const double> f2, const EpsilonStencil& stencil = {}) {
    return extract_orderk(oracle, {f1, f2}, stencil);
}

} // namespace mfgip
