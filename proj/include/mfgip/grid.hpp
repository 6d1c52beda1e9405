#pragma once

#include "mfgip/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mfgip {

using GridFunction = std::vector<double>;

/// Uniform node-centred grid on the unit interval or unit square.
///
/// Nodes include the boundary, so spacing * (points_per_axis - 1) = 1 and the
/// domain has unit measure. Quadrature is the composite trapezoid rule
/// (tensor product in 2-D).
class SpaceGrid {
public:
    static SpaceGrid unit_interval(std::size_t points) { return SpaceGrid(1, points); }
    static SpaceGrid unit_square(std::size_t points_per_axis) { return SpaceGrid(2, points_per_axis); }

    int dimension() const noexcept { return dimension_; }
    std::size_t points_per_axis() const noexcept { return points_; }
    std::size_t size() const noexcept { return dimension_ == 1 ? points_ : points_ * points_; }
    double spacing() const noexcept { return spacing_; }
    double total_measure() const noexcept { return 1.0; }

    /// Coordinate of node j along one axis.
    double coordinate(std::size_t j) const noexcept { return static_cast<double>(j) * spacing_; }

    std::span<const double> weights() const noexcept { return weights_; }

    bool operator==(const SpaceGrid& other) const noexcept {
        return dimension_ == other.dimension_ && points_ == other.points_;
    }

private:
    SpaceGrid(int dimension, std::size_t points) : dimension_(dimension), points_(points) {
        require(points >= 2, ErrorKind::invalid_argument, "space grid needs at least 2 points per axis");
        spacing_ = 1.0 / static_cast<double>(points - 1);
        std::vector<double> axis(points, spacing_);
        axis.front() = axis.back() = 0.5 * spacing_;
        if (dimension == 1) {
            weights_ = axis;
        } else {
            weights_.resize(points * points);
            for (std::size_t iy = 0; iy < points; ++iy)
                for (std::size_t ix = 0; ix < points; ++ix) weights_[ix + points * iy] = axis[ix] * axis[iy];
        }
    }

    int dimension_;
    std::size_t points_;
    double spacing_ = 0.0;
    std::vector<double> weights_;
};

class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
        require(horizon > 0.0 && std::isfinite(horizon), ErrorKind::invalid_argument, "time horizon must be positive");
        require(steps >= 1, ErrorKind::invalid_argument, "time grid needs at least one step");
        dt_ = horizon / static_cast<double>(steps);
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t nodes() const noexcept { return steps_ + 1; }
    double dt() const noexcept { return dt_; }
    double node(std::size_t n) const noexcept { return n == steps_ ? horizon_ : static_cast<double>(n) * dt_; }

    bool operator==(const TimeGrid& other) const noexcept {
        return horizon_ == other.horizon_ && steps_ == other.steps_;
    }

private:
    double horizon_;
    std::size_t steps_;
    double dt_;
};

/// Scalar field on time nodes x space nodes, stored row-major by time node.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(std::size_t time_nodes, std::size_t space_nodes, double value = 0.0)
        : time_nodes_(time_nodes), space_nodes_(space_nodes), values_(time_nodes * space_nodes, value) {}
    SpaceTimeField(const SpaceGrid& space, const TimeGrid& time, double value = 0.0)
        : SpaceTimeField(time.nodes(), space.size(), value) {}

    std::size_t time_nodes() const noexcept { return time_nodes_; }
    std::size_t space_nodes() const noexcept { return space_nodes_; }

    std::span<double> slice(std::size_t n) noexcept { return {values_.data() + n * space_nodes_, space_nodes_}; }
    std::span<const double> slice(std::size_t n) const noexcept {
        return {values_.data() + n * space_nodes_, space_nodes_};
    }
    GridFunction slice_copy(std::size_t n) const { auto s = slice(n); return {s.begin(), s.end()}; }

    double& operator()(std::size_t n, std::size_t j) noexcept { return values_[n * space_nodes_ + j]; }
    double operator()(std::size_t n, std::size_t j) const noexcept { return values_[n * space_nodes_ + j]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool matches(const SpaceGrid& space, const TimeGrid& time) const noexcept {
        return space_nodes_ == space.size() && time_nodes_ == time.nodes();
    }

private:
    std::size_t time_nodes_ = 0;
    std::size_t space_nodes_ = 0;
    std::vector<double> values_;
};

inline void require_shape(const SpaceGrid& space, std::span<const double> f, const char* what) {
    require(f.size() == space.size(), ErrorKind::shape_mismatch,
            std::string(what) + ": grid function has " + std::to_string(f.size()) + " values, grid has " +
                std::to_string(space.size()));
}

inline void require_shape(const SpaceGrid& space, const TimeGrid& time, const SpaceTimeField& f, const char* what) {
    require(f.matches(space, time), ErrorKind::shape_mismatch, std::string(what) + ": field shape does not match grids");
}

/// Composite trapezoid approximation of the integral over the domain.
inline double quadrature(const SpaceGrid& space, std::span<const double> f) {
    require_shape(space, f, "quadrature");
    auto w = space.weights();
    double sum = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) sum += w[j] * f[j];
    return sum;
}

/// Trapezoid in time composed with the spatial rule.
inline double space_time_quadrature(const SpaceGrid& space, const TimeGrid& time, const SpaceTimeField& f) {
    require_shape(space, time, f, "space_time_quadrature");
    double sum = 0.0;
    for (std::size_t n = 0; n < time.nodes(); ++n) {
        const double wt = (n == 0 || n == time.steps()) ? 0.5 * time.dt() : time.dt();
        sum += wt * quadrature(space, f.slice(n));
    }
    return sum;
}

/// Discrete Laplacian (returns +Delta f) with homogeneous Neumann conditions
/// imposed by ghost-point reflection.
inline GridFunction neumann_laplacian_apply(const SpaceGrid& space, std::span<const double> f) {
    require_shape(space, f, "neumann_laplacian_apply");
    const std::size_t n = space.points_per_axis();
    require(n >= 3, ErrorKind::invalid_argument, "Neumann Laplacian needs at least 3 points per axis");
    const double inv_h2 = 1.0 / (space.spacing() * space.spacing());

    auto axis_second_difference = [&](std::size_t offset, std::size_t stride, GridFunction& out) {
        out[offset] += 2.0 * (f[offset + stride] - f[offset]) * inv_h2;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const std::size_t k = offset + j * stride;
            out[k] += (f[k + stride] - 2.0 * f[k] + f[k - stride]) * inv_h2;
        }
        const std::size_t last = offset + (n - 1) * stride;
        out[last] += 2.0 * (f[last - stride] - f[last]) * inv_h2;
    };

    GridFunction out(f.size(), 0.0);
    if (space.dimension() == 1) {
        axis_second_difference(0, 1, out);
    } else {
        for (std::size_t iy = 0; iy < n; ++iy) axis_second_difference(iy * n, 1, out);
        for (std::size_t ix = 0; ix < n; ++ix) axis_second_difference(ix, n, out);
    }
    return out;
}

inline double sup_norm(std::span<const double> f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorKind::shape_mismatch, "sup_distance: size mismatch");
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

} // namespace mfgip
