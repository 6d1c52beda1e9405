#pragma once

#include "mfgip/linearized_solver.hpp"
#include "mfgip/measurement.hpp"
#include "mfgip/modal_propagator.hpp"
#include "mfgip/running_cost.hpp"
#include "mfgip/spectral_basis.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mfgip {

struct ReconstructionSettings {
    double c_lo = 1e-3;
    double c_hi = 50.0;
    double cross_tol = 1e-2;      // relative gap allowed between the density and value roots
    std::size_t modes = 8;        // unknown modal coefficients per higher order (modes 0..modes-1)
    std::size_t taylor_order = 3; // highest Taylor order recovered
    std::vector<std::size_t> probe_modes{1, 2};
    std::vector<std::vector<std::size_t>> pairs{{1, 1}, {1, 2}, {2, 2}, {1, 3}};
    EpsilonStencil stencil{};
    ForwardConfig simulation{0.0, 0.5, 1e-13, 500, 0.05, 1e-8, 1e-8}; // solver used for model-side stencils
    double tikhonov = 1e-12;
    double condition_limit = 1e10;
    double residual_tol = 1e-5;        // order 2
    double residual_tol_higher = 1e-3; // orders >= 3, where stencil noise is larger
};

struct FirstOrderEstimate {
    std::size_t mode = 0;
    double c = 0.0;            // root of the density equation mu_i(T; c) = observed
    double c_from_value = 0.0; // root of nu_i(0; c) = observed
    double observed_density = 0.0;
    double observed_value = 0.0;
    bool noisy = false;
};

struct CoefficientEstimate {
    std::size_t order = 0;
    std::vector<double> coefficients; // on grid cosines 0..modes-1
    GridFunction field;
    double residual = 0.0;  // weighted least-squares residual relative to the data norm
    double condition = 0.0; // of the column-scaled normal matrix
    bool truncation_flagged = false;
    std::vector<std::string> probes;
};

struct ReconstructionReport {
    double c1 = 0.0;
    std::vector<FirstOrderEstimate> first_order;
    std::vector<CoefficientEstimate> higher;
    std::vector<std::string> warnings;

    RunningCost as_running_cost() const {
        std::vector<GridFunction> fields;
        for (const auto& h : higher) fields.push_back(h.field);
        return RunningCost(c1, std::move(fields));
    }
};

namespace detail {

inline double find_root(const std::function<double(double)>& f, double lo, double hi, const char* what) {
    const double f_lo = f(lo), f_hi = f(hi);
    require(std::isfinite(f_lo) && std::isfinite(f_hi), ErrorKind::bracket_failure,
            std::string(what) + ": prediction is not finite at the bracket ends");
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    require((f_lo < 0.0) != (f_hi < 0.0), ErrorKind::bracket_failure,
            std::string(what) + ": no sign change on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (a + b);
}

inline std::string tuple_label(const std::vector<std::size_t>& t) {
    std::string s = "(";
    for (std::size_t q = 0; q < t.size(); ++q) s += (q ? "," : "") + std::to_string(t[q]);
    return s + ")";
}

// Default order-k direction tuples: all non-decreasing tuples over modes {1, 2}
// plus (1, ..., 1, 3).
inline std::vector<std::vector<std::size_t>> default_tuples(std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t twos = 0; twos <= k; ++twos) {
        std::vector<std::size_t> t(k - twos, 1);
        t.insert(t.end(), twos, 2);
        out.push_back(t);
    }
    std::vector<std::size_t> t(k - 1, 1);
    t.push_back(3);
    out.push_back(t);
    return out;
}

// Weighted least squares over stacked (u0, mT) rows. Columns are scaled to
// unit norm before forming the normal equations.
struct LeastSquaresResult {
    std::vector<double> x;
    double residual = 0.0;
    double condition = 0.0;
};

inline LeastSquaresResult solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double data_norm,
                                              const ReconstructionSettings& settings) {
    const Eigen::Index n = a.cols();
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = a.col(i).norm();
        require(s > 0.0, ErrorKind::ill_posed, "a sensitivity column vanishes; add probe directions exciting it");
        scale(i) = s;
    }
    const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
    Eigen::MatrixXd normal = as.transpose() * as;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    LeastSquaresResult out;
    out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    require(out.condition <= settings.condition_limit, ErrorKind::ill_posed,
            "sensitivity matrix condition number " + std::to_string(out.condition) +
                " exceeds the limit; use more probe pairs or fewer modes");
    normal.diagonal().array() += settings.tikhonov;
    const Eigen::VectorXd y = normal.ldlt().solve(as.transpose() * b);
    const Eigen::VectorXd x = y.cwiseQuotient(scale);
    out.x.assign(x.data(), x.data() + x.size());
    out.residual = (a * x - b).norm() / std::max(data_norm, std::numeric_limits<double>::min());
    return out;
}

inline void append_rows(Eigen::MatrixXd& a, Eigen::VectorXd& b, Eigen::Index row, const SpaceGrid& space,
                        std::span<const double> target_u, std::span<const double> target_m,
                        const std::vector<const LinearSolution*>& columns, std::size_t last) {
    const auto w = space.weights();
    const std::size_t n = space.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double sw = std::sqrt(w[j]);
        b(row + j) = sw * target_u[j];
        b(row + n + j) = sw * target_m[j];
        for (std::size_t i = 0; i < columns.size(); ++i) {
            a(row + j, i) = sw * columns[i]->u(0, j);
            a(row + n + j, i) = sw * columns[i]->m(last, j);
        }
    }
}

inline double weighted_norm_sq(const SpaceGrid& space, std::span<const double> f) {
    const auto w = space.weights();
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += w[j] * f[j] * f[j];
    return s;
}

inline CoefficientEstimate finish_estimate(std::size_t order, const LeastSquaresResult& ls, const SpectralBasis& basis,
                                           std::size_t modes, const ReconstructionSettings& settings,
                                           std::vector<std::string> probes) {
    CoefficientEstimate est;
    est.order = order;
    est.coefficients = ls.x;
    std::vector<double> full(modes, 0.0);
    std::copy(ls.x.begin(), ls.x.end(), full.begin());
    est.field = basis.synthesize(full);
    est.residual = ls.residual;
    est.condition = ls.condition;
    est.truncation_flagged = ls.residual > (order == 2 ? settings.residual_tol : settings.residual_tol_higher);
    est.probes = std::move(probes);
    return est;
}

} // namespace detail

/// Step I: recovers the scalar F^(1) from the first variation along mbar_i.
///
/// The mode-i coefficient of the extracted m^(1)(., T) is matched against the
/// modal prediction mu_i(T; c) of the grid-consistent linear model by a
/// bracketing root finder; the value coefficient of u^(1)(., 0) gives an
/// independent root used as a consistency check.
inline FirstOrderEstimate recover_F1(const MeasurementOracle& oracle, std::size_t i,
                                     const ReconstructionSettings& settings = {}) {
    const auto& space = oracle.space();
    const auto& time = oracle.time();
    require(i >= 1 && i + 1 < space.size(), ErrorKind::invalid_argument, "probe mode must satisfy 1 <= i < N-1");
    const auto direction = cosine_mode(space, i);
    const auto data = extract_order1(oracle, direction, settings.stencil);

    const auto basis = grid_eigenbasis(space);
    FirstOrderEstimate est;
    est.mode = i;
    est.observed_density = basis.coefficient(data.mT, i);
    est.observed_value = basis.coefficient(data.u0, i);
    est.noisy = data.noisy;

    const double beta = basis.eigenvalue(i);
    auto predict = [&](double c) {
        return solve_modal_bvp(beta, c, time, TimeScheme::crank_nicolson, 1.0, 0.0);
    };
    est.c = detail::find_root([&](double c) { return predict(c).mu.back() - est.observed_density; }, settings.c_lo,
                              settings.c_hi, "density root");
    est.c_from_value = detail::find_root([&](double c) { return predict(c).nu.front() - est.observed_value; },
                                         settings.c_lo, settings.c_hi, "value root");
    const double gap = std::abs(est.c - est.c_from_value) / std::max(std::abs(est.c), 1e-300);
    require(gap <= settings.cross_tol, ErrorKind::inconsistent_data,
            "density and value roots disagree: " + std::to_string(est.c) + " vs " + std::to_string(est.c_from_value));
    return est;
}

/// Step II: recovers F^(2) = sum_{i < modes} a_i mbar_i by least squares.
///
/// For each probe pair (j, l) the mixed second variation is measured; the
/// model prediction is R0 + sum_i a_i S_i where R0 solves the second-order
/// system with F^(2) = 0 and S_i = solve_second_order(F^(2) = mbar_i) - R0.
inline CoefficientEstimate recover_F2(const MeasurementOracle& oracle, double c,
                                      const ReconstructionSettings& settings = {}) {
    const auto& space = oracle.space();
    const auto& time = oracle.time();
    require(c > 0.0, ErrorKind::invalid_argument, "recover_F2 needs the recovered c > 0");
    require(!settings.pairs.empty(), ErrorKind::invalid_argument, "recover_F2 needs probe pairs");
    const auto model = LinearModel::grid_consistent(space, time);
    const std::size_t modes = settings.modes;
    require(modes >= 1 && modes <= space.size(), ErrorKind::invalid_argument, "invalid number of modes");

    const std::size_t n = space.size();
    const Eigen::Index rows = static_cast<Eigen::Index>(2 * n * settings.pairs.size());
    Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(modes));
    Eigen::VectorXd b(rows);
    double data_norm_sq = 0.0;
    std::vector<std::string> probes;

    for (std::size_t p = 0; p < settings.pairs.size(); ++p) {
        const auto& pair = settings.pairs[p];
        require(pair.size() == 2, ErrorKind::invalid_argument, "probe pairs must have two entries");
        const auto fj = cosine_mode(space, pair[0]);
        const auto fl = cosine_mode(space, pair[1]);
        const auto data = extract_order2(oracle, fj, fl, settings.stencil);
        const auto first_j = solve_first_order(c, fj, model);
        const auto first_l = solve_first_order(c, fl, model);
        const auto base = solve_second_order(c, {}, first_j, first_l, model);

        std::vector<LinearSolution> sens;
        sens.reserve(modes);
        for (std::size_t i = 0; i < modes; ++i) {
            const auto f2 = cosine_mode(space, i);
            auto s = solve_second_order(c, f2, first_j, first_l, model);
            for (std::size_t q = 0; q < s.u.values().size(); ++q) {
                s.u.values()[q] -= base.u.values()[q];
                s.m.values()[q] -= base.m.values()[q];
            }
            sens.push_back(std::move(s));
        }
        std::vector<const LinearSolution*> cols;
        for (const auto& s : sens) cols.push_back(&s);

        GridFunction tu(n), tm(n);
        for (std::size_t j = 0; j < n; ++j) {
            tu[j] = data.u0[j] - base.u(0, j);
            tm[j] = data.mT[j] - base.m(time.steps(), j);
        }
        detail::append_rows(a, b, static_cast<Eigen::Index>(2 * n * p), space, tu, tm, cols, time.steps());
        data_norm_sq += detail::weighted_norm_sq(space, data.u0) + detail::weighted_norm_sq(space, data.mT);
        probes.push_back(detail::tuple_label(pair) + (data.noisy ? " [noisy]" : ""));
    }

    const auto ls = detail::solve_least_squares(a, b, std::sqrt(data_norm_sq), settings);
    return detail::finish_estimate(2, ls, grid_eigenbasis(space), modes, settings, std::move(probes));
}

/// Step III: recovers F^(k) given orders 1..k-1.
///
/// The order-k variation of the data is compared with the same stencil
/// applied to simulated solves of the known lower-order cost; the difference
/// is linear in F^(k), whose only source is F^(k) m^(1) ... m^(k) in the value
/// equation. Sensitivities are solve_linear with that source per cosine.
inline CoefficientEstimate recover_Fk(const MeasurementOracle& oracle, const RunningCost& known, std::size_t k,
                                      const ReconstructionSettings& settings = {},
                                      std::vector<std::vector<std::size_t>> tuples = {}) {
    const auto& space = oracle.space();
    const auto& time = oracle.time();
    require(k >= 2, ErrorKind::invalid_argument, "recover_Fk is for orders k >= 2");
    require(known.c1() > 0.0, ErrorKind::invalid_argument, "recover_Fk needs a positive c");
    if (tuples.empty()) tuples = detail::default_tuples(k);
    const auto model = LinearModel::grid_consistent(space, time);
    const double c = known.c1();
    const std::size_t modes = settings.modes;
    const std::size_t n = space.size();
    const std::size_t last = time.steps();

    ForwardConfig sim_cfg = settings.simulation;
    sim_cfg.terminal_cost = oracle.terminal_cost();
    const SolverOracle simulator(known.truncated(k - 1), sim_cfg, space, time);

    const Eigen::Index rows = static_cast<Eigen::Index>(2 * n * tuples.size());
    Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(modes));
    Eigen::VectorXd b(rows);
    double data_norm_sq = 0.0;
    std::vector<std::string> probes;

    for (std::size_t p = 0; p < tuples.size(); ++p) {
        const auto& tuple = tuples[p];
        require(tuple.size() == k, ErrorKind::invalid_argument, "direction tuples must have k entries");
        std::vector<GridFunction> dirs;
        std::vector<LinearSolution> firsts;
        for (std::size_t idx : tuple) {
            dirs.push_back(cosine_mode(space, idx));
            firsts.push_back(solve_first_order(c, dirs.back(), model));
        }
        std::vector<std::span<const double>> spans(dirs.begin(), dirs.end());
        const auto data = extract_orderk(oracle, spans, settings.stencil);
        const auto base = extract_orderk(simulator, spans, settings.stencil);

        SpaceTimeField product(space, time, 1.0);
        for (const auto& f : firsts)
            for (std::size_t q = 0; q < product.values().size(); ++q) product.values()[q] *= f.m.values()[q];

        std::vector<LinearSolution> sens;
        for (std::size_t i = 0; i < modes; ++i) {
            const auto shape = cosine_mode(space, i);
            SpaceTimeField h(space, time);
            for (std::size_t t = 0; t <= last; ++t)
                for (std::size_t j = 0; j < n; ++j) h(t, j) = shape[j] * product(t, j);
            sens.push_back(solve_linear(c, model, {}, {}, &h, nullptr));
        }
        std::vector<const LinearSolution*> cols;
        for (const auto& s : sens) cols.push_back(&s);

        GridFunction tu(n), tm(n);
        for (std::size_t j = 0; j < n; ++j) {
            tu[j] = data.u0[j] - base.u0[j];
            tm[j] = data.mT[j] - base.mT[j];
        }
        detail::append_rows(a, b, static_cast<Eigen::Index>(2 * n * p), space, tu, tm, cols, last);
        data_norm_sq += detail::weighted_norm_sq(space, data.u0) + detail::weighted_norm_sq(space, data.mT);
        probes.push_back(detail::tuple_label(tuple) + (data.noisy ? " [noisy]" : ""));
    }

    const auto ls = detail::solve_least_squares(a, b, std::sqrt(data_norm_sq), settings);
    return detail::finish_estimate(k, ls, grid_eigenbasis(space), modes, settings, std::move(probes));
}

/// Steps I to III in sequence. Any stage error propagates.
inline ReconstructionReport recover_running_cost(const MeasurementOracle& oracle,
                                                 const ReconstructionSettings& settings = {}) {
    require(!settings.probe_modes.empty(), ErrorKind::invalid_argument, "at least one probe mode is required");
    ReconstructionReport report;
    for (std::size_t i : settings.probe_modes) report.first_order.push_back(recover_F1(oracle, i, settings));
    report.c1 = report.first_order.front().c;
    for (const auto& e : report.first_order) {
        const double gap = std::abs(e.c - report.c1) / report.c1;
        if (gap > settings.cross_tol)
            report.warnings.push_back("probe modes disagree on c: mode " + std::to_string(e.mode) + " gives " +
                                      std::to_string(e.c));
        if (e.noisy) report.warnings.push_back("noisy first-order data on mode " + std::to_string(e.mode));
    }
    if (settings.taylor_order >= 2) report.higher.push_back(recover_F2(oracle, report.c1, settings));
    for (std::size_t k = 3; k <= settings.taylor_order; ++k)
        report.higher.push_back(recover_Fk(oracle, report.as_running_cost(), k, settings));
    for (const auto& h : report.higher)
        if (h.truncation_flagged)
            report.warnings.push_back("order " + std::to_string(h.order) + " least-squares residual " +
                                      std::to_string(h.residual) + " exceeds tolerance");
    return report;
}

} // namespace mfgip
