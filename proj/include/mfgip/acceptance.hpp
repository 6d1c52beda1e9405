#pragma once

#include "mfgip/experiments.hpp"

#include <chrono>
#include <functional>
#include <string>
#include <vector>

namespace mfgip {

struct Criterion {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double limit = 0.0; // wall-clock budget in seconds (0: none)
    ExperimentResult result;

    bool within_budget() const { return limit <= 0.0 || seconds <= limit; }
};

namespace detail {

inline std::string first_failure(const ExperimentResult& r) {
    for (const auto& c : r.checks)
        if (!c.passed) return c.name + ": " + c.detail;
    std::string s;
    for (const auto& c : r.checks) s += (s.empty() ? "" : "; ") + c.detail;
    return s;
}

inline Criterion timed(int id, std::string name, double limit, const std::function<ExperimentResult()>& run) {
    Criterion c;
    c.id = id;
    c.name = std::move(name);
    c.limit = limit;
    const auto start = std::chrono::steady_clock::now();
    c.result = run();
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.passed = c.result.passed();
    c.detail = first_failure(c.result);
    return c;
}

} // namespace detail

/// Criteria 1-8, in order. Each owns the experiment it ran.
inline std::vector<Criterion> run_criteria(const ExperimentConfig& cfg) {
    std::vector<Criterion> out;
    out.push_back(detail::timed(1, "probe algebra", 1, [&] { return run_probe_algebra(cfg); }));
    out.push_back(detail::timed(2, "probe certification", 10, [&] { return run_probe_certification(cfg); }));
    out.push_back(detail::timed(3, "stationary state", 5, [&] { return run_stationary(cfg); }));
    out.push_back(detail::timed(4, "mass conservation", 30, [&] { return run_mass(cfg); }));
    out.push_back(detail::timed(5, "linearization consistency", 120, [&] { return run_linearize_check(cfg); }));
    out.push_back(detail::timed(6, "identity suite", 30, [&] { return run_identity_check(cfg); }));
    out.push_back(detail::timed(7, "inverse round trip", 300, [&] { return run_reconstruct(cfg); }));
    out.push_back(detail::timed(8, "noise robustness", 300, [&] { return run_noise(cfg); }));
    return out;
}

/// Stable file stem per criterion, used for the `all` output tree.
inline std::string criterion_slug(int id) {
    static const char* names[] = {"", "probe_algebra", "probe_certification", "stationary", "mass",
                                  "linearize", "identity", "reconstruct", "noise", "determinism"};
    return names[id];
}

inline std::string csv_bodies(const std::vector<Criterion>& cs) {
    std::string s;
    for (const auto& c : cs) s += "## " + criterion_slug(c.id) + "\n" + c.result.table.body();
    return s;
}

/// Criterion 9: rerun 1-8 and compare every CSV body byte for byte.
inline Criterion check_determinism(const ExperimentConfig& cfg, const std::vector<Criterion>& first) {
    Criterion c;
    c.id = 9;
    c.name = "determinism";
    const auto start = std::chrono::steady_clock::now();
    const auto second = run_criteria(cfg);
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string a = csv_bodies(first), b = csv_bodies(second);
    c.passed = a == b;
    if (c.passed) {
        c.detail = "CSV bodies identical (" + std::to_string(a.size()) + " bytes)";
    } else {
        std::size_t q = 0;
        while (q < a.size() && q < b.size() && a[q] == b[q]) ++q;
        c.detail = "CSV bodies differ at byte " + std::to_string(q);
    }
    c.result.command = "determinism";
    c.result.table.columns = {"criterion", "bytes", "identical"};
    for (std::size_t q = 0; q < first.size(); ++q) {
        const auto x = first[q].result.table.body(), y = second[q].result.table.body();
        c.result.table.add({criterion_slug(first[q].id), std::to_string(x.size()), fmt_bool(x == y)});
    }
    c.result.check("determinism", c.passed, c.detail);
    return c;
}

inline std::string criterion_line(const Criterion& c) {
    char time[32];
    std::snprintf(time, sizeof time, "%.2f", c.seconds);
    std::string s = std::string(c.passed ? "PASS" : "FAIL") + " [" + std::to_string(c.id) + "] " + c.name + " (" + time +
                    " s";
    if (c.limit > 0.0) {
        char lim[32];
        std::snprintf(lim, sizeof lim, "%.0f", c.limit);
        s += std::string(", budget ") + lim + " s" + (c.within_budget() ? "" : ", OVER BUDGET");
    }
    return s + "): " + c.detail;
}

} // namespace mfgip
