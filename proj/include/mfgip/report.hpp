#pragma once

#include "mfgip/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mfgip {

/// Fixed-format number so that identical results give identical bytes.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10e", v);
    return buf;
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt_bool(bool v) { return v ? "1" : "0"; }

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    std::string body() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t q = 0; q < cells.size(); ++q) out += (q ? "," : "") + cells[q];
            out += '\n';
        };
        line(columns);
        for (const auto& r : rows) line(r);
        return out;
    }
};

/// Canonical text of the effective configuration (after CLI overrides).
inline std::string describe(const ExperimentConfig& c) {
    auto list = [](const auto& v) {
        std::string s;
        for (std::size_t q = 0; q < v.size(); ++q) {
            if constexpr (std::is_floating_point_v<std::decay_t<decltype(v[q])>>) s += (q ? "," : "") + fmt(v[q]);
            else s += (q ? "," : "") + std::to_string(v[q]);
        }
        return s;
    };
    std::string s;
    s += "[grids] points=" + fmt(c.grids.points) + " time_steps=" + fmt(c.grids.time_steps) +
         " horizon=" + fmt(c.grids.horizon) + "\n";
    s += "[forward] terminal_cost=" + fmt(c.forward.terminal_cost) + " damping=" + fmt(c.forward.damping) +
         " picard_tol=" + fmt(c.forward.picard_tol) + " picard_max_iters=" + std::to_string(c.forward.picard_max_iters) +
         " perturbation_bound=" + fmt(c.forward.perturbation_bound) + " mass_tol=" + fmt(c.forward.mass_tol) +
         " positivity_tol=" + fmt(c.forward.positivity_tol) + " perturbation=" + fmt(c.perturbation) +
         " perturbation_mode=" + fmt(c.perturbation_mode) + "\n";
    s += "[probes] max_mode=" + fmt(c.probes.max_mode) + " c_values=" + list(c.probes.c_values) +
         " refinement=" + list(c.probes.refinement) + " certified_modes=" + fmt(c.probes.certified_modes) +
         " modal_tol=" + fmt(c.probes.modal_tol) + " algebra_tol=" + fmt(c.probes.algebra_tol) + "\n";
    s += "[linearization] c=" + fmt(c.linearization.c) + " epsilons=" + list(c.linearization.epsilons) +
         " picard_tol=" + fmt(c.linearization.picard_tol) + "\n";
    s += "[identity] points=" + fmt(c.identity.points) + " time_steps=" + fmt(c.identity.time_steps) +
         " horizon=" + fmt(c.identity.horizon) + " tolerance=" + fmt(c.identity.tolerance) +
         " mutation_floor=" + fmt(c.identity.mutation_floor) + "\n";
    s += "[truth] c1=" + fmt(c.truth.c1);
    for (std::size_t k = 0; k < c.truth.higher.size(); ++k) s += " F" + std::to_string(k + 2) + "=" + c.truth.higher[k].text;
    s += "\n";
    const auto& r = c.reconstruction;
    s += "[reconstruction] modes=" + fmt(r.modes) + " taylor_order=" + fmt(r.taylor_order) +
         " probe_modes=" + list(r.probe_modes) + " epsilons=" + list(r.epsilons) + " c_lo=" + fmt(r.c_lo) +
         " c_hi=" + fmt(r.c_hi) + " picard_tol=" + fmt(r.picard_tol) + " noise_level=" + fmt(r.noise_level) +
         " noise_seeds=" + fmt(r.noise_seeds) + " seed=" + std::to_string(r.seed) + " c_tol=" + fmt(r.c_tol) +
         " f2_tol=" + fmt(r.f2_tol) + " fk_tol=" + fmt(r.fk_tol) + " noise_tol=" + fmt(r.noise_tol) + "\n";
    return s;
}

/// `#`-prefixed provenance block written above every CSV body.
inline std::string provenance_header(const std::string& command, const ExperimentConfig& c) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(describe(c))));
    std::string s;
    s += "# mfgip " + command + "\n";
    s += "# config_hash fnv1a64:" + std::string(hash) + "\n";
    s += "# grid N=" + fmt(c.grids.points) + " M=" + fmt(c.grids.time_steps) + " T=" + fmt(c.grids.horizon) + "\n";
    s += "# tolerances picard=" + fmt(c.forward.picard_tol) + " mass=" + fmt(c.forward.mass_tol) +
         " positivity=" + fmt(c.forward.positivity_tol) + " probe_modal=" + fmt(c.probes.modal_tol) +
         " identity=" + fmt(c.identity.tolerance) + "\n";
    return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::invalid_argument, "cannot write '" + path.string() + "'");
    out << text;
}

} // namespace mfgip
