#pragma once

#include "mfgip/error.hpp"
#include "mfgip/forward_solver.hpp"
#include "mfgip/grid.hpp"
#include "mfgip/spectral_basis.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mfgip {

// Experiment configuration in a small INI dialect:
//
//   # comment            ; comment
//   [section]
//   key = value          values are numbers, comma lists or expressions
//
// Coefficient expressions for [truth] F2, F3, ...:
//   constant(v)  mode(i, a)  cosine_sum(i:a, j:b, ...)  samples(v0, v1, ...)

/// A higher Taylor coefficient written as one of the whitelisted expressions.
struct CoefficientExpr {
    enum class Kind { constant, mode, cosine_sum, samples };
    Kind kind = Kind::constant;
    std::vector<std::pair<std::size_t, double>> terms; // (mode, amplitude) for mode / cosine_sum
    std::vector<double> values;                        // constant: one value; samples: all values
    std::string text;

    GridFunction evaluate(const SpaceGrid& space) const {
        GridFunction f(space.size(), 0.0);
        switch (kind) {
        case Kind::constant:
            std::fill(f.begin(), f.end(), values.at(0));
            break;
        case Kind::mode:
        case Kind::cosine_sum:
            for (const auto& [i, a] : terms) {
                const auto m = cosine_mode(space, i);
                for (std::size_t j = 0; j < f.size(); ++j) f[j] += a * m[j];
            }
            break;
        case Kind::samples:
            require(values.size() == space.size(), ErrorKind::config,
                    "samples(...) has " + std::to_string(values.size()) + " values but the grid has " +
                        std::to_string(space.size()) + " points");
            f = values;
            break;
        }
        return f;
    }
};

struct ExperimentConfig {
    struct Grids {
        std::size_t points = 129;
        std::size_t time_steps = 100;
        double horizon = 0.1;
    } grids;

    ForwardConfig forward{};
    double perturbation = 0.05;        // sup |m0 - 1| for the `forward` command
    std::size_t perturbation_mode = 1;

    struct Probes {
        std::size_t max_mode = 8;
        std::vector<double> c_values{0.5, 1.0, 2.0, 5.0};
        std::vector<std::size_t> refinement{65, 129, 257};
        std::size_t certified_modes = 3; // modes certified on the refinement ladder
        double modal_tol = 1e-10;
        double algebra_tol = 1e-12;
    } probes;

    struct Linearization {
        double c = 1.0;
        std::vector<double> epsilons{1e-2, 5e-3, 2.5e-3};
        double picard_tol = 1e-13;
    } linearization;

    struct Identity {
        std::size_t points = 65;
        std::size_t time_steps = 16000;
        double horizon = 0.1;
        double tolerance = 1e-6;
        double mutation_floor = 1e-3;
    } identity;

    struct Truth {
        double c1 = 2.0;
        std::vector<CoefficientExpr> higher; // F2, F3, ...
    } truth;

    struct Reconstruction {
        std::size_t modes = 8;
        std::size_t taylor_order = 3;
        std::vector<std::size_t> probe_modes{1, 2};
        std::vector<double> epsilons{1e-2, 5e-3, 2.5e-3};
        double c_lo = 1e-3;
        double c_hi = 50.0;
        double picard_tol = 1e-13;
        double noise_level = 1e-4;
        std::size_t noise_seeds = 10;
        std::uint64_t seed = 1;
        double c_tol = 1e-6;
        double f2_tol = 1e-3;
        double fk_tol = 5e-3;
        double noise_tol = 1e-3;
    } reconstruction;

    std::string source; // text the config was parsed from (empty for defaults)

    ExperimentConfig() {
        truth.higher.push_back(parse_default("cosine_sum(1:0.3, 3:0.1)"));
        truth.higher.push_back(parse_default("mode(2, 0.2)"));
    }

    SpaceGrid space() const { return SpaceGrid::unit_interval(grids.points); }
    TimeGrid time() const { return TimeGrid(grids.horizon, grids.time_steps); }

private:
    static CoefficientExpr parse_default(const std::string& s);
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

[[noreturn]] inline void config_error(std::size_t line, const std::string& msg) {
    throw Error(ErrorKind::config, "line " + std::to_string(line) + ": " + msg);
}

inline double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty()) config_error(line, "expected a number, got '" + s + "'");
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& s, std::size_t line) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty())
        config_error(line, "expected a non-negative integer, got '" + s + "'");
    return v;
}

inline std::vector<double> parse_double_list(const std::string& s, std::size_t line) {
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(parse_double(item, line));
    return out;
}

inline std::vector<std::size_t> parse_index_list(const std::string& s, std::size_t line) {
    std::vector<std::size_t> out;
    for (const auto& item : split(s, ',')) out.push_back(static_cast<std::size_t>(parse_unsigned(item, line)));
    return out;
}

inline CoefficientExpr parse_expression(const std::string& text, std::size_t line) {
    const auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')')
        config_error(line, "expected name(args) for a coefficient expression, got '" + text + "'");
    const std::string name = trim(text.substr(0, open));
    const std::string args = text.substr(open + 1, text.size() - open - 2);
    const auto parts = split(args, ',');
    CoefficientExpr e;
    e.text = text;
    if (name == "constant") {
        if (parts.size() != 1) config_error(line, "constant(v) takes one argument");
        e.kind = CoefficientExpr::Kind::constant;
        e.values = {parse_double(parts[0], line)};
    } else if (name == "mode") {
        if (parts.size() != 2) config_error(line, "mode(i, a) takes two arguments");
        e.kind = CoefficientExpr::Kind::mode;
        e.terms = {{static_cast<std::size_t>(parse_unsigned(parts[0], line)), parse_double(parts[1], line)}};
    } else if (name == "cosine_sum") {
        e.kind = CoefficientExpr::Kind::cosine_sum;
        for (const auto& p : parts) {
            const auto ia = split(p, ':');
            if (ia.size() != 2) config_error(line, "cosine_sum terms are written i:a, got '" + p + "'");
            e.terms.emplace_back(static_cast<std::size_t>(parse_unsigned(ia[0], line)), parse_double(ia[1], line));
        }
    } else if (name == "samples") {
        e.kind = CoefficientExpr::Kind::samples;
        e.values = parse_double_list(args, line);
    } else {
        config_error(line, "unknown coefficient expression '" + name +
                               "' (allowed: constant, mode, cosine_sum, samples)");
    }
    return e;
}

} // namespace detail

inline CoefficientExpr ExperimentConfig::parse_default(const std::string& s) { return detail::parse_expression(s, 0); }

/// Parses the INI text. Unknown sections or keys, malformed values and
/// out-of-range settings raise ErrorKind::config with the offending line.
inline ExperimentConfig parse_config(const std::string& text) {
    using namespace detail;
    ExperimentConfig cfg;
    cfg.source = text;
    std::map<std::size_t, CoefficientExpr> truth_terms; // order -> expression
    bool truth_given = false;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    std::map<std::string, std::size_t> key_line;

    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        for (char mark : {'#', ';'}) {
            const auto pos = s.find(mark);
            if (pos != std::string::npos) s = s.substr(0, pos);
        }
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') config_error(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            static const char* known[] = {"grids", "forward", "probes", "linearization",
                                          "identity", "truth", "reconstruction"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                config_error(line, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) config_error(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (section.empty()) config_error(line, "key '" + key + "' appears before any section");
        if (value.empty()) config_error(line, "key '" + key + "' has no value");
        const std::string full = section + "." + key;
        if (key_line.count(full)) config_error(line, "duplicate key '" + key + "' (first on line " +
                                                         std::to_string(key_line[full]) + ")");
        key_line[full] = line;

        auto unknown = [&] { config_error(line, "unknown key '" + key + "' in [" + section + "]"); };
        auto positive = [&](double v) {
            if (!(v > 0.0)) config_error(line, key + " must be positive");
            return v;
        };
        auto count = [&](std::size_t lo) {
            const auto v = static_cast<std::size_t>(parse_unsigned(value, line));
            if (v < lo) config_error(line, key + " must be at least " + std::to_string(lo));
            return v;
        };

        if (section == "grids") {
            if (key == "points") cfg.grids.points = count(5);
            else if (key == "time_steps") cfg.grids.time_steps = count(1);
            else if (key == "horizon") cfg.grids.horizon = positive(parse_double(value, line));
            else unknown();
        } else if (section == "forward") {
            auto& f = cfg.forward;
            if (key == "terminal_cost") f.terminal_cost = parse_double(value, line);
            else if (key == "damping") {
                f.damping = parse_double(value, line);
                if (!(f.damping > 0.0 && f.damping <= 1.0)) config_error(line, "damping must lie in (0, 1]");
            } else if (key == "picard_tol") f.picard_tol = positive(parse_double(value, line));
            else if (key == "picard_max_iters") f.picard_max_iters = static_cast<int>(count(1));
            else if (key == "perturbation_bound") f.perturbation_bound = positive(parse_double(value, line));
            else if (key == "mass_tol") f.mass_tol = positive(parse_double(value, line));
            else if (key == "positivity_tol") f.positivity_tol = positive(parse_double(value, line));
            else if (key == "perturbation") {
                cfg.perturbation = parse_double(value, line);
                if (cfg.perturbation < 0.0 || cfg.perturbation >= 1.0)
                    config_error(line, "perturbation must lie in [0, 1)");
            } else if (key == "perturbation_mode") cfg.perturbation_mode = count(1);
            else unknown();
        } else if (section == "probes") {
            auto& p = cfg.probes;
            if (key == "max_mode") p.max_mode = count(1);
            else if (key == "c_values") {
                p.c_values = parse_double_list(value, line);
                for (double c : p.c_values)
                    if (!(c > 0.0)) config_error(line, "probe c values must be positive");
            } else if (key == "refinement") {
                p.refinement = parse_index_list(value, line);
                if (p.refinement.size() < 2) config_error(line, "refinement needs at least two grids");
            } else if (key == "certified_modes") p.certified_modes = count(1);
            else if (key == "modal_tol") p.modal_tol = positive(parse_double(value, line));
            else if (key == "algebra_tol") p.algebra_tol = positive(parse_double(value, line));
            else unknown();
        } else if (section == "linearization") {
            auto& l = cfg.linearization;
            if (key == "c") l.c = positive(parse_double(value, line));
            else if (key == "epsilons") {
                l.epsilons = parse_double_list(value, line);
                if (l.epsilons.size() < 2) config_error(line, "at least two epsilons are needed for a slope");
            } else if (key == "picard_tol") l.picard_tol = positive(parse_double(value, line));
            else unknown();
        } else if (section == "identity") {
            auto& d = cfg.identity;
            if (key == "points") d.points = count(9);
            else if (key == "time_steps") d.time_steps = count(2);
            else if (key == "horizon") d.horizon = positive(parse_double(value, line));
            else if (key == "tolerance") d.tolerance = positive(parse_double(value, line));
            else if (key == "mutation_floor") d.mutation_floor = positive(parse_double(value, line));
            else unknown();
        } else if (section == "truth") {
            if (key == "c1") cfg.truth.c1 = parse_double(value, line);
            else if (key.size() >= 2 && key[0] == 'F' &&
                     key.find_first_not_of("0123456789", 1) == std::string::npos) {
                const auto order = static_cast<std::size_t>(parse_unsigned(key.substr(1), line));
                if (order < 2) config_error(line, "higher coefficients start at F2");
                truth_terms[order] = parse_expression(value, line);
                truth_given = true;
            } else unknown();
        } else if (section == "reconstruction") {
            auto& r = cfg.reconstruction;
            if (key == "modes") r.modes = count(1);
            else if (key == "taylor_order") r.taylor_order = count(1);
            else if (key == "probe_modes") r.probe_modes = parse_index_list(value, line);
            else if (key == "epsilons") r.epsilons = parse_double_list(value, line);
            else if (key == "c_lo") r.c_lo = positive(parse_double(value, line));
            else if (key == "c_hi") r.c_hi = positive(parse_double(value, line));
            else if (key == "picard_tol") r.picard_tol = positive(parse_double(value, line));
            else if (key == "noise_level") r.noise_level = parse_double(value, line);
            else if (key == "noise_seeds") r.noise_seeds = count(1);
            else if (key == "seed") r.seed = parse_unsigned(value, line);
            else if (key == "c_tol") r.c_tol = positive(parse_double(value, line));
            else if (key == "f2_tol") r.f2_tol = positive(parse_double(value, line));
            else if (key == "fk_tol") r.fk_tol = positive(parse_double(value, line));
            else if (key == "noise_tol") r.noise_tol = positive(parse_double(value, line));
            else unknown();
        }
    }

    if (truth_given) {
        cfg.truth.higher.clear();
        const std::size_t top = truth_terms.rbegin()->first;
        for (std::size_t k = 2; k <= top; ++k) {
            auto it = truth_terms.find(k);
            cfg.truth.higher.push_back(it != truth_terms.end() ? it->second : detail::parse_expression("constant(0)", 0));
        }
    }
    if (cfg.reconstruction.c_lo >= cfg.reconstruction.c_hi)
        config_error(key_line.count("reconstruction.c_hi") ? key_line["reconstruction.c_hi"] : line,
                     "c_lo must be below c_hi");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::config, "cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

/// FNV-1a 64-bit hash of the config text, for report provenance.
inline std::uint64_t config_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace mfgip
