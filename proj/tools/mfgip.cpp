// Batch runner: one subcommand per experiment, CSV + summary per run.
#include "mfgip/mfgip.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace mfgip;

namespace {

struct Options {
    std::string config;
    std::string out = "mfgip_out";
    std::optional<std::size_t> modes, grid, tsteps;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

ExperimentConfig effective_config(const Options& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (o.modes) cfg.reconstruction.modes = *o.modes;
    if (o.grid) cfg.grids.points = *o.grid;
    if (o.tsteps) cfg.grids.time_steps = *o.tsteps;
    if (o.seed) cfg.reconstruction.seed = *o.seed;
    return cfg;
}

std::string summary_text(const ExperimentResult& r) {
    std::string s = "command: " + r.command + "\n";
    s += "status: " + std::string(r.passed() ? "pass" : "fail") + "\n";
    s += "checks:\n";
    for (const auto& c : r.checks) s += "  - " + std::string(c.passed ? "pass " : "FAIL ") + c.name + ": " + c.detail + "\n";
    if (!r.summary.empty()) {
        s += "notes:\n";
        for (const auto& line : r.summary) s += "  - " + line + "\n";
    }
    return s;
}

void write_result(const fs::path& dir, const ExperimentResult& r, const ExperimentConfig& cfg) {
    write_text(dir / "report.csv", provenance_header(r.command, cfg) + r.table.body());
    write_text(dir / "summary.txt", summary_text(r));
}

int run_single(const std::string& command, const Options& o) {
    const auto cfg = effective_config(o);
    ExperimentResult r;
    if (command == "forward") r = run_forward(cfg);
    else if (command == "probe-check") r = run_probe_check(cfg);
    else if (command == "linearize-check") r = run_linearize_check(cfg);
    else if (command == "identity-check") r = run_identity_check(cfg);
    else r = run_reconstruct(cfg);
    write_result(o.out, r, cfg);
    if (!o.quiet) std::cout << summary_text(r);
    for (const auto& c : r.checks)
        if (!c.passed) {
            std::cerr << "mfgip " << command << ": failed check '" << c.name << "': " << c.detail << "\n";
            return 1;
        }
    return 0;
}

int run_all(const Options& o) {
    const auto cfg = effective_config(o);
    auto criteria = run_criteria(cfg);
    criteria.push_back(check_determinism(cfg, criteria));
    std::string summary = "command: all\n";
    CsvTable table;
    table.columns = {"criterion", "name", "passed", "checks"};
    for (const auto& c : criteria) {
        const fs::path sub = fs::path(o.out) / criterion_slug(c.id);
        write_result(sub, c.result, cfg);
        table.add({std::to_string(c.id), c.name, fmt_bool(c.passed), std::to_string(c.result.checks.size())});
        const auto line = criterion_line(c);
        summary += line + "\n";
        if (!o.quiet) std::cout << line << "\n";
    }
    // Runtimes appear only in summary.txt so report.csv stays reproducible.
    write_text(fs::path(o.out) / "report.csv", provenance_header("all", cfg) + table.body());
    write_text(fs::path(o.out) / "summary.txt", summary);
    int status = 0;
    for (const auto& c : criteria)
        if (!c.passed) {
            std::cerr << "mfgip all: criterion " << c.id << " (" << c.name << ") failed: " << c.detail << "\n";
            status = 1;
        }
    return status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field game forward solver, probe certificates and running-cost reconstruction"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "INI-style experiment config")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--modes", o.modes, "unknown modes per reconstructed order")->check(CLI::Range(1, 4096));
        sub->add_option("--grid", o.grid, "spatial grid points")->check(CLI::Range(5, 1 << 20));
        sub->add_option("--tsteps", o.tsteps, "time steps")->check(CLI::Range(1, 1 << 24));
        sub->add_option("--seed", o.seed, "noise seed (noise experiments only)");
        sub->add_flag("--quiet", o.quiet, "suppress console output");
    };
    const char* commands[][2] = {
        {"forward", "nonlinear solve with mass and positivity traces"},
        {"probe-check", "probe algebra and certificates"},
        {"linearize-check", "epsilon stencils against the direct linear solves"},
        {"identity-check", "difference-pair pairing scenarios"},
        {"reconstruct", "inverse pipeline on the configured synthetic truth"},
        {"all", "acceptance suite"},
    };
    for (const auto& [name, help] : commands) common(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return command == "all" ? run_all(o) : run_single(command, o);
    } catch (const Error& e) {
        std::cerr << "mfgip " << command << ": " << e.what() << "\n";
        return e.kind() == ErrorKind::config ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "mfgip " << command << ": " << e.what() << "\n";
        return 1;
    }
}
