#include "mfgip/experiments.hpp"

#include <gtest/gtest.h>

using namespace mfgip;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.grids.points = 33;
    cfg.grids.time_steps = 20;
    return cfg;
}

} // namespace

TEST(Experiments, ForwardWithUniformDensityTracesUnitMass) {
    auto cfg = small_config();
    cfg.perturbation = 0.0;
    const auto r = run_forward(cfg);
    EXPECT_TRUE(r.passed());
    ASSERT_EQ(r.table.rows.size(), cfg.grids.time_steps + 1);
    for (const auto& row : r.table.rows) EXPECT_EQ(row[1], fmt(1.0));
}

TEST(Experiments, LogLogSlopeOfAPowerLaw) {
    const std::vector<double> h = {0.1, 0.05, 0.025}, e = {3e-2, 7.5e-3, 1.875e-3};
    EXPECT_NEAR(log_log_slope(h, e), 2.0, 1e-12);
}

TEST(Experiments, ProbeCheckHasOneAlgebraRowPerModeAndCoupling) {
    const auto cfg = small_config();
    const auto r = run_probe_algebra(cfg);
    EXPECT_EQ(r.table.rows.size(), cfg.probes.max_mode * cfg.probes.c_values.size());
    EXPECT_TRUE(r.passed());
}

TEST(Experiments, TablesAreReproducible) {
    const auto cfg = small_config();
    EXPECT_EQ(run_mass(cfg).table.body(), run_mass(cfg).table.body());
    EXPECT_EQ(run_linearize_check(cfg).table.body(), run_linearize_check(cfg).table.body());
}
