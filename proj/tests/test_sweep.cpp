#include <cmath>

#include "core/sweep.hpp"
#include "test_support.hpp"

using namespace raptor;

TEST(OrderParams, Deterministic) {
    const EmpiricalOrderParams a = measure_order_params(60, 120, 2.0, 0.5, 7);
    const EmpiricalOrderParams b = measure_order_params(60, 120, 2.0, 0.5, 7);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(a.test_accuracy, b.test_accuracy);
    EXPECT_GT(a.alpha, 0.0);
    EXPECT_GT(a.sigma, 0.0);
    EXPECT_GT(a.test_accuracy, 0.5);
}

TEST(OrderParams, TrackTheoryAtModerateSize) {
    const RegimeParams params{2.0, 0.1, 1.0};
    FixedPointOptions opts;
    opts.explore_all = false;
    const FixedPointSolution sol = solve_fixed_point(params, opts);
    double alpha = 0.0, sigma = 0.0;
    const int reps = 6;
    for (int r = 0; r < reps; ++r) {
        const auto e = measure_order_params(400, 800, 1.0, 0.1, 100 + r);
        alpha += e.alpha / reps;
        sigma += e.sigma / reps;
    }
    EXPECT_NEAR(alpha, sol.alpha_bar, 0.1 * sol.alpha_bar);
    EXPECT_NEAR(sigma, sol.sigma_bar, 0.1 * sol.sigma_bar);
}

TEST(Sweep, SinglePointHasNoCorrelation) {
    SweepOptions opts;
    opts.p = 40;
    opts.reps = 2;
    const SweepResult r = theory_vs_empirics_sweep({{2.0, 1.0, 1.0}}, opts);
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_TRUE(std::isnan(r.summary.spearman));
    EXPECT_TRUE(std::isnan(r.summary.pearson));
    EXPECT_EQ(r.summary.failed_rows, 0u);
    for (const auto& row : r.rows) {
        EXPECT_TRUE(row.ok());
        EXPECT_EQ(row.acc_pred, r.rows.front().acc_pred);
    }
    EXPECT_NE(r.rows[0].seed, r.rows[1].seed);
}

TEST(Sweep, NoSignalPredictsChance) {
    SweepOptions opts;
    opts.p = 40;
    opts.reps = 1;
    const SweepResult r = theory_vs_empirics_sweep({{1.0, 1.0, 0.0}, {3.0, 0.1, 0.0}}, opts);
    for (const auto& row : r.rows) EXPECT_EQ(row.acc_pred, 0.5);
}

TEST(Sweep, JobsDoNotChangeResults) {
    SweepOptions a, b;
    a.p = b.p = 40;
    a.reps = b.reps = 2;
    b.jobs = 3;
    const std::vector<RegimeParams> grid{{1.0, 1.0, 1.0}, {2.0, 0.5, 2.0}};
    const SweepResult ra = theory_vs_empirics_sweep(grid, a);
    const SweepResult rb = theory_vs_empirics_sweep(grid, b);
    ASSERT_EQ(ra.rows.size(), rb.rows.size());
    for (std::size_t i = 0; i < ra.rows.size(); ++i) {
        EXPECT_EQ(ra.rows[i].acc_emp, rb.rows[i].acc_emp);
        EXPECT_EQ(ra.rows[i].alpha_bar, rb.rows[i].alpha_bar);
    }
}

TEST(Sweep, InvalidGridIsRejectedUpFront) {
    SweepOptions opts;
    opts.p = 20;
    opts.reps = 1;
    EXPECT_RAPTOR_ERROR(theory_vs_empirics_sweep({{2.0, 1.0, 1.0}, {2.0, -1.0, 1.0}}, opts),
                        ErrorCode::InvalidRegime);
}
