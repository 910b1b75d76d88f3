#include <cmath>
#include <vector>

#include "core/quadrature.hpp"
#include "core/rng.hpp"
#include "core/theory.hpp"
#include "test_support.hpp"

using namespace raptor;

namespace {

FixedPointOptions first_only() {
    FixedPointOptions o;
    o.explore_all = false;
    return o;
}

}  // namespace

TEST(Prox, SolvesDefiningEquation) {
    for (double gamma : {1e-3, 0.5, 1.0, 10.0, 1e3}) {
        for (double u : {-50.0, -3.0, -0.2, 0.0, 0.7, 4.0, 41.23, 200.0}) {
            const double eta = logistic_prox(u, gamma);
            EXPECT_NEAR(eta + gamma * sigmoid(eta), u, 1e-10 * (1.0 + std::abs(u)))
                << "u=" << u << " gamma=" << gamma;
            EXPECT_LE(eta, u);
            EXPECT_GE(eta, u - gamma);
        }
    }
}

TEST(Prox, Examples) {
    // gamma s(eta) + eta = u at u = gamma / 2: eta = 0.
    EXPECT_NEAR(logistic_prox(0.5, 1.0), 0.0, 1e-14);
    EXPECT_NEAR(logistic_prox(5.0, 10.0), 0.0, 1e-13);
    EXPECT_NEAR(logistic_prox(3.0, 1e-9), 3.0, 1e-8);
    EXPECT_RAPTOR_ERROR(logistic_prox(1.0, 0.0), ErrorCode::InvalidArgument);
    EXPECT_RAPTOR_ERROR(logistic_prox(NAN, 1.0), ErrorCode::InvalidArgument);
}

TEST(Prox, MonotoneAndNonExpansive) {
    double prev = logistic_prox(-20.0, 3.0);
    for (double u = -19.5; u <= 20.0; u += 0.5) {
        const double eta = logistic_prox(u, 3.0);
        EXPECT_GT(eta, prev);
        EXPECT_LE(eta - prev, 0.5 + 1e-12);
        prev = eta;
    }
}

TEST(Quadrature, Moments) {
    EXPECT_NEAR(gaussian_expectation([](double) { return 1.0; }), 1.0, 1e-13);
    EXPECT_NEAR(gaussian_expectation([](double z) { return z * z; }), 1.0, 1e-12);
    EXPECT_NEAR(gaussian_expectation([](double z) { return z * z * z * z; }), 3.0, 1e-11);
    EXPECT_NEAR(gaussian_expectation_2d([](double, double) { return 1.0; }), 1.0, 1e-13);
    EXPECT_NEAR(gaussian_expectation_2d([](double a, double) { return a * a; }), 1.0, 1e-12);
    // E[s(Z1) Z2^2] = E[s(Z1)] = 1/2 by symmetry.
    EXPECT_NEAR(gaussian_expectation_2d([](double a, double b) { return sigmoid(a) * b * b; }),
                0.5, 1e-12);
    const auto& rule = gauss_hermite(80);
    double total = 0.0;
    for (double w : rule.weights) total += w;
    EXPECT_NEAR(total, 1.0, 1e-13);
}

TEST(Residuals, QuadratureMatchesMonteCarlo) {
    const RegimeParams params{2.0, 0.1, 1.0};
    const auto q = fixed_point_residuals(params, 0.7, 1.1, 2.0);
    const auto mc = fixed_point_residuals_mc(params, 0.7, 1.1, 2.0, 2000000, 5);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(q[k], mc[k], 5e-3) << "residual " << k;
}

TEST(Regime, Validation) {
    EXPECT_RAPTOR_ERROR((RegimeParams{0.0, 1.0, 1.0}.validate()), ErrorCode::InvalidRegime);
    EXPECT_RAPTOR_ERROR((RegimeParams{1.0, -1.0, 1.0}.validate()), ErrorCode::InvalidRegime);
    EXPECT_RAPTOR_ERROR((RegimeParams{1.0, 1.0, -0.1}.validate()), ErrorCode::InvalidRegime);
    EXPECT_RAPTOR_ERROR(solve_fixed_point({1.0, 0.0, 1.0}), ErrorCode::InvalidRegime);
}

TEST(FixedPoint, ReferenceSolutions) {
    struct Case {
        RegimeParams params;
        double alpha, sigma, gamma;
    };
    const std::vector<Case> cases{
        {{2.0, 0.1, 1.0}, 0.61552, 1.06977, 2.1635},
        {{0.5, 0.03, 1.0}, 0.59331, 2.19518, 44.58},
        {{1.0, 0.03, 1.0}, 0.88991, 2.41832, 15.25},
        {{0.5, 0.1, 1.0}, 0.40409, 1.45448, 14.177},
    };
    for (const auto& c : cases) {
        const FixedPointSolution sol = solve_fixed_point(c.params, first_only());
        EXPECT_LE(sol.residual_max(), 1e-10);
        EXPECT_NEAR(sol.alpha_bar, c.alpha, 1e-4 * c.alpha);
        EXPECT_NEAR(sol.sigma_bar, c.sigma, 1e-4 * c.sigma);
        EXPECT_NEAR(sol.gamma_bar, c.gamma, 1e-3 * c.gamma);
    }
}

TEST(FixedPoint, NoSignalGivesZeroAlignment) {
    const FixedPointSolution sol = solve_fixed_point({2.0, 0.1, 0.0}, first_only());
    EXPECT_NEAR(sol.alpha_bar, 0.0, 1e-8);
    EXPECT_GT(sol.sigma_bar, 0.0);
    EXPECT_EQ(asymptotic_accuracy(sol), 0.5);
}

TEST(FixedPoint, StrongRidgeShrinksNoise) {
    const FixedPointSolution weak = solve_fixed_point({2.0, 1.0, 1.0}, first_only());
    const FixedPointSolution strong = solve_fixed_point({2.0, 1e3, 1.0}, first_only());
    EXPECT_LT(strong.sigma_bar, weak.sigma_bar);
    EXPECT_LT(strong.sigma_bar, 1e-2);
    EXPECT_LE(strong.residual_max(), 1e-10);
}

TEST(FixedPoint, StableUnderNodeDoubling) {
    FixedPointOptions a = first_only(), b = first_only();
    a.quad_nodes = 80;
    b.quad_nodes = 160;
    const FixedPointSolution s1 = solve_fixed_point({4.0, 1.0, 2.0}, a);
    const FixedPointSolution s2 = solve_fixed_point({4.0, 1.0, 2.0}, b);
    EXPECT_NEAR(s1.alpha_bar, s2.alpha_bar, 1e-6);
    EXPECT_NEAR(s1.sigma_bar, s2.sigma_bar, 1e-6);
    EXPECT_NEAR(s1.gamma_bar, s2.gamma_bar, 1e-6 * s1.gamma_bar);
}

TEST(FixedPoint, UserStartIsUsed) {
    FixedPointOptions opts = first_only();
    opts.init = std::array<double, 3>{0.6, 1.0, 2.0};
    const FixedPointSolution sol = solve_fixed_point({2.0, 0.1, 1.0}, opts);
    EXPECT_NEAR(sol.alpha_bar, 0.61552, 1e-4);
    EXPECT_EQ(sol.quad_nodes, 80u);
    EXPECT_EQ(sol.params.delta, 2.0);
}

TEST(Accuracy, Limits) {
    EXPECT_EQ(accuracy_from_margin(0.0, 2.0), 0.5);
    EXPECT_EQ(accuracy_from_margin(3.0, 0.0), 0.5);
    for (double kappa : {0.5, 1.0, 2.0, 5.0})
        EXPECT_NEAR(accuracy_from_margin(1e6, kappa), bayes_ceiling(kappa), 1e-6);
    EXPECT_NEAR(accuracy_from_margin(-1e6, 2.0), 1.0 - bayes_ceiling(2.0), 1e-6);
}

TEST(Accuracy, MonotoneAndBounded) {
    for (double kappa : {0.5, 2.0, 8.0}) {
        double prev = 0.5;
        const double ceiling = bayes_ceiling(kappa);
        for (double m = 0.05; m < 20.0; m *= 1.5) {
            const double acc = accuracy_from_margin(m, kappa);
            EXPECT_GT(acc, prev);
            EXPECT_LE(acc, ceiling + 1e-12);
            prev = acc;
        }
    }
}

TEST(Accuracy, BayesCeiling) {
    EXPECT_EQ(bayes_ceiling(0.0), 0.5);
    EXPECT_NEAR(bayes_ceiling(1.0), 0.674857, 1e-6);
    EXPECT_NEAR(bayes_ceiling(2.0), 0.777990, 1e-6);
    EXPECT_GT(bayes_ceiling(1e3), 0.999);
    EXPECT_LT(bayes_ceiling(1e3), 1.0);
    Rng rng(17);
    double total = 0.0;
    const int draws = 400000;
    for (int i = 0; i < draws; ++i) total += sigmoid(3.0 * std::abs(rng.normal()));
    EXPECT_NEAR(bayes_ceiling(3.0), total / draws, 2e-3);
}

TEST(Accuracy, BayesCeilingMatchesLargeMonteCarlo) {
    Rng rng(19);
    const int draws = 10000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double v = sigmoid(std::abs(rng.normal()));
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
    EXPECT_LE(std::abs(bayes_ceiling(1.0) - mean), 3.0 * se);
}

TEST(Stability, Examples) {
    const auto s = stability_prediction(3.0, 4.0);
    EXPECT_DOUBLE_EQ(s.stability, 9.0 / 25.0);
    EXPECT_DOUBLE_EQ(s.alignment, 0.6);
    EXPECT_DOUBLE_EQ(stability_prediction(1.0, 0.0).stability, 1.0);
    EXPECT_DOUBLE_EQ(stability_prediction(0.0, 2.0).stability, 0.0);
    EXPECT_DOUBLE_EQ(stability_prediction(-3.0, 4.0).alignment, -0.6);
    EXPECT_RAPTOR_ERROR(stability_prediction(0.0, 0.0), ErrorCode::DegenerateZeroEstimator);
}

TEST(Stability, FollowsFixedPoint) {
    const FixedPointSolution sol = solve_fixed_point({2.0, 0.1, 1.0}, first_only());
    const auto s = stability_prediction(sol);
    EXPECT_NEAR(s.alignment * s.alignment, s.stability, 1e-14);
    EXPECT_NEAR(s.stability, sol.alpha_bar * sol.alpha_bar /
                                 (sol.alpha_bar * sol.alpha_bar + sol.sigma_bar * sol.sigma_bar),
                1e-14);
}

TEST(Calibration, ExactLinearFit) {
    const std::vector<double> u{-2, -1, 0, 1, 2};
    std::vector<double> s;
    for (double x : u) s.push_back(2.0 * x + 1.0);
    const CalibrationParams cal = fit_calibration(s, u, 3.0);
    EXPECT_NEAR(cal.slope_a, 2.0, 1e-14);
    EXPECT_NEAR(cal.intercept_b, 1.0, 1e-14);
    EXPECT_EQ(cal.residual_scale, kResidualFloor);
    EXPECT_EQ(cal.delta, 3.0);

    const std::vector<double> noisy{1, -1, 1, -1};
    const std::vector<double> u4{0, 1, 2, 3};
    const CalibrationParams c2 = fit_calibration(noisy, u4, 1.0);
    EXPECT_GT(c2.residual_scale, kResidualFloor);
    EXPECT_RAPTOR_ERROR(fit_calibration({}, {}, 1.0), ErrorCode::EmptyOracleSamples);
    EXPECT_RAPTOR_ERROR(fit_calibration(s, u4, 1.0), ErrorCode::DimensionMismatch);
}

TEST(StructurePredictor, Examples) {
    const std::vector<double> u{2.0, -2.0};
    CalibrationParams sharp{1.0, 0.0, kResidualFloor, 1.0};
    EXPECT_NEAR(structure_predictor(sharp, u), sigmoid(2.0), 1e-12);

    CalibrationParams flat{0.0, 0.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(structure_predictor(flat, u), 0.5);

    const std::vector<double> certain{1.0, 0.0};
    EXPECT_NEAR(structure_predictor(sharp, u, std::span<const double>(certain)), 1.0, 1e-12);

    EXPECT_RAPTOR_ERROR(structure_predictor(sharp, std::vector<double>{}),
                        ErrorCode::EmptyOracleSamples);
    const std::vector<double> short_p{0.5};
    EXPECT_RAPTOR_ERROR(structure_predictor(sharp, u, std::span<const double>(short_p)),
                        ErrorCode::DimensionMismatch);
}
