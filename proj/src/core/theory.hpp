#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <optional>
#include <span>
#include <vector>

#include "core/common.hpp"

namespace raptor {

/// Proportional-regime parameters: aspect ratio n/p, ridge strength, signal
/// level of the logistic teacher.
struct RegimeParams {
    double delta = 1.0;
    double lambda = 1.0;
    double kappa = 1.0;

    void validate() const;
};

/// Logistic proximal map: the unique eta with eta + gamma * sigmoid(eta) = u.
double logistic_prox(double u, double gamma);

/// Residuals of the three fixed-point equations at (alpha, sigma, gamma),
/// with alpha the teacher-aligned component <z, v> and V = alpha Z1 + sigma Z2:
///   r1 = (2 delta / sigma^2) E[s(-k Z1) (V - eta)^2] - 1
///   r2 = alpha / delta + 2 kappa E[s(-k Z1)(1 - s(-k Z1)) eta]
///   r3 = E[2 s(-k Z1) / (1 + gamma s(eta)(1 - s(eta)))] - (1 - 1/delta + gamma lambda)
/// where eta = prox_gamma(V) and s is the sigmoid.
std::array<double, 3> fixed_point_residuals(const RegimeParams& params, double alpha,
                                            double sigma, double gamma,
                                            std::size_t quad_nodes = 80);

/// Monte-Carlo version of the same residuals, for cross-checking the
/// quadrature.
std::array<double, 3> fixed_point_residuals_mc(const RegimeParams& params, double alpha,
                                               double sigma, double gamma, std::size_t samples,
                                               std::uint64_t seed);

struct FixedPointSolution {
    double alpha_bar = 0.0;
    double sigma_bar = 0.0;
    double gamma_bar = 0.0;
    std::array<double, 3> residuals{};
    RegimeParams params;
    std::size_t quad_nodes = 80;
    /// Other converged solutions met from different starting points.
    std::vector<std::array<double, 3>> alternatives;

    double residual_max() const;
    /// Effective margin m = alpha / sigma entering the accuracy formula.
    double margin() const { return alpha_bar / sigma_bar; }
};

struct FixedPointOptions {
    double tol = 1e-10;
    std::size_t quad_nodes = 80;
    int max_iter = 80;
    /// Keep running the remaining starting points after the first solution to
    /// collect distinct solutions.
    bool explore_all = true;
    std::optional<std::array<double, 3>> init;  ///< (alpha, sigma, gamma)
};

/// Raised when no starting point converges. The trace holds the final
/// (alpha, sigma, gamma, max residual) reached from each start.
class FixedPointNonConvergence : public Error {
public:
    FixedPointNonConvergence(std::string msg, std::vector<std::array<double, 4>> trace)
        : Error(ErrorCode::NonConvergence, std::move(msg)), trace_(std::move(trace)) {}
    const std::vector<std::array<double, 4>>& trace() const noexcept { return trace_; }

private:
    std::vector<std::array<double, 4>> trace_;
};

/// Damped Newton on (alpha, log sigma, log gamma) with a finite-difference
/// Jacobian, tried from the user start (if any) and then a fixed list of
/// presets. Throws InvalidRegime when no start converges to a solution with
/// alpha >= 0.
FixedPointSolution solve_fixed_point(const RegimeParams& params,
                                     const FixedPointOptions& opts = {});

/// Limiting accuracy E_Z[s(kZ) Phi(mZ) + s(-kZ)(1 - Phi(mZ))].
double accuracy_from_margin(double margin, double kappa);
double asymptotic_accuracy(const FixedPointSolution& sol);

/// E_Z[s(kappa |Z|)], the Bayes-optimal accuracy under the logistic teacher.
double bayes_ceiling(double kappa);

struct StabilityPrediction {
    double stability;  ///< alpha^2 / (alpha^2 + sigma^2)
    double alignment;  ///< alpha / sqrt(alpha^2 + sigma^2)
};

StabilityPrediction stability_prediction(double alpha, double sigma);
StabilityPrediction stability_prediction(const FixedPointSolution& sol);

/// Linear calibration S ~ a U + b of probe scores against an out-of-fold
/// oracle score, with the residual scale floored at kResidualFloor.
struct CalibrationParams {
    double slope_a = 0.0;
    double intercept_b = 0.0;
    double residual_scale = 1.0;
    double delta = 1.0;
};

inline constexpr double kResidualFloor = 1e-3;

/// Least-squares fit of S on U; residual scale is the RMS residual.
CalibrationParams fit_calibration(std::span<const double> probe_scores,
                                  std::span<const double> oracle_scores, double delta);

/// Sample average over oracle scores U of
/// p(U) Phi((aU + b)/sigma) + (1 - p(U)) (1 - Phi((aU + b)/sigma)),
/// with p(U) = sigmoid(U) unless calibrated probabilities are supplied.
double structure_predictor(const CalibrationParams& cal, std::span<const double> oracle_scores,
                           std::optional<std::span<const double>> p_plus = std::nullopt);

double normal_cdf(double x);

}  // namespace raptor
