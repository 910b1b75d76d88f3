#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/data.hpp"

namespace raptor {

struct FitOptions {
    double tol = 1e-8;  ///< converged when |grad|_inf <= tol
    int max_iter = 200;
    bool fit_intercept = true;
};

/// Optional starting point for the Newton iteration (warm start).
struct FitStart {
    Vector w;
    double b = 0.0;
};

struct FitResult {
    Vector w;
    double b = 0.0;
    int iterations = 0;
    double grad_inf_norm = 0.0;
    double objective = 0.0;
    std::vector<double> objective_trace;  ///< objective at every iterate, first to last
};

/// Thrown when the iteration budget runs out; carries the last iterate so the
/// caller can inspect how far it got.
class FitNonConvergence : public Error {
public:
    FitNonConvergence(const std::string& what, FitResult last)
        : Error(ErrorCode::NonConvergence, what), last_(std::move(last)) {}
    const FitResult& last_iterate() const noexcept { return last_; }

private:
    FitResult last_;
};

/// (1/n) sum log(1 + exp(-y_i (w.x_i + b))) + (lambda/2) |w|^2
double ridge_logistic_objective(const Matrix& x, const Vector& y_signed, const Vector& w,
                                double b, double lambda);

/// Gradient of the objective above; entry p is the intercept component.
Vector ridge_logistic_gradient(const Matrix& x, const Vector& y_signed, const Vector& w, double b,
                               double lambda);

/// Damped Newton with backtracking line search on the averaged, ridge
/// penalized logistic loss. The intercept is never penalized. When p > n the
/// Newton system is solved through the n x n dual form.
FitResult fit_ridge_logistic(const Matrix& x, const Vector& y_signed, double lambda,
                             const FitOptions& opts = {},
                             const std::optional<FitStart>& start = std::nullopt);

/// Fraction of rows where sign(w.x + b) matches y (logit 0 counts as +1).
double linear_accuracy(const Matrix& x, const Vector& y_signed, const Vector& w, double b);

// -- lambda selection -------------------------------------------------------

struct TuneOptions {
    FitOptions fit;
    bool warm_start = true;
};

struct TuneResult {
    double lambda_star = 0.0;
    std::size_t best_index = 0;
    std::vector<double> grid;          ///< in traversal order
    std::vector<double> val_accuracy;  ///< aligned with grid
};

/// lambda = 1/C for C spanning [c_lo, c_hi] in `count` points, ordered by
/// increasing C (so decreasing lambda).
std::vector<double> c_grid(double c_lo, double c_hi, std::size_t count, bool log_spaced = true);

/// Default sweep: C = logspace(-4, 2, 100).
std::vector<double> default_lambda_grid();

/// Parses "lo:hi:count:log" or "lo:hi:count:lin" (bounds are C values).
std::vector<double> parse_grid_spec(const std::string& spec);

/// Fits every grid value on the training block and keeps the first one with
/// strictly better validation accuracy.
TuneResult tune_lambda(const Matrix& x_tr, const Vector& y_tr, const Matrix& x_val,
                       const Vector& y_val, const std::vector<double>& grid,
                       const TuneOptions& opts = {});

// -- fitted probe -----------------------------------------------------------

class ProbeModel {
public:
    ProbeModel(Vector w_std, double b_std, Vector omega, double b_orig, double lambda);

    const Vector& w_std() const noexcept { return w_std_; }
    double b_std() const noexcept { return b_std_; }
    const Vector& omega() const noexcept { return omega_; }
    double b_orig() const noexcept { return b_orig_; }
    double lambda() const noexcept { return lambda_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(omega_.size()); }

    bool has_direction() const noexcept { return direction_.has_value(); }
    /// Unit concept vector omega / |omega|; throws ZeroWeightVector when
    /// omega vanishes.
    const Vector& direction() const;

    /// Native-coordinate logit omega.h + b_orig.
    double logit(const Eigen::Ref<const Vector>& h) const;
    double probability(const Eigen::Ref<const Vector>& h) const { return sigmoid(logit(h)); }

private:
    Vector w_std_;
    double b_std_;
    Vector omega_;
    double b_orig_;
    double lambda_;
    std::optional<Vector> direction_;
};

/// Maps standardized-coordinate parameters to native coordinates with the
/// denominator max(s_j, 1).
ProbeModel fold_back(const Vector& w_std, double b_std, const Standardizer& std, double lambda);

/// Refit at lambda_star on the (standardized) train+val block, then fold back.
ProbeModel refit_and_fold(const Matrix& x_full, const Vector& y_full, double lambda_star,
                          const Standardizer& std, const FitOptions& opts = {});

double probe_accuracy(const ProbeModel& model, const Matrix& features_native,
                      std::span<const int> labels);

// -- full pipeline ----------------------------------------------------------

struct RaptorOptions {
    std::vector<double> grid = default_lambda_grid();
    TuneOptions tune;
};

struct RaptorResult {
    ProbeModel model;
    Standardizer standardizer;
    std::optional<TuneResult> tuning;  ///< absent when tuning was not possible
    double val_accuracy;               ///< at lambda_star, NaN without tuning
    double test_accuracy;              ///< NaN when the test split is empty
};

/// Train-only standardization, lambda tuning on val, refit on train+val,
/// fold back. Falls back to lambda = 1 on train alone when val is empty or
/// train lacks a class.
RaptorResult run_raptor(const EmbeddingDataset& data, const SplitIndices& split,
                        const RaptorOptions& opts = {});

// -- separability diagnostic ------------------------------------------------

enum class Separability { Separable, Undetermined };

struct PerceptronResult {
    Separability verdict;
    int epochs;
};

/// Classical perceptron (with bias) in fixed index order; reports separable at
/// the first epoch after which the training error is zero.
PerceptronResult perceptron_separability(const Matrix& x, const Vector& y_signed,
                                         int max_epochs = 2000);

}  // namespace raptor
