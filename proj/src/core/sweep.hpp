#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core/theory.hpp"

namespace raptor {

struct EmpiricalOrderParams {
    double alpha = 0.0;          ///< <w, v> for the fitted coefficient in teacher scale
    double sigma = 0.0;          ///< |w - alpha v|
    double test_accuracy = 0.0;  ///< on a fresh teacher sample
};

/// Draws n teacher-student examples in dimension p, fits the ridge-logistic
/// estimator (no intercept, features scaled by sqrt(p) so that the teacher has
/// norm kappa) at `lambda` and measures it against the teacher.
EmpiricalOrderParams measure_order_params(std::size_t p, std::size_t n, double kappa,
                                          double lambda, std::uint64_t seed,
                                          std::size_t test_multiplier = 10);

struct SweepOptions {
    std::size_t p = 500;
    std::size_t reps = 5;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::size_t quad_nodes = 80;
    std::size_t test_multiplier = 10;
};

/// One (grid point, repetition) pair. Failed rows keep NaN in the fields that
/// could not be computed and carry the error text.
struct SweepRow {
    RegimeParams params;
    std::size_t grid_index = 0;
    std::uint64_t seed = 0;
    double alpha_bar = std::numeric_limits<double>::quiet_NaN();
    double sigma_bar = std::numeric_limits<double>::quiet_NaN();
    double gamma_bar = std::numeric_limits<double>::quiet_NaN();
    double acc_pred = std::numeric_limits<double>::quiet_NaN();
    double acc_emp = std::numeric_limits<double>::quiet_NaN();
    double alpha_emp = std::numeric_limits<double>::quiet_NaN();
    double sigma_emp = std::numeric_limits<double>::quiet_NaN();
    double residual_max = std::numeric_limits<double>::quiet_NaN();
    std::string error;

    bool ok() const { return error.empty(); }
};

struct SweepSummary {
    std::vector<double> mean_acc_pred;  ///< per grid point, over successful rows
    std::vector<double> mean_acc_emp;
    std::size_t failed_rows = 0;
    double spearman = std::numeric_limits<double>::quiet_NaN();  ///< NaN when undefined
    double pearson = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
    std::vector<SweepRow> rows;  ///< grid-major, then repetition
    SweepSummary summary;
};

SweepResult theory_vs_empirics_sweep(const std::vector<RegimeParams>& grid,
                                     const SweepOptions& opts = {});

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
void write_sweep_summary(const std::filesystem::path& path, const SweepResult& result);

}  // namespace raptor
