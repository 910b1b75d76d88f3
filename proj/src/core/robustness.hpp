#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "core/probe.hpp"

namespace raptor {

struct AblationConfig {
    std::size_t k_runs = 20;
    double drop_frac = 0.2;
    double val_frac = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PipelineOutput {
    Vector direction;  ///< unit concept vector
    double lambda = 0.0;
};

/// Trains a probe on `data` using the train/val split given and returns its
/// unit direction.
using ProbePipeline = std::function<PipelineOutput(const EmbeddingDataset&, const SplitIndices&)>;

/// Full RAPTOR: lambda re-selected on val in every call.
ProbePipeline raptor_pipeline(RaptorOptions opts = {});

/// Fixed ridge strength, fitted on train+val (standardized on train).
ProbePipeline fixed_lambda_pipeline(double lambda, FitOptions fit = {});

struct AblationRuns {
    std::vector<Vector> directions;
    std::vector<double> lambdas;
};

/// K ablation runs: drop round_half_up(drop_frac * |pool|) pool examples at
/// random, stratified train/val re-split of the rest, retrain. Randomness is
/// keyed on (seed, run, attempt), so results do not depend on `jobs`.
AblationRuns ablation_directions(const EmbeddingDataset& data, const IndexSet& pool_idx,
                                 const AblationConfig& cfg, const ProbePipeline& pipeline,
                                 std::size_t jobs = 1);

/// Mean absolute pairwise cosine over K >= 2 unit vectors.
double mean_abs_pairwise_cosine(const std::vector<Vector>& directions);

struct RobustnessReport {
    std::map<std::uint32_t, double> per_layer;
    double mean_over_layers = 0.0;
    std::pair<std::uint32_t, double> best_layer{0, 0.0};  ///< lowest layer id wins ties
};

RobustnessReport make_robustness_report(const std::map<std::uint32_t, double>& per_layer);

}  // namespace raptor
