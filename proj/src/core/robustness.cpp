#include "core/robustness.hpp"

#include <algorithm>
#include <cmath>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace raptor {

void AblationConfig::validate() const {
    require(k_runs >= 2, ErrorCode::InvalidArgument, "k_runs must be >= 2");
    // drop_frac = 0 is accepted: it is the no-ablation limit used in tests.
    require(drop_frac >= 0.0 && drop_frac < 1.0, ErrorCode::InvalidArgument,
            "drop_frac must lie in [0,1)");
    require(val_frac > 0.0 && val_frac < 1.0, ErrorCode::InvalidArgument,
            "val_frac must lie in (0,1)");
}

ProbePipeline raptor_pipeline(RaptorOptions opts) {
    return [opts = std::move(opts)](const EmbeddingDataset& data, const SplitIndices& split) {
        const RaptorResult r = run_raptor(data, split, opts);
        return PipelineOutput{r.model.direction(), r.model.lambda()};
    };
}

ProbePipeline fixed_lambda_pipeline(double lambda, FitOptions fit) {
    require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
    return [lambda, fit](const EmbeddingDataset& data, const SplitIndices& split) {
        const Standardizer st = fit_standardizer(data.features(), split.train);
        IndexSet full = split.train;
        full.insert(full.end(), split.val.begin(), split.val.end());
        std::sort(full.begin(), full.end());
        const Matrix x = apply_standardizer(st, select_rows(data.features(), full));
        const Vector y = to_signed(select(data.labels(), full));
        const ProbeModel model = refit_and_fold(x, y, lambda, st, fit);
        return PipelineOutput{model.direction(), lambda};
    };
}

AblationRuns ablation_directions(const EmbeddingDataset& data, const IndexSet& pool_idx,
                                 const AblationConfig& cfg, const ProbePipeline& pipeline,
                                 std::size_t jobs) {
    cfg.validate();
    const auto n_drop =
        static_cast<std::size_t>(round_half_up(cfg.drop_frac * static_cast<double>(pool_idx.size())));
    require(n_drop < pool_idx.size(), ErrorCode::InvalidArgument, "ablation would drop the whole pool");
    constexpr int kMaxAttempts = 10;

    AblationRuns runs;
    runs.directions.resize(cfg.k_runs);
    runs.lambdas.resize(cfg.k_runs);
    parallel_for(cfg.k_runs, jobs, [&](std::size_t r) {
        const std::uint64_t run_seed = derive_seed(cfg.seed, r);
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            const std::uint64_t attempt_seed = derive_seed(run_seed, static_cast<std::uint64_t>(attempt));
            Rng rng(attempt_seed);
            IndexSet kept = pool_idx;
            rng.shuffle(std::span<std::size_t>(kept));
            kept.erase(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(n_drop));
            std::sort(kept.begin(), kept.end());

            const EmbeddingDataset sub = data.subset(kept);
            const auto ones = static_cast<std::size_t>(
                std::count(sub.labels().begin(), sub.labels().end(), 1));
            if (ones < 3 || sub.rows() - ones < 3) continue;

            const SplitIndices split =
                stratified_train_val_split(sub.labels(), cfg.val_frac, derive_seed(attempt_seed, 1));
            PipelineOutput out = pipeline(sub, split);
            runs.directions[r] = std::move(out.direction);
            runs.lambdas[r] = out.lambda;
            return;
        }
        throw Error(ErrorCode::DegenerateAblation,
                    "ablation run " + std::to_string(r) + " lost a class in " +
                        std::to_string(kMaxAttempts) + " attempts");
    });
    return runs;
}

double mean_abs_pairwise_cosine(const std::vector<Vector>& directions) {
    require(directions.size() >= 2, ErrorCode::InvalidArgument, "need at least two directions");
    for (const auto& v : directions) {
        require(v.size() == directions.front().size(), ErrorCode::DimensionMismatch,
                "directions differ in dimension");
        require(std::abs(v.norm() - 1.0) <= 1e-9, ErrorCode::NotUnitNorm,
                "direction is not unit norm");
    }
    const std::size_t k = directions.size();
    // Summing the sorted terms makes the score independent of input order.
    std::vector<double> terms;
    terms.reserve(k * (k - 1) / 2);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t s = r + 1; s < k; ++s)
            terms.push_back(std::abs(directions[r].dot(directions[s])));
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    const double score = 2.0 * sum / static_cast<double>(k * (k - 1));
    return std::clamp(score, 0.0, 1.0);
}

RobustnessReport make_robustness_report(const std::map<std::uint32_t, double>& per_layer) {
    require(!per_layer.empty(), ErrorCode::InvalidArgument, "no layers in robustness report");
    RobustnessReport rep;
    rep.per_layer = per_layer;
    double total = 0.0;
    bool first = true;
    for (const auto& [layer, score] : per_layer) {
        total += score;
        if (first || score > rep.best_layer.second) rep.best_layer = {layer, score};
        first = false;
    }
    rep.mean_over_layers = total / static_cast<double>(per_layer.size());
    return rep;
}

}  // namespace raptor
