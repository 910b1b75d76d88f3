#include "raptor/raptor.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/data.hpp"
#include "core/io.hpp"
#include "core/probe.hpp"
#include "core/rng.hpp"
#include "core/robustness.hpp"
#include "core/steering.hpp"
#include "core/sweep.hpp"
#include "core/theory.hpp"

struct raptor_dataset {
    raptor::EmbeddingDataset data;
    std::optional<raptor::Vector> teacher;
    raptor::io::EmbeddingManifest manifest;
};

struct raptor_probe {
    raptor::ProbeModel model;
    std::optional<std::uint32_t> layer_id;
    double val_accuracy = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> test_accuracy;
};

struct raptor_robustness {
    raptor::RobustnessReport report;
    std::vector<raptor::io::RobustnessRow> rows;
    raptor::AblationConfig cfg;
};

struct raptor_steering {
    std::vector<raptor::SteeringOutcome> outcomes;
    raptor::SteeringConfig cfg;
};

struct raptor_fixed_point {
    raptor::FixedPointSolution sol;
};

struct raptor_sweep {
    raptor::SweepResult result;
};

namespace {

thread_local std::string g_last_error;

raptor_status to_status(raptor::ErrorCode code) {
    using raptor::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument: return RAPTOR_E_INVALID_ARGUMENT;
        case ErrorCode::DimensionMismatch: return RAPTOR_E_DIMENSION_MISMATCH;
        case ErrorCode::InsufficientClassCount: return RAPTOR_E_INSUFFICIENT_CLASS_COUNT;
        case ErrorCode::SingleClass: return RAPTOR_E_SINGLE_CLASS;
        case ErrorCode::NonConvergence: return RAPTOR_E_NON_CONVERGENCE;
        case ErrorCode::ZeroWeightVector: return RAPTOR_E_ZERO_WEIGHT_VECTOR;
        case ErrorCode::EmptyGrid: return RAPTOR_E_EMPTY_GRID;
        case ErrorCode::MisalignedDirection: return RAPTOR_E_MISALIGNED_DIRECTION;
        case ErrorCode::MissingLayer: return RAPTOR_E_MISSING_LAYER;
        case ErrorCode::EmptyEvaluationSet: return RAPTOR_E_EMPTY_EVALUATION_SET;
        case ErrorCode::NotUnitNorm: return RAPTOR_E_NOT_UNIT_NORM;
        case ErrorCode::DegenerateAblation: return RAPTOR_E_DEGENERATE_ABLATION;
        case ErrorCode::InvalidRegime: return RAPTOR_E_INVALID_REGIME;
        case ErrorCode::DegenerateZeroEstimator: return RAPTOR_E_DEGENERATE_ZERO_ESTIMATOR;
        case ErrorCode::EmptyOracleSamples: return RAPTOR_E_EMPTY_ORACLE_SAMPLES;
        case ErrorCode::Io: return RAPTOR_E_IO;
        case ErrorCode::Format: return RAPTOR_E_FORMAT;
    }
    return RAPTOR_E_INTERNAL;
}

template <typename F>
raptor_status guard(F&& body) {
    try {
        body();
        g_last_error.clear();
        return RAPTOR_OK;
    } catch (const raptor::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return RAPTOR_E_OUT_OF_MEMORY;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RAPTOR_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return RAPTOR_E_INTERNAL;
    }
}

void need(const void* ptr, const char* what) {
    if (!ptr) throw raptor::Error(raptor::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

void copy_out(const raptor::Vector& v, double* out) {
    std::memcpy(out, v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

}  // namespace

extern "C" {

const char* raptor_last_error(void) { return g_last_error.c_str(); }

const char* raptor_status_string(raptor_status status) {
    switch (status) {
        case RAPTOR_OK: return "ok";
        case RAPTOR_E_INVALID_ARGUMENT: return "invalid argument";
        case RAPTOR_E_DIMENSION_MISMATCH: return "dimension mismatch";
        case RAPTOR_E_INSUFFICIENT_CLASS_COUNT: return "insufficient class count";
        case RAPTOR_E_SINGLE_CLASS: return "single class";
        case RAPTOR_E_NON_CONVERGENCE: return "non-convergence";
        case RAPTOR_E_ZERO_WEIGHT_VECTOR: return "zero weight vector";
        case RAPTOR_E_EMPTY_GRID: return "empty grid";
        case RAPTOR_E_MISALIGNED_DIRECTION: return "misaligned direction";
        case RAPTOR_E_MISSING_LAYER: return "missing layer";
        case RAPTOR_E_EMPTY_EVALUATION_SET: return "empty evaluation set";
        case RAPTOR_E_NOT_UNIT_NORM: return "not unit norm";
        case RAPTOR_E_DEGENERATE_ABLATION: return "degenerate ablation";
        case RAPTOR_E_INVALID_REGIME: return "invalid regime";
        case RAPTOR_E_DEGENERATE_ZERO_ESTIMATOR: return "degenerate zero estimator";
        case RAPTOR_E_EMPTY_ORACLE_SAMPLES: return "empty oracle samples";
        case RAPTOR_E_IO: return "i/o error";
        case RAPTOR_E_FORMAT: return "format error";
        case RAPTOR_E_OUT_OF_MEMORY: return "out of memory";
        case RAPTOR_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* raptor_version(void) { return "0.1.0"; }

/* ---- datasets ---------------------------------------------------------- */

raptor_status raptor_dataset_create(const double* features, size_t n, size_t p, const int* labels,
                                    int has_layer, uint32_t layer_id, raptor_dataset** out) {
    return guard([&] {
        need(features, "features");
        need(labels, "labels");
        need(out, "out");
        raptor::Matrix x = Eigen::Map<const raptor::Matrix>(features, static_cast<Eigen::Index>(n),
                                                            static_cast<Eigen::Index>(p));
        std::optional<std::uint32_t> layer;
        if (has_layer) layer = layer_id;
        raptor::EmbeddingDataset data(std::move(x), std::vector<int>(labels, labels + n), layer);
        *out = new raptor_dataset{std::move(data), std::nullopt, {}};
        (*out)->manifest.generator = "external";
    });
}

raptor_status raptor_dataset_generate(size_t p, size_t n, double kappa, uint64_t seed,
                                      raptor_dataset** out) {
    return guard([&] {
        need(out, "out");
        raptor::TeacherSample sample = raptor::generate_teacher_student({p, n, kappa, seed});
        raptor::io::EmbeddingManifest manifest;
        manifest.generator = raptor::Rng::kName;
        manifest.seed = seed;
        manifest.kappa = kappa;
        *out = new raptor_dataset{std::move(sample.data), std::move(sample.direction),
                                  std::move(manifest)};
    });
}

raptor_status raptor_dataset_load(const char* path, raptor_dataset** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        raptor::io::EmbeddingManifest manifest;
        raptor::EmbeddingDataset data = raptor::io::read_embeddings(path, &manifest);
        std::optional<raptor::Vector> teacher;
        const auto tpath = raptor::io::teacher_path(path);
        if (std::filesystem::exists(tpath)) teacher = raptor::io::read_vector(tpath);
        *out = new raptor_dataset{std::move(data), std::move(teacher), std::move(manifest)};
    });
}

raptor_status raptor_dataset_save(const raptor_dataset* data, const char* path) {
    return guard([&] {
        need(data, "dataset");
        need(path, "path");
        raptor::io::write_embeddings(path, data->data, data->manifest);
        if (data->teacher) raptor::io::write_vector(raptor::io::teacher_path(path), *data->teacher);
    });
}

size_t raptor_dataset_rows(const raptor_dataset* data) { return data ? data->data.rows() : 0; }
size_t raptor_dataset_cols(const raptor_dataset* data) { return data ? data->data.cols() : 0; }

int raptor_dataset_layer(const raptor_dataset* data, uint32_t* layer_id) {
    if (!data || !data->data.layer_id()) return 0;
    if (layer_id) *layer_id = *data->data.layer_id();
    return 1;
}

raptor_status raptor_dataset_set_layer(raptor_dataset* data, uint32_t layer_id) {
    return guard([&] {
        need(data, "dataset");
        data->data = raptor::EmbeddingDataset(data->data.features(), data->data.labels(), layer_id);
        data->manifest.layer_id = layer_id;
    });
}

raptor_status raptor_dataset_features(const raptor_dataset* data, double* out) {
    return guard([&] {
        need(data, "dataset");
        need(out, "out");
        const raptor::Matrix& x = data->data.features();
        std::memcpy(out, x.data(), static_cast<std::size_t>(x.size()) * sizeof(double));
    });
}

raptor_status raptor_dataset_labels(const raptor_dataset* data, int* out) {
    return guard([&] {
        need(data, "dataset");
        need(out, "out");
        const auto& y = data->data.labels();
        std::copy(y.begin(), y.end(), out);
    });
}

raptor_status raptor_dataset_teacher(const raptor_dataset* data, double* out) {
    return guard([&] {
        need(data, "dataset");
        need(out, "out");
        if (!data->teacher)
            throw raptor::Error(raptor::ErrorCode::InvalidArgument, "dataset has no teacher direction");
        copy_out(*data->teacher, out);
    });
}

void raptor_dataset_free(raptor_dataset* data) { delete data; }

raptor_status raptor_dataset_separability(const raptor_dataset* data, int max_epochs,
                                          int* separable, int* epochs) {
    return guard([&] {
        need(data, "dataset");
        need(separable, "separable");
        require(max_epochs > 0, raptor::ErrorCode::InvalidArgument, "max_epochs must be positive");
        const auto r = raptor::perceptron_separability(data->data.features(),
                                                       data->data.signed_labels(), max_epochs);
        *separable = r.verdict == raptor::Separability::Separable ? 1 : 0;
        if (epochs) *epochs = r.epochs;
    });
}

raptor_status raptor_matrix_load(const char* path, double** data, size_t* n, size_t* p,
                                 int* has_layer, uint32_t* layer_id) {
    return guard([&] {
        need(path, "path");
        need(data, "data");
        need(n, "n");
        need(p, "p");
        const raptor::Matrix m = raptor::io::read_matrix(path);
        int found = 0;
        const auto mpath = raptor::io::manifest_path(path);
        if (std::filesystem::exists(mpath)) {
            const auto kv = raptor::io::read_key_values(mpath);
            if (auto it = kv.find("layer_id"); it != kv.end()) {
                const double v = raptor::io::parse_double(it->second);
                require(v >= 0 && v == std::floor(v) && v <= 4294967295.0,
                        raptor::ErrorCode::Format, "bad layer_id in " + mpath.string());
                if (layer_id) *layer_id = static_cast<uint32_t>(v);
                found = 1;
            }
        }
        auto buf = std::make_unique<double[]>(static_cast<std::size_t>(m.size()));
        std::memcpy(buf.get(), m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
        *n = static_cast<size_t>(m.rows());
        *p = static_cast<size_t>(m.cols());
        if (has_layer) *has_layer = found;
        *data = buf.release();
    });
}

raptor_status raptor_matrix_save(const char* path, const double* data, size_t n, size_t p,
                                 int has_layer, uint32_t layer_id) {
    return guard([&] {
        need(path, "path");
        need(data, "data");
        raptor::io::write_matrix(path, Eigen::Map<const raptor::Matrix>(
                                           data, static_cast<Eigen::Index>(n),
                                           static_cast<Eigen::Index>(p)));
        if (has_layer)
            raptor::io::write_key_values(raptor::io::manifest_path(path),
                                         {{"layer_id", std::to_string(layer_id)}});
    });
}

void raptor_buffer_free(double* data) { delete[] data; }

/* ---- probes ------------------------------------------------------------ */

void raptor_probe_options_default(raptor_probe_options* opts) {
    if (!opts) return;
    opts->test_frac = 0.2;
    opts->val_frac = 0.2;
    opts->seed = 0;
    opts->grid_spec = nullptr;
    opts->warm_start = 1;
    opts->tol = 1e-8;
    opts->max_iter = 200;
}

raptor_status raptor_probe_train(const raptor_dataset* data, const raptor_probe_options* opts,
                                 raptor_probe** out) {
    return guard([&] {
        need(data, "dataset");
        need(out, "out");
        raptor_probe_options o;
        raptor_probe_options_default(&o);
        if (opts) o = *opts;
        raptor::RaptorOptions ro;
        if (o.grid_spec) ro.grid = raptor::parse_grid_spec(o.grid_spec);
        ro.tune.warm_start = o.warm_start != 0;
        ro.tune.fit.tol = o.tol;
        ro.tune.fit.max_iter = o.max_iter;
        const raptor::SplitIndices split =
            raptor::stratified_split(data->data.labels(), o.test_frac, o.val_frac, o.seed);
        raptor::RaptorResult r = raptor::run_raptor(data->data, split, ro);
        auto* probe = new raptor_probe{std::move(r.model), data->data.layer_id(), r.val_accuracy,
                                       std::nullopt};
        if (!std::isnan(r.test_accuracy)) probe->test_accuracy = r.test_accuracy;
        *out = probe;
    });
}

raptor_status raptor_probe_load(const char* path, raptor_probe** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        raptor::io::ProbeRecord rec = raptor::io::read_probe(path);
        *out = new raptor_probe{std::move(rec.model), rec.layer_id,
                                std::numeric_limits<double>::quiet_NaN(), rec.test_accuracy};
    });
}

raptor_status raptor_probe_save(const raptor_probe* probe, const char* path) {
    return guard([&] {
        need(probe, "probe");
        need(path, "path");
        raptor::io::write_probe(path, {probe->model, probe->layer_id, probe->test_accuracy});
    });
}

size_t raptor_probe_dim(const raptor_probe* probe) { return probe ? probe->model.dim() : 0; }

double raptor_probe_lambda(const raptor_probe* probe) {
    return probe ? probe->model.lambda() : std::numeric_limits<double>::quiet_NaN();
}

double raptor_probe_val_accuracy(const raptor_probe* probe) {
    return probe ? probe->val_accuracy : std::numeric_limits<double>::quiet_NaN();
}

double raptor_probe_test_accuracy(const raptor_probe* probe) {
    return probe && probe->test_accuracy ? *probe->test_accuracy
                                         : std::numeric_limits<double>::quiet_NaN();
}

double raptor_probe_intercept(const raptor_probe* probe) {
    return probe ? probe->model.b_orig() : std::numeric_limits<double>::quiet_NaN();
}

raptor_status raptor_probe_omega(const raptor_probe* probe, double* out) {
    return guard([&] {
        need(probe, "probe");
        need(out, "out");
        copy_out(probe->model.omega(), out);
    });
}

raptor_status raptor_probe_direction(const raptor_probe* probe, double* out) {
    return guard([&] {
        need(probe, "probe");
        need(out, "out");
        copy_out(probe->model.direction(), out);
    });
}

raptor_status raptor_probe_logit(const raptor_probe* probe, const double* h, double* out) {
    return guard([&] {
        need(probe, "probe");
        need(h, "h");
        need(out, "out");
        const Eigen::Map<const raptor::Vector> v(h, static_cast<Eigen::Index>(probe->model.dim()));
        *out = probe->model.logit(v);
    });
}

int raptor_probe_layer(const raptor_probe* probe, uint32_t* layer_id) {
    if (!probe || !probe->layer_id) return 0;
    if (layer_id) *layer_id = *probe->layer_id;
    return 1;
}

raptor_status raptor_probe_set_layer(raptor_probe* probe, uint32_t layer_id) {
    return guard([&] {
        need(probe, "probe");
        probe->layer_id = layer_id;
    });
}

void raptor_probe_free(raptor_probe* probe) { delete probe; }

/* ---- robustness -------------------------------------------------------- */

void raptor_robust_options_default(raptor_robust_options* opts) {
    if (!opts) return;
    opts->k_runs = 20;
    opts->drop_frac = 0.2;
    opts->val_frac = 0.2;
    opts->seed = 0;
    opts->jobs = 1;
    opts->grid_spec = nullptr;
    opts->fixed_lambda = 0;
    opts->lambda = 1.0;
}

raptor_status raptor_robustness_run(const raptor_dataset* const* layers, size_t n_layers,
                                    const raptor_robust_options* opts, raptor_robustness** out) {
    return guard([&] {
        need(layers, "layers");
        need(out, "out");
        require(n_layers > 0, raptor::ErrorCode::InvalidArgument, "no layers given");
        raptor_robust_options o;
        raptor_robust_options_default(&o);
        if (opts) o = *opts;
        raptor::AblationConfig cfg{o.k_runs, o.drop_frac, o.val_frac, o.seed};
        cfg.validate();

        raptor::ProbePipeline pipeline;
        if (o.fixed_lambda) {
            pipeline = raptor::fixed_lambda_pipeline(o.lambda);
        } else {
            raptor::RaptorOptions ro;
            if (o.grid_spec) ro.grid = raptor::parse_grid_spec(o.grid_spec);
            pipeline = raptor::raptor_pipeline(ro);
        }

        auto rep = std::make_unique<raptor_robustness>();
        rep->cfg = cfg;
        std::map<std::uint32_t, double> scores;
        std::map<std::uint32_t, std::vector<double>> lambdas;
        for (size_t i = 0; i < n_layers; ++i) {
            need(layers[i], "layer dataset");
            const raptor::EmbeddingDataset& data = layers[i]->data;
            const std::uint32_t id = data.layer_id().value_or(static_cast<std::uint32_t>(i));
            require(!scores.count(id), raptor::ErrorCode::InvalidArgument,
                    "duplicate layer id " + std::to_string(id));
            raptor::IndexSet pool(data.rows());
            for (std::size_t k = 0; k < pool.size(); ++k) pool[k] = k;
            const raptor::AblationRuns runs =
                raptor::ablation_directions(data, pool, cfg, pipeline, o.jobs);
            scores[id] = raptor::mean_abs_pairwise_cosine(runs.directions);
            lambdas[id] = runs.lambdas;
        }
        rep->report = raptor::make_robustness_report(scores);
        for (const auto& [id, score] : scores) rep->rows.push_back({id, score, lambdas[id]});
        *out = rep.release();
    });
}

size_t raptor_robustness_layers(const raptor_robustness* rep) { return rep ? rep->rows.size() : 0; }

raptor_status raptor_robustness_layer(const raptor_robustness* rep, size_t index,
                                      uint32_t* layer_id, double* score) {
    return guard([&] {
        need(rep, "report");
        require(index < rep->rows.size(), raptor::ErrorCode::InvalidArgument,
                "layer index out of range");
        if (layer_id) *layer_id = rep->rows[index].layer_id;
        if (score) *score = rep->rows[index].robustness;
    });
}

double raptor_robustness_mean(const raptor_robustness* rep) {
    return rep ? rep->report.mean_over_layers : std::numeric_limits<double>::quiet_NaN();
}

void raptor_robustness_best(const raptor_robustness* rep, uint32_t* layer_id, double* score) {
    if (!rep) return;
    if (layer_id) *layer_id = rep->report.best_layer.first;
    if (score) *score = rep->report.best_layer.second;
}

raptor_status raptor_robustness_write_csv(const raptor_robustness* rep, const char* path) {
    return guard([&] {
        need(rep, "report");
        need(path, "path");
        raptor::io::write_robustness_csv(path, rep->rows, rep->cfg);
    });
}

void raptor_robustness_free(raptor_robustness* rep) { delete rep; }

/* ---- steering ---------------------------------------------------------- */

void raptor_steer_options_default(raptor_steer_options* opts) {
    if (!opts) return;
    opts->target_prob = 0.9999;
    opts->mode = RAPTOR_STEER_TOWARDS;
    opts->has_tau = 0;
    opts->tau = 0.0;
}

namespace {

raptor::SteeringConfig make_config(const raptor_steer_options* opts) {
    raptor_steer_options o;
    raptor_steer_options_default(&o);
    if (opts) o = *opts;
    raptor::SteeringConfig cfg;
    cfg.target_prob = o.target_prob;
    require(o.mode == RAPTOR_STEER_TOWARDS || o.mode == RAPTOR_STEER_AWAY,
            raptor::ErrorCode::InvalidArgument, "unknown steering mode");
    cfg.mode = o.mode == RAPTOR_STEER_TOWARDS ? raptor::SteerMode::Towards : raptor::SteerMode::Away;
    if (o.has_tau) cfg.reliability_threshold = o.tau;
    cfg.validate();
    return cfg;
}

}  // namespace

raptor_status raptor_gcav_alpha(const raptor_probe* probe, const double* h,
                                const raptor_steer_options* opts, double* alpha) {
    return guard([&] {
        need(probe, "probe");
        need(h, "h");
        need(alpha, "alpha");
        const raptor::SteeringConfig cfg = make_config(opts);
        const Eigen::Map<const raptor::Vector> v(h, static_cast<Eigen::Index>(probe->model.dim()));
        *alpha = raptor::gcav_alpha(probe->model, v, cfg);
    });
}

raptor_status raptor_steer_run(const raptor_probe* const* probes, const uint32_t* layer_ids,
                               const double* const* hidden, size_t n_layers, size_t n_prompts,
                               const raptor_steer_options* opts, raptor_steering** out) {
    return guard([&] {
        need(probes, "probes");
        need(layer_ids, "layer_ids");
        need(hidden, "hidden");
        need(out, "out");
        raptor::SteeringConfig cfg = make_config(opts);
        std::map<std::uint32_t, raptor::LayerProbe> layer_probes;
        std::map<std::uint32_t, raptor::Matrix> states;
        for (size_t i = 0; i < n_layers; ++i) {
            need(probes[i], "probe");
            need(hidden[i], "hidden states");
            const raptor_probe& p = *probes[i];
            const std::uint32_t id = layer_ids[i];
            require(!layer_probes.count(id), raptor::ErrorCode::InvalidArgument,
                    "duplicate layer id " + std::to_string(id));
            if (cfg.reliability_threshold && !p.test_accuracy)
                throw raptor::Error(raptor::ErrorCode::InvalidArgument,
                                    "tau filtering needs a recorded test accuracy for layer " +
                                        std::to_string(id));
            layer_probes.emplace(id, raptor::LayerProbe{p.model, p.test_accuracy.value_or(1.0)});
            states.emplace(id, Eigen::Map<const raptor::Matrix>(
                                   hidden[i], static_cast<Eigen::Index>(n_prompts),
                                   static_cast<Eigen::Index>(p.model.dim())));
            cfg.layers.push_back(id);
        }
        auto run = std::make_unique<raptor_steering>();
        run->outcomes = raptor::steer_batch(layer_probes, states, cfg);
        run->cfg = cfg;
        *out = run.release();
    });
}

size_t raptor_steering_count(const raptor_steering* run) { return run ? run->outcomes.size() : 0; }

raptor_status raptor_steering_outcome(const raptor_steering* run, size_t index,
                                      raptor_steer_outcome* out) {
    return guard([&] {
        need(run, "steering run");
        need(out, "out");
        require(index < run->outcomes.size(), raptor::ErrorCode::InvalidArgument,
                "outcome index out of range");
        const raptor::SteeringOutcome& o = run->outcomes[index];
        out->layer_id = o.layer_id;
        out->prompt = o.prompt;
        out->alpha = o.alpha;
        out->intervened = o.intervened ? 1 : 0;
        out->pre_prob = o.pre_prob;
        out->post_prob = o.post_prob;
        out->skipped_reason = !o.skipped_reason ? RAPTOR_SKIP_NONE
                              : *o.skipped_reason == raptor::SkipReason::LowAccuracy
                                  ? RAPTOR_SKIP_LOW_ACCURACY
                                  : RAPTOR_SKIP_MISALIGNED_DIRECTION;
    });
}

raptor_status raptor_steering_summary(const raptor_steering* run, raptor_steer_summary* out) {
    return guard([&] {
        need(run, "steering run");
        need(out, "out");
        const raptor::SteeringReport r = raptor::summarize_steering(run->outcomes, run->cfg);
        *out = {r.evaluated,    r.skipped,   r.success_rate, r.intervention_rate,
                r.alpha_median, r.alpha_p90, r.alpha_max};
    });
}

raptor_status raptor_steering_write(const raptor_steering* run, const char* report_path,
                                    const char* csv_path) {
    return guard([&] {
        need(run, "steering run");
        need(report_path, "report path");
        need(csv_path, "csv path");
        const raptor::SteeringReport r = raptor::summarize_steering(run->outcomes, run->cfg);
        raptor::io::write_steering_report(report_path, r, run->cfg);
        raptor::io::write_steering_csv(csv_path, run->outcomes);
    });
}

void raptor_steering_free(raptor_steering* run) { delete run; }

/* ---- theory ------------------------------------------------------------ */

void raptor_theory_options_default(raptor_theory_options* opts) {
    if (!opts) return;
    const raptor::FixedPointOptions d;
    opts->tol = d.tol;
    opts->quad_nodes = d.quad_nodes;
    opts->max_iter = d.max_iter;
    opts->explore_all = d.explore_all ? 1 : 0;
    opts->has_init = 0;
    opts->init[0] = opts->init[1] = opts->init[2] = 0.0;
}

raptor_status raptor_logistic_prox(double u, double gamma, double* eta) {
    return guard([&] {
        need(eta, "eta");
        *eta = raptor::logistic_prox(u, gamma);
    });
}

raptor_status raptor_accuracy_from_margin(double margin, double kappa, double* acc) {
    return guard([&] {
        need(acc, "acc");
        *acc = raptor::accuracy_from_margin(margin, kappa);
    });
}

raptor_status raptor_bayes_ceiling(double kappa, double* acc) {
    return guard([&] {
        need(acc, "acc");
        *acc = raptor::bayes_ceiling(kappa);
    });
}

raptor_status raptor_theory_solve(double delta, double lambda, double kappa,
                                  const raptor_theory_options* opts, raptor_fixed_point** out) {
    return guard([&] {
        need(out, "out");
        raptor_theory_options o;
        raptor_theory_options_default(&o);
        if (opts) o = *opts;
        raptor::FixedPointOptions fo;
        fo.tol = o.tol;
        fo.quad_nodes = o.quad_nodes;
        fo.max_iter = o.max_iter;
        fo.explore_all = o.explore_all != 0;
        if (o.has_init) fo.init = std::array<double, 3>{o.init[0], o.init[1], o.init[2]};
        *out = new raptor_fixed_point{raptor::solve_fixed_point({delta, lambda, kappa}, fo)};
    });
}

void raptor_fixed_point_values(const raptor_fixed_point* fp, double* alpha_bar, double* sigma_bar,
                               double* gamma_bar, double* residual_max) {
    if (!fp) return;
    if (alpha_bar) *alpha_bar = fp->sol.alpha_bar;
    if (sigma_bar) *sigma_bar = fp->sol.sigma_bar;
    if (gamma_bar) *gamma_bar = fp->sol.gamma_bar;
    if (residual_max) *residual_max = fp->sol.residual_max();
}

double raptor_fixed_point_accuracy(const raptor_fixed_point* fp) {
    return fp ? raptor::asymptotic_accuracy(fp->sol) : std::numeric_limits<double>::quiet_NaN();
}

raptor_status raptor_fixed_point_stability(const raptor_fixed_point* fp, double* stability,
                                           double* alignment) {
    return guard([&] {
        need(fp, "fixed point");
        const raptor::StabilityPrediction s = raptor::stability_prediction(fp->sol);
        if (stability) *stability = s.stability;
        if (alignment) *alignment = s.alignment;
    });
}

size_t raptor_fixed_point_solutions(const raptor_fixed_point* fp) {
    return fp ? 1 + fp->sol.alternatives.size() : 0;
}

raptor_status raptor_fixed_point_write(const raptor_fixed_point* fp, const char* path) {
    return guard([&] {
        need(fp, "fixed point");
        need(path, "path");
        raptor::io::write_fixed_point(path, fp->sol);
    });
}

void raptor_fixed_point_free(raptor_fixed_point* fp) { delete fp; }

/* ---- sweeps ------------------------------------------------------------ */

void raptor_sweep_options_default(raptor_sweep_options* opts) {
    if (!opts) return;
    const raptor::SweepOptions d;
    opts->p = d.p;
    opts->reps = d.reps;
    opts->seed = d.seed;
    opts->jobs = d.jobs;
    opts->quad_nodes = d.quad_nodes;
}

raptor_status raptor_sweep_run(const double* deltas, const double* lambdas, const double* kappas,
                               size_t n_points, const raptor_sweep_options* opts,
                               raptor_sweep** out) {
    return guard([&] {
        need(deltas, "deltas");
        need(lambdas, "lambdas");
        need(kappas, "kappas");
        need(out, "out");
        raptor_sweep_options o;
        raptor_sweep_options_default(&o);
        if (opts) o = *opts;
        std::vector<raptor::RegimeParams> grid;
        for (size_t i = 0; i < n_points; ++i) grid.push_back({deltas[i], lambdas[i], kappas[i]});
        raptor::SweepOptions so;
        so.p = o.p;
        so.reps = o.reps;
        so.seed = o.seed;
        so.jobs = o.jobs;
        so.quad_nodes = o.quad_nodes;
        *out = new raptor_sweep{raptor::theory_vs_empirics_sweep(grid, so)};
    });
}

size_t raptor_sweep_rows(const raptor_sweep* sweep) { return sweep ? sweep->result.rows.size() : 0; }

size_t raptor_sweep_failed_rows(const raptor_sweep* sweep) {
    return sweep ? sweep->result.summary.failed_rows : 0;
}

void raptor_sweep_correlations(const raptor_sweep* sweep, double* spearman, double* pearson) {
    if (!sweep) return;
    if (spearman) *spearman = sweep->result.summary.spearman;
    if (pearson) *pearson = sweep->result.summary.pearson;
}

raptor_status raptor_sweep_write_csv(const raptor_sweep* sweep, const char* path) {
    return guard([&] {
        need(sweep, "sweep");
        need(path, "path");
        raptor::write_sweep_csv(path, sweep->result);
    });
}

raptor_status raptor_sweep_write_summary(const raptor_sweep* sweep, const char* path) {
    return guard([&] {
        need(sweep, "sweep");
        need(path, "path");
        raptor::write_sweep_summary(path, sweep->result);
    });
}

void raptor_sweep_free(raptor_sweep* sweep) { delete sweep; }

}  // extern "C"
