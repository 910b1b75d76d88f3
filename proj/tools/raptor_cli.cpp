#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "raptor/raptor.h"

namespace {

enum Exit { kOk = 0, kInputError = 1, kConvergenceError = 2, kIoError = 3 };

int exit_code(raptor_status s) {
    switch (s) {
        case RAPTOR_OK: return kOk;
        case RAPTOR_E_NON_CONVERGENCE: return kConvergenceError;
        case RAPTOR_E_IO: return kIoError;
        case RAPTOR_E_INTERNAL:
        case RAPTOR_E_OUT_OF_MEMORY: return 4;
        default: return kInputError;
    }
}

struct Failure {
    raptor_status status;
};

void check(raptor_status s) {
    if (s != RAPTOR_OK) throw Failure{s};
}

std::string num(double x) {
    if (std::isnan(x)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};

using Dataset = std::unique_ptr<raptor_dataset, Deleter<raptor_dataset, raptor_dataset_free>>;
using Probe = std::unique_ptr<raptor_probe, Deleter<raptor_probe, raptor_probe_free>>;
using Robustness =
    std::unique_ptr<raptor_robustness, Deleter<raptor_robustness, raptor_robustness_free>>;
using Steering = std::unique_ptr<raptor_steering, Deleter<raptor_steering, raptor_steering_free>>;
using FixedPoint =
    std::unique_ptr<raptor_fixed_point, Deleter<raptor_fixed_point, raptor_fixed_point_free>>;
using Sweep = std::unique_ptr<raptor_sweep, Deleter<raptor_sweep, raptor_sweep_free>>;
using Buffer = std::unique_ptr<double, Deleter<double, raptor_buffer_free>>;

Dataset load_dataset(const std::string& path) {
    raptor_dataset* d = nullptr;
    check(raptor_dataset_load(path.c_str(), &d));
    return Dataset(d);
}

struct GenArgs {
    std::size_t p = 0, n = 0;
    double kappa = 1.0;
    std::uint64_t seed = 0;
    std::string out;
    std::optional<std::uint32_t> layer;
};

void run_gen(const GenArgs& a) {
    raptor_dataset* d = nullptr;
    check(raptor_dataset_generate(a.p, a.n, a.kappa, a.seed, &d));
    Dataset data(d);
    if (a.layer) check(raptor_dataset_set_layer(data.get(), *a.layer));
    check(raptor_dataset_save(data.get(), a.out.c_str()));
    std::printf("n=%zu\np=%zu\nkappa=%s\nseed=%llu\n", a.n, a.p, num(a.kappa).c_str(),
                static_cast<unsigned long long>(a.seed));
}

struct ProbeArgs {
    std::string data, out, grid;
    std::uint64_t seed = 0;
    double test_frac = 0.2, val_frac = 0.2;
};

void run_probe(const ProbeArgs& a) {
    const Dataset data = load_dataset(a.data);
    raptor_probe_options o;
    raptor_probe_options_default(&o);
    o.seed = a.seed;
    o.test_frac = a.test_frac;
    o.val_frac = a.val_frac;
    if (!a.grid.empty()) o.grid_spec = a.grid.c_str();
    raptor_probe* p = nullptr;
    check(raptor_probe_train(data.get(), &o, &p));
    const Probe probe(p);
    check(raptor_probe_save(probe.get(), a.out.c_str()));
    std::printf("lambda_star=%s\nval_accuracy=%s\ntest_accuracy=%s\n",
                num(raptor_probe_lambda(probe.get())).c_str(),
                num(raptor_probe_val_accuracy(probe.get())).c_str(),
                num(raptor_probe_test_accuracy(probe.get())).c_str());
}

struct RobustArgs {
    std::vector<std::string> data;
    std::string out, grid;
    std::uint64_t seed = 0;
    std::size_t k_runs = 20, jobs = 1;
    double drop_frac = 0.2, val_frac = 0.2;
    std::optional<double> lambda;
};

void run_robust(const RobustArgs& a) {
    std::vector<Dataset> layers;
    std::vector<const raptor_dataset*> raw;
    for (const auto& path : a.data) {
        layers.push_back(load_dataset(path));
        raw.push_back(layers.back().get());
    }
    raptor_robust_options o;
    raptor_robust_options_default(&o);
    o.k_runs = a.k_runs;
    o.drop_frac = a.drop_frac;
    o.val_frac = a.val_frac;
    o.seed = a.seed;
    o.jobs = a.jobs;
    if (!a.grid.empty()) o.grid_spec = a.grid.c_str();
    if (a.lambda) {
        o.fixed_lambda = 1;
        o.lambda = *a.lambda;
    }
    raptor_robustness* r = nullptr;
    check(raptor_robustness_run(raw.data(), raw.size(), &o, &r));
    const Robustness rep(r);
    check(raptor_robustness_write_csv(rep.get(), a.out.c_str()));
    for (std::size_t i = 0; i < raptor_robustness_layers(rep.get()); ++i) {
        std::uint32_t id = 0;
        double score = 0.0;
        check(raptor_robustness_layer(rep.get(), i, &id, &score));
        std::printf("layer_%u=%s\n", id, num(score).c_str());
    }
    std::uint32_t best = 0;
    double best_score = 0.0;
    raptor_robustness_best(rep.get(), &best, &best_score);
    std::printf("mean=%s\nbest_layer=%u\nbest_score=%s\n",
                num(raptor_robustness_mean(rep.get())).c_str(), best, num(best_score).c_str());
}

struct TheoryArgs {
    double delta = 1.0, lambda = 1.0, kappa = 1.0, tol = 1e-10;
    std::size_t quad_nodes = 80;
    bool first_only = false;
    std::string out;
};

void run_theory(const TheoryArgs& a) {
    raptor_theory_options o;
    raptor_theory_options_default(&o);
    o.quad_nodes = a.quad_nodes;
    o.tol = a.tol;
    o.explore_all = a.first_only ? 0 : 1;
    raptor_fixed_point* f = nullptr;
    check(raptor_theory_solve(a.delta, a.lambda, a.kappa, &o, &f));
    const FixedPoint fp(f);
    double alpha = 0, sigma = 0, gamma = 0, res = 0, stab = 0, align = 0, ceiling = 0;
    raptor_fixed_point_values(fp.get(), &alpha, &sigma, &gamma, &res);
    check(raptor_fixed_point_stability(fp.get(), &stab, &align));
    check(raptor_bayes_ceiling(a.kappa, &ceiling));
    if (!a.out.empty()) check(raptor_fixed_point_write(fp.get(), a.out.c_str()));
    std::printf(
        "alpha_bar=%s\nsigma_bar=%s\ngamma_bar=%s\nresidual_max=%s\nacc_pred=%s\n"
        "bayes_ceiling=%s\nstability=%s\nalignment=%s\nn_solutions=%zu\n",
        num(alpha).c_str(), num(sigma).c_str(), num(gamma).c_str(), num(res).c_str(),
        num(raptor_fixed_point_accuracy(fp.get())).c_str(), num(ceiling).c_str(),
        num(stab).c_str(), num(align).c_str(), raptor_fixed_point_solutions(fp.get()));
}

struct ValidateArgs {
    std::vector<double> deltas, lambdas, kappas;
    std::size_t p = 500, reps = 5, jobs = 1, quad_nodes = 80;
    std::uint64_t seed = 0;
    std::string out;
};

void run_validate(const ValidateArgs& a) {
    std::vector<double> d, l, k;
    for (double x : a.deltas)
        for (double y : a.lambdas)
            for (double z : a.kappas) {
                d.push_back(x);
                l.push_back(y);
                k.push_back(z);
            }
    raptor_sweep_options o;
    raptor_sweep_options_default(&o);
    o.p = a.p;
    o.reps = a.reps;
    o.seed = a.seed;
    o.jobs = a.jobs;
    o.quad_nodes = a.quad_nodes;
    raptor_sweep* s = nullptr;
    check(raptor_sweep_run(d.data(), l.data(), k.data(), d.size(), &o, &s));
    const Sweep sweep(s);
    check(raptor_sweep_write_csv(sweep.get(), a.out.c_str()));
    check(raptor_sweep_write_summary(sweep.get(), (a.out + ".summary").c_str()));
    double rho = 0, r = 0;
    raptor_sweep_correlations(sweep.get(), &rho, &r);
    std::printf("grid_points=%zu\nrows=%zu\nfailed_rows=%zu\nspearman=%s\npearson=%s\n", d.size(),
                raptor_sweep_rows(sweep.get()), raptor_sweep_failed_rows(sweep.get()),
                num(rho).c_str(), num(r).c_str());
}

struct SteerArgs {
    std::vector<std::string> probes, hidden;
    std::optional<double> target, tau;
    std::string mode = "towards", out;
};

void run_steer(const SteerArgs& a) {
    if (a.probes.size() != a.hidden.size()) {
        std::fprintf(stderr, "error: need one --hidden file per --probe file\n");
        throw Failure{RAPTOR_E_INVALID_ARGUMENT};
    }
    std::vector<Probe> probes;
    std::vector<Buffer> buffers;
    std::vector<const raptor_probe*> raw_probes;
    std::vector<const double*> raw_hidden;
    std::vector<std::uint32_t> layers;
    std::optional<std::size_t> prompts;
    for (std::size_t i = 0; i < a.probes.size(); ++i) {
        raptor_probe* p = nullptr;
        check(raptor_probe_load(a.probes[i].c_str(), &p));
        probes.emplace_back(p);
        double* buf = nullptr;
        std::size_t n = 0, dim = 0;
        int has_layer = 0;
        std::uint32_t hidden_layer = 0;
        check(raptor_matrix_load(a.hidden[i].c_str(), &buf, &n, &dim, &has_layer, &hidden_layer));
        buffers.emplace_back(buf);
        if (dim != raptor_probe_dim(p) || (prompts && *prompts != n)) {
            std::fprintf(stderr, "error: hidden-state file %s has shape %zux%zu\n",
                         a.hidden[i].c_str(), n, dim);
            throw Failure{RAPTOR_E_DIMENSION_MISMATCH};
        }
        prompts = n;
        std::uint32_t layer = static_cast<std::uint32_t>(i);
        if (!raptor_probe_layer(p, &layer) && has_layer) layer = hidden_layer;
        layers.push_back(layer);
        raw_probes.push_back(p);
        raw_hidden.push_back(buf);
    }
    raptor_steer_options o;
    raptor_steer_options_default(&o);
    if (a.mode == "away") {
        o.mode = RAPTOR_STEER_AWAY;
        o.target_prob = 1e-4;
    }
    if (a.target) o.target_prob = *a.target;
    if (a.tau) {
        o.has_tau = 1;
        o.tau = *a.tau;
    }
    raptor_steering* s = nullptr;
    check(raptor_steer_run(raw_probes.data(), layers.data(), raw_hidden.data(), layers.size(),
                           prompts.value_or(0), &o, &s));
    const Steering run(s);
    check(raptor_steering_write(run.get(), a.out.c_str(), (a.out + ".csv").c_str()));
    raptor_steer_summary sum;
    check(raptor_steering_summary(run.get(), &sum));
    std::printf(
        "evaluated=%zu\nskipped=%zu\nsuccess_rate=%s\nintervention_rate=%s\nalpha_median=%s\n"
        "alpha_p90=%s\nalpha_max=%s\n",
        sum.evaluated, sum.skipped, num(sum.success_rate).c_str(),
        num(sum.intervention_rate).c_str(), num(sum.alpha_median).c_str(),
        num(sum.alpha_p90).c_str(), num(sum.alpha_max).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ridge-adaptive logistic probes, steering calibration and proportional-regime theory"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate Gaussian teacher-student embeddings");
    gen_cmd->add_option("--p", gen.p, "Dimension")->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--n", gen.n, "Number of examples")->required()->check(CLI::Range(2ul, 1ul << 31));
    gen_cmd->add_option("--kappa", gen.kappa, "Teacher signal level")->required()->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->required();
    gen_cmd->add_option("--out", gen.out, "Output matrix path")->required();
    gen_cmd->add_option("--layer", gen.layer, "Layer id recorded in the manifest");

    ProbeArgs probe;
    auto* probe_cmd = app.add_subcommand("probe", "Train a probe: split, tune lambda, refit, fold back");
    probe_cmd->add_option("--data", probe.data, "Embedding file")->required();
    probe_cmd->add_option("--seed", probe.seed, "Split seed")->required();
    probe_cmd->add_option("--out", probe.out, "Probe output file")->required();
    probe_cmd->add_option("--grid", probe.grid, "C grid lo:hi:count:log|lin (default 1e-4:1e2:100:log)");
    probe_cmd->add_option("--test-frac", probe.test_frac, "Test fraction")->capture_default_str();
    probe_cmd->add_option("--val-frac", probe.val_frac, "Validation fraction")->capture_default_str();

    RobustArgs robust;
    auto* robust_cmd = app.add_subcommand("robust", "Directional robustness under example ablation");
    robust_cmd->add_option("--data", robust.data, "Embedding file per layer")->required();
    robust_cmd->add_option("--seed", robust.seed, "Ablation seed")->required();
    robust_cmd->add_option("--out", robust.out, "Robustness CSV")->required();
    robust_cmd->add_option("--k-runs", robust.k_runs, "Ablation runs")->capture_default_str();
    robust_cmd->add_option("--drop-frac", robust.drop_frac, "Fraction dropped per run")->capture_default_str();
    robust_cmd->add_option("--val-frac", robust.val_frac, "Validation fraction")->capture_default_str();
    robust_cmd->add_option("--jobs", robust.jobs, "Worker threads")->capture_default_str();
    robust_cmd->add_option("--grid", robust.grid, "C grid for lambda tuning");
    robust_cmd->add_option("--lambda", robust.lambda, "Fixed ridge strength instead of tuning");

    TheoryArgs theory;
    auto* theory_cmd = app.add_subcommand("theory", "Solve the proportional-regime fixed point");
    theory_cmd->add_option("--delta", theory.delta, "n/p")->required();
    theory_cmd->add_option("--lambda", theory.lambda, "Ridge strength")->required();
    theory_cmd->add_option("--kappa", theory.kappa, "Teacher signal level")->required();
    theory_cmd->add_option("--quad-nodes", theory.quad_nodes, "Gauss-Hermite nodes per axis")->capture_default_str();
    theory_cmd->add_option("--tol", theory.tol, "Residual tolerance")->capture_default_str();
    theory_cmd->add_flag("--first-only", theory.first_only, "Stop at the first converged start");
    theory_cmd->add_option("--out", theory.out, "Fixed-point record");

    ValidateArgs validate;
    auto* validate_cmd = app.add_subcommand("validate", "Theory versus empirics sweep");
    validate_cmd->add_option("--delta", validate.deltas, "n/p values (comma separated)")->required()->delimiter(',');
    validate_cmd->add_option("--lambda", validate.lambdas, "Ridge strengths")->required()->delimiter(',');
    validate_cmd->add_option("--kappa", validate.kappas, "Signal levels")->required()->delimiter(',');
    validate_cmd->add_option("--p", validate.p, "Dimension")->capture_default_str();
    validate_cmd->add_option("--reps", validate.reps, "Repetitions per grid point")->capture_default_str();
    validate_cmd->add_option("--seed", validate.seed, "Random seed")->required();
    validate_cmd->add_option("--out", validate.out, "Paired CSV (summary at <out>.summary)")->required();
    validate_cmd->add_option("--jobs", validate.jobs, "Worker threads")->capture_default_str();
    validate_cmd->add_option("--quad-nodes", validate.quad_nodes, "Gauss-Hermite nodes per axis")->capture_default_str();

    SteerArgs steer;
    auto* steer_cmd = app.add_subcommand("steer", "Closed-form steering calibration");
    steer_cmd->add_option("--probe", steer.probes, "Probe file per layer")->required();
    steer_cmd->add_option("--hidden", steer.hidden, "Hidden-state matrix per layer, same order")->required();
    steer_cmd->add_option("--target-prob", steer.target, "Target probability (default 0.9999 towards, 1e-4 away)");
    steer_cmd->add_option("--tau", steer.tau, "Minimum probe test accuracy");
    steer_cmd->add_option("--mode", steer.mode, "towards|away")
        ->check(CLI::IsMember({"towards", "away"}))->capture_default_str();
    steer_cmd->add_option("--out", steer.out, "Report file (CSV at <out>.csv)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*gen_cmd) run_gen(gen);
        else if (*probe_cmd) run_probe(probe);
        else if (*robust_cmd) run_robust(robust);
        else if (*theory_cmd) run_theory(theory);
        else if (*validate_cmd) run_validate(validate);
        else if (*steer_cmd) run_steer(steer);
    } catch (const Failure& f) {
        const char* detail = raptor_last_error();
        std::fprintf(stderr, "error (%s): %s\n", raptor_status_string(f.status),
                     detail && *detail ? detail : raptor_status_string(f.status));
        return exit_code(f.status);
    }
    return kOk;
}
