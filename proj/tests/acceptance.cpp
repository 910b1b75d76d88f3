#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "core/data.hpp"
#include "core/probe.hpp"
#include "core/rng.hpp"
#include "core/robustness.hpp"
#include "core/stats.hpp"
#include "core/steering.hpp"
#include "core/sweep.hpp"
#include "core/theory.hpp"

using namespace raptor;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Vector gaussian_vector(Rng& rng, Eigen::Index p, double scale = 1.0) {
    Vector v(p);
    for (Eigen::Index j = 0; j < p; ++j) v[j] = scale * rng.normal();
    return v;
}

Matrix gaussian_matrix(Rng& rng, Eigen::Index n, Eigen::Index p, double scale = 1.0) {
    Matrix m(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = scale * rng.normal();
    return m;
}

// The proportional-regime grid shared by the agreement and fixed-point checks.
std::vector<RegimeParams> agreement_grid() {
    std::vector<RegimeParams> grid;
    for (double delta : {0.5, 1.0, 2.0, 4.0})
        for (double lambda : {0.03, 0.1, 0.3, 1.0}) grid.push_back({delta, lambda, 1.0});
    return grid;
}

const SweepResult& agreement_sweep() {
    static const SweepResult result = [] {
        SweepOptions opts;
        opts.p = 500;
        opts.reps = 20;
        opts.seed = 20240601;
        return theory_vs_empirics_sweep(agreement_grid(), opts);
    }();
    return result;
}

struct GridMeans {
    double alpha_bar, sigma_bar, acc_pred;
    double alpha_emp, sigma_emp, acc_emp;
    std::size_t failed;
};

std::vector<GridMeans> grid_means() {
    const SweepResult& r = agreement_sweep();
    const std::size_t points = agreement_grid().size();
    std::vector<GridMeans> out(points, GridMeans{0, 0, 0, 0, 0, 0, 0});
    std::vector<std::size_t> ok(points, 0);
    for (const auto& row : r.rows) {
        GridMeans& g = out[row.grid_index];
        if (!row.ok()) {
            ++g.failed;
            continue;
        }
        g.alpha_bar = row.alpha_bar;
        g.sigma_bar = row.sigma_bar;
        g.acc_pred = row.acc_pred;
        g.alpha_emp += row.alpha_emp;
        g.sigma_emp += row.sigma_emp;
        g.acc_emp += row.acc_emp;
        ++ok[row.grid_index];
    }
    for (std::size_t i = 0; i < points; ++i) {
        const double k = static_cast<double>(std::max<std::size_t>(ok[i], 1));
        out[i].alpha_emp /= k;
        out[i].sigma_emp /= k;
        out[i].acc_emp /= k;
    }
    return out;
}

Verdict theory_empirics_agreement() {
    const auto means = grid_means();
    double worst_a = 0.0, worst_s = 0.0;
    std::size_t failed = 0;
    for (const auto& g : means) {
        failed += g.failed;
        worst_a = std::max(worst_a, std::abs(g.alpha_emp - g.alpha_bar));
        worst_s = std::max(worst_s, std::abs(g.sigma_emp - g.sigma_bar));
    }
    return {failed == 0 && worst_a <= 0.05 && worst_s <= 0.05,
            fmt("16 points x 20 seeds at p=500: max |alpha gap| = %.4f, max |sigma gap| = %.4f, "
                "failed rows = %zu",
                worst_a, worst_s, failed)};
}

Verdict accuracy_formula() {
    const auto means = grid_means();
    double worst = 0.0;
    for (const auto& g : means) worst = std::max(worst, std::abs(g.acc_emp - g.acc_pred));
    return {worst <= 0.02, fmt("max |empirical - predicted accuracy| = %.4f over 16 points", worst)};
}

Verdict accuracy_limits() {
    bool ok = true;
    std::string detail;
    for (double kappa : {0.5, 1.0, 2.0}) {
        const double at_zero = accuracy_from_margin(0.0, kappa);
        const double gap = std::abs(accuracy_from_margin(1e6, kappa) - bayes_ceiling(kappa));
        ok = ok && at_zero == 0.5 && gap <= 1e-6;
        detail += fmt("kappa=%g: acc(0)=%.17g, |acc(1e6) - ceiling|=%.2e; ", kappa, at_zero, gap);
    }
    return {ok, detail};
}

Verdict prox_contract() {
    double worst = 0.0;
    std::size_t violations = 0;
    for (int gi = 0; gi < 100; ++gi) {
        const double gamma = std::pow(10.0, -3.0 + 6.0 * gi / 99.0);
        double prev = -std::numeric_limits<double>::infinity();
        for (int ui = 0; ui < 100; ++ui) {
            const double u = -50.0 + 100.0 * ui / 99.0;
            const double eta = logistic_prox(u, gamma);
            worst = std::max(worst, std::abs(eta + gamma * sigmoid(eta) - u));
            if (!(eta >= prev)) ++violations;
            prev = eta;
        }
    }
    return {worst <= 1e-12 && violations == 0,
            fmt("10^4 (u, gamma) points: max residual %.2e, monotonicity violations %zu", worst,
                violations)};
}

Verdict fixed_point_quality() {
    double worst_res = 0.0, worst_shift = 0.0;
    std::size_t solved = 0;
    for (const auto& params : agreement_grid()) {
        FixedPointOptions base;
        base.explore_all = false;
        const FixedPointSolution a = solve_fixed_point(params, base);
        FixedPointOptions doubled = base;
        doubled.quad_nodes = 2 * base.quad_nodes;
        const FixedPointSolution b = solve_fixed_point(params, doubled);
        for (double r : a.residuals) worst_res = std::max(worst_res, std::abs(r));
        worst_shift = std::max({worst_shift, std::abs(a.alpha_bar - b.alpha_bar),
                                std::abs(a.sigma_bar - b.sigma_bar),
                                std::abs(a.gamma_bar - b.gamma_bar)});
        ++solved;
    }
    return {worst_res <= 1e-8 && worst_shift <= 1e-6,
            fmt("%zu points: max residual %.2e, max (alpha, sigma, gamma) shift under node doubling %.2e",
                solved, worst_res, worst_shift)};
}

Verdict fold_back_exactness() {
    Rng rng(606);
    double worst = 0.0;
    std::size_t scales_checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = static_cast<Eigen::Index>(2 + rng.below(12));
        const Eigen::Index n = 40;
        Matrix x = gaussian_matrix(rng, n, p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const Vector col = x.col(j);
            const double sd = std::sqrt((col.array() - col.mean()).square().mean());
            x.col(j) = (col.array() - col.mean()) / sd * (1.0 + 4.0 * rng.uniform()) +
                       (rng.normal() * 3.0);
        }
        IndexSet all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        const Standardizer st = fit_standardizer(x, all);
        if (st.s.minCoeff() < 1.0) continue;
        ++scales_checked;
        const ProbeModel m = fold_back(gaussian_vector(rng, p, 2.0), rng.normal(), st, 1.0);
        Matrix h(1, p);
        h.row(0) = gaussian_vector(rng, p, 5.0).transpose();
        const double standardized = apply_standardizer(st, h).row(0).dot(m.w_std()) + m.b_std();
        const double native = m.logit(h.row(0).transpose());
        worst = std::max(worst, std::abs(standardized - native));
    }
    return {scales_checked == 1000 && worst <= 1e-8,
            fmt("%zu random probes with all s_j >= 1: max logit gap %.2e", scales_checked, worst)};
}

Vector gradient_descent_oracle(const Matrix& x, const Vector& y, double lambda, Vector theta) {
    const auto n = static_cast<double>(x.rows());
    Matrix xa(x.rows(), x.cols() + 1);
    xa << x, Vector::Ones(x.rows());
    const Eigen::MatrixXd gram = xa.transpose() * xa / n;
    const double lip =
        0.25 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff() + lambda;
    for (int it = 0; it < 2000000; ++it) {
        const Vector g =
            ridge_logistic_gradient(x, y, theta.head(x.cols()), theta[x.cols()], lambda);
        if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
        theta -= g / lip;
    }
    return theta;
}

Verdict optimizer_correctness() {
    Rng rng(707);
    double worst_grad = 0.0, worst_param = 0.0, worst_init = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const auto n = static_cast<Eigen::Index>(20 + rng.below(41));
        const auto p = static_cast<Eigen::Index>(2 + rng.below(7));
        const double lambda = std::pow(10.0, -1.5 + 1.5 * rng.uniform());
        const Matrix x = gaussian_matrix(rng, n, p);
        const Vector w_true = gaussian_vector(rng, p);
        Vector y(n);
        for (Eigen::Index i = 0; i < n; ++i)
            y[i] = rng.uniform() < sigmoid(x.row(i).dot(w_true)) ? 1.0 : -1.0;
        y[0] = 1.0;
        y[1] = -1.0;

        const FitResult fit = fit_ridge_logistic(x, y, lambda);
        worst_grad = std::max(worst_grad,
                              ridge_logistic_gradient(x, y, fit.w, fit.b, lambda).lpNorm<Eigen::Infinity>());
        const Vector oracle = gradient_descent_oracle(x, y, lambda, Vector::Zero(p + 1));
        worst_param = std::max({worst_param, (fit.w - oracle.head(p)).lpNorm<Eigen::Infinity>(),
                                std::abs(fit.b - oracle[p])});
        const FitResult other =
            fit_ridge_logistic(x, y, lambda, {}, FitStart{gaussian_vector(rng, p, 3.0), rng.normal()});
        worst_init = std::max({worst_init, (fit.w - other.w).lpNorm<Eigen::Infinity>(),
                               std::abs(fit.b - other.b)});
    }
    return {worst_grad <= 1e-8 && worst_param <= 1e-4 && worst_init <= 1e-5,
            fmt("20 instances: max |grad|_inf %.2e, max oracle gap %.2e, max init gap %.2e",
                worst_grad, worst_param, worst_init)};
}

Verdict lambda_selection() {
    std::size_t argmax_violations = 0;
    double worst_warm_cold = 0.0;
    const int runs = 10;
    for (int r = 0; r < runs; ++r) {
        const TeacherSample s =
            generate_teacher_student({60, 200, 1.0 + 0.3 * r, 800 + static_cast<std::uint64_t>(r)});
        const SplitIndices split = stratified_train_val_split(s.data.labels(), 0.3, 900 + r);
        const Standardizer st = fit_standardizer(s.data.features(), split.train);
        const Matrix z = apply_standardizer(st, s.data.features());
        auto rows = [&](const IndexSet& idx) { return select_rows(z, idx); };
        auto labels = [&](const IndexSet& idx) { return to_signed(select(s.data.labels(), idx)); };
        const auto grid = default_lambda_grid();
        TuneOptions warm, cold;
        cold.warm_start = false;
        const TuneResult a =
            tune_lambda(rows(split.train), labels(split.train), rows(split.val), labels(split.val), grid, warm);
        const TuneResult b =
            tune_lambda(rows(split.train), labels(split.train), rows(split.val), labels(split.val), grid, cold);
        const double best = a.val_accuracy[a.best_index];
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (a.val_accuracy[k] > best) ++argmax_violations;
            worst_warm_cold = std::max(worst_warm_cold, std::abs(a.val_accuracy[k] - b.val_accuracy[k]));
        }
        if (a.lambda_star != grid[a.best_index]) ++argmax_violations;
    }
    return {argmax_violations == 0 && worst_warm_cold <= 1e-6,
            fmt("%d tuning runs over 100-point grids: argmax violations %zu, max warm/cold gap %.2e",
                runs, argmax_violations, worst_warm_cold)};
}

Verdict gcav_calibration() {
    Rng rng(909);
    std::size_t sign_violations = 0, intervened = 0;
    double worst = 0.0;
    for (int c = 0; c < 10000; ++c) {
        const auto p = static_cast<Eigen::Index>(1 + rng.below(10));
        const Vector omega = gaussian_vector(rng, p);
        const double b = 2.0 * rng.normal();
        const ProbeModel probe(omega, b, omega, b, 1.0);
        SteeringConfig cfg;
        cfg.layers = {0};
        if (rng.uniform() < 0.5) {
            cfg.mode = SteerMode::Towards;
            cfg.target_prob = 0.5 + 0.4999 * (0.001 + 0.999 * rng.uniform());
        } else {
            cfg.mode = SteerMode::Away;
            cfg.target_prob = 0.5 - 0.4999 * (0.001 + 0.999 * rng.uniform());
        }
        const Vector h = gaussian_vector(rng, p, 3.0);
        const auto out = steer_layerwise({{0, {probe, 1.0}}}, {{0, h}}, cfg).front();
        const double alpha = gcav_alpha(probe, h, cfg);
        if (cfg.mode == SteerMode::Towards ? alpha < 0.0 : alpha > 0.0) ++sign_violations;
        if (out.intervened) {
            ++intervened;
            worst = std::max(worst, std::abs(out.post_prob - cfg.target_prob));
        }
    }
    return {sign_violations == 0 && worst <= 1e-6,
            fmt("10^4 cases (%zu intervened): sign violations %zu, max |post - target| %.2e",
                intervened, sign_violations, worst)};
}

Verdict robustness_metric() {
    Rng rng(1010);
    std::size_t violations = 0;
    double worst_identical = 0.0, worst_orthogonal = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const auto k = static_cast<std::size_t>(2 + rng.below(9));
        const auto p = static_cast<Eigen::Index>(2 + rng.below(19));
        std::vector<Vector> dirs;
        for (std::size_t r = 0; r < k; ++r) dirs.push_back(gaussian_vector(rng, p).normalized());
        const double base = mean_abs_pairwise_cosine(dirs);

        std::vector<Vector> flipped = dirs;
        for (auto& v : flipped)
            if (rng.uniform() < 0.5) v = -v;
        std::vector<Vector> permuted = dirs;
        for (std::size_t i = permuted.size(); i > 1; --i)
            std::swap(permuted[i - 1], permuted[rng.below(i)]);
        if (mean_abs_pairwise_cosine(flipped) != base) ++violations;
        if (mean_abs_pairwise_cosine(permuted) != base) ++violations;

        const std::vector<Vector> same(k, dirs.front());
        worst_identical = std::max(worst_identical, std::abs(mean_abs_pairwise_cosine(same) - 1.0));

        Vector u = dirs[0];
        Vector w = gaussian_vector(rng, p);
        w -= w.dot(u) * u;
        w.normalize();
        worst_orthogonal = std::max(worst_orthogonal, mean_abs_pairwise_cosine({u, w}));
    }
    return {violations == 0 && worst_identical <= 1e-12 && worst_orthogonal <= 1e-12,
            fmt("10^3 sets: invariance violations %zu, max |identical - 1| %.2e, max orthogonal %.2e",
                violations, worst_identical, worst_orthogonal)};
}

Verdict stability_link() {
    const std::vector<double> lambdas{0.003, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0};
    const std::size_t p = 200, pool = 150;
    AblationConfig cfg;
    cfg.k_runs = 20;
    cfg.drop_frac = 0.2;
    const double kept = static_cast<double>(pool - static_cast<std::size_t>(round_half_up(cfg.drop_frac * pool)));
    const double delta = kept / static_cast<double>(p);
    std::vector<double> predicted, measured;
    std::string detail;
    for (double lambda : lambdas) {
        FixedPointOptions fo;
        fo.explore_all = false;
        predicted.push_back(stability_prediction(solve_fixed_point({delta, lambda, 1.0}, fo)).stability);
        double score = 0.0;
        const int datasets = 3;
        for (int d = 0; d < datasets; ++d) {
            const TeacherSample s = generate_teacher_student({p, pool, 1.0, 1100 + static_cast<std::uint64_t>(d)});
            IndexSet all(pool);
            std::iota(all.begin(), all.end(), 0);
            cfg.seed = 1200 + static_cast<std::uint64_t>(d);
            const AblationRuns runs = ablation_directions(s.data, all, cfg, fixed_lambda_pipeline(lambda));
            score += mean_abs_pairwise_cosine(runs.directions) / datasets;
        }
        measured.push_back(score);
        detail += fmt("lambda=%g: pred %.3f meas %.3f; ", lambda, predicted.back(), score);
    }
    const double rho = stats::spearman(predicted, measured);
    return {rho >= 0.5, fmt("Spearman %.3f (delta = %.2f); ", rho, delta) + detail};
}

Verdict ratio_control() {
    const double lambda = 0.1, kappa = 2.0;
    std::vector<double> small, large;
    for (std::uint64_t s = 0; s < 20; ++s) {
        small.push_back(measure_order_params(400, 400, kappa, lambda, 1300 + s).test_accuracy);
        large.push_back(measure_order_params(800, 800, kappa, lambda, 1400 + s).test_accuracy);
    }
    const double m1 = stats::mean(small), m2 = stats::mean(large);
    const double se = std::sqrt(std::pow(stats::stddev(small), 2) / 20.0 +
                                std::pow(stats::stddev(large), 2) / 20.0);
    const double gap = std::abs(m1 - m2);
    return {gap <= 2.0 * se,
            fmt("(400,400) mean %.4f, (800,800) mean %.4f, gap %.4f, 2 pooled SE %.4f", m1, m2, gap,
                2.0 * se)};
}

Verdict structure_sweep() {
    std::vector<RegimeParams> grid;
    for (double delta : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) grid.push_back({delta, 0.1, 2.0});
    SweepOptions opts;
    opts.p = 200;
    opts.reps = 5;
    opts.seed = 1500;
    const SweepResult r = theory_vs_empirics_sweep(grid, opts);
    std::string detail = fmt("Spearman %.3f, Pearson %.3f, failed rows %zu; ", r.summary.spearman,
                             r.summary.pearson, r.summary.failed_rows);
    for (std::size_t i = 0; i < grid.size(); ++i)
        detail += fmt("delta=%g pred %.3f true %.3f; ", grid[i].delta, r.summary.mean_acc_pred[i],
                      r.summary.mean_acc_emp[i]);
    return {r.summary.failed_rows == 0 && r.summary.spearman >= 0.8, detail};
}

Verdict separability_diagnostic() {
    Rng rng(1616);
    int separable_hits = 0, xor_hits = 0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index n = 60, p = 5;
        const Vector w = gaussian_vector(rng, p).normalized();
        Matrix x(n, p);
        Vector y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            Vector row = gaussian_vector(rng, p);
            const double sign = i % 2 == 0 ? 1.0 : -1.0;
            const double s = row.dot(w);
            row += (sign * (0.5 + std::abs(s)) - s) * w;
            x.row(i) = row.transpose();
            y[i] = sign;
        }
        if (perceptron_separability(x, y).verdict == Separability::Separable) ++separable_hits;

        Matrix xx(n, 2);
        Vector yx(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int a = static_cast<int>(i % 2), b = static_cast<int>((i / 2) % 2);
            xx(i, 0) = a + 0.1 * rng.normal();
            xx(i, 1) = b + 0.1 * rng.normal();
            yx[i] = a == b ? -1.0 : 1.0;
        }
        if (perceptron_separability(xx, yx).verdict == Separability::Undetermined) ++xor_hits;
    }
    return {separable_hits == 100 && xor_hits == 100,
            fmt("margin data separable %d/100, XOR undetermined %d/100", separable_hits, xor_hits)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"theory-empirics agreement of order parameters", theory_empirics_agreement},
        {"asymptotic accuracy formula", accuracy_formula},
        {"accuracy limits", accuracy_limits},
        {"proximal map contract", prox_contract},
        {"fixed-point residuals and quadrature stability", fixed_point_quality},
        {"fold-back exactness", fold_back_exactness},
        {"optimizer correctness", optimizer_correctness},
        {"lambda selection contract", lambda_selection},
        {"GCAV calibration", gcav_calibration},
        {"robustness metric invariances", robustness_metric},
        {"stability link", stability_link},
        {"ratio control", ratio_control},
        {"structure-validation sweep", structure_sweep},
        {"separability diagnostic", separability_diagnostic},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failures;
        std::printf("%s criterion %zu (%s): %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first, v.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
