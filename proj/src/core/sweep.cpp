#include "core/sweep.hpp"

#include <cmath>
#include <fstream>

#include "core/data.hpp"
#include "core/io.hpp"
#include "core/parallel.hpp"
#include "core/probe.hpp"
#include "core/rng.hpp"
#include "core/stats.hpp"

namespace raptor {

EmpiricalOrderParams measure_order_params(std::size_t p, std::size_t n, double kappa,
                                          double lambda, std::uint64_t seed,
                                          std::size_t test_multiplier) {
    require(p >= 1 && n >= 2, ErrorCode::InvalidArgument, "need p >= 1 and n >= 2");
    require(test_multiplier >= 1, ErrorCode::InvalidArgument, "test multiplier must be positive");
    const TeacherSample sample = generate_teacher_student({p, n, kappa, seed});
    const double scale = std::sqrt(static_cast<double>(p));
    const Matrix g = sample.data.features() * scale;

    FitOptions fit;
    fit.fit_intercept = false;
    const FitResult res = fit_ridge_logistic(g, sample.data.signed_labels(), lambda, fit);
    const Vector& v = sample.direction;

    EmpiricalOrderParams out;
    out.alpha = res.w.dot(v);
    out.sigma = (res.w - out.alpha * v).norm();
    const EmbeddingDataset test =
        sample_from_teacher(v, kappa, test_multiplier * n, derive_seed(seed, 0x7e57));
    out.test_accuracy = linear_accuracy(test.features(), test.signed_labels(), res.w, 0.0);
    return out;
}

SweepResult theory_vs_empirics_sweep(const std::vector<RegimeParams>& grid,
                                     const SweepOptions& opts) {
    require(!grid.empty(), ErrorCode::EmptyGrid, "sweep grid is empty");
    require(opts.reps >= 1, ErrorCode::InvalidArgument, "reps must be positive");
    require(opts.p >= 1, ErrorCode::InvalidArgument, "p must be positive");
    for (const auto& g : grid) g.validate();

    std::vector<std::optional<FixedPointSolution>> solutions(grid.size());
    std::vector<std::string> solve_errors(grid.size());
    FixedPointOptions fp;
    fp.quad_nodes = opts.quad_nodes;
    parallel_for(grid.size(), opts.jobs, [&](std::size_t gi) {
        try {
            solutions[gi] = solve_fixed_point(grid[gi], fp);
        } catch (const Error& e) {
            solve_errors[gi] = std::string(error_code_name(e.code())) + ": " + e.what();
        }
    });

    SweepResult result;
    result.rows.resize(grid.size() * opts.reps);
    parallel_for(result.rows.size(), opts.jobs, [&](std::size_t k) {
        const std::size_t gi = k / opts.reps;
        const std::size_t rep = k % opts.reps;
        SweepRow& row = result.rows[k];
        row.params = grid[gi];
        row.grid_index = gi;
        row.seed = derive_seed(derive_seed(opts.seed, gi), rep);
        if (const auto& sol = solutions[gi]) {
            row.alpha_bar = sol->alpha_bar;
            row.sigma_bar = sol->sigma_bar;
            row.gamma_bar = sol->gamma_bar;
            row.residual_max = sol->residual_max();
            row.acc_pred = asymptotic_accuracy(*sol);
        } else {
            row.error = solve_errors[gi];
        }
        try {
            const auto n = static_cast<std::size_t>(
                round_half_up(row.params.delta * static_cast<double>(opts.p)));
            const EmpiricalOrderParams emp = measure_order_params(
                opts.p, n, row.params.kappa, row.params.lambda, row.seed, opts.test_multiplier);
            row.alpha_emp = emp.alpha;
            row.sigma_emp = emp.sigma;
            row.acc_emp = emp.test_accuracy;
        } catch (const Error& e) {
            if (!row.error.empty()) row.error += "; ";
            row.error += std::string(error_code_name(e.code())) + ": " + e.what();
        }
    });

    SweepSummary& sum = result.summary;
    sum.mean_acc_pred.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    sum.mean_acc_emp.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> xs, ys;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        double pred = 0.0, emp = 0.0;
        std::size_t ok = 0;
        for (std::size_t rep = 0; rep < opts.reps; ++rep) {
            const SweepRow& row = result.rows[gi * opts.reps + rep];
            if (!row.ok()) {
                ++sum.failed_rows;
                continue;
            }
            pred += row.acc_pred;
            emp += row.acc_emp;
            ++ok;
        }
        if (ok == 0) continue;
        sum.mean_acc_pred[gi] = pred / static_cast<double>(ok);
        sum.mean_acc_emp[gi] = emp / static_cast<double>(ok);
        xs.push_back(sum.mean_acc_pred[gi]);
        ys.push_back(sum.mean_acc_emp[gi]);
    }
    sum.spearman = stats::spearman(xs, ys);
    sum.pearson = stats::pearson(xs, ys);
    return result;
}

namespace {

std::string cell(double x) { return std::isnan(x) ? std::string("NA") : io::format_double(x); }

}  // namespace

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + path.string());
    out << "delta,lambda,kappa,alpha_bar,sigma_bar,gamma_bar,acc_pred,acc_emp,alpha_emp,"
           "sigma_emp,residual_max,seed\n";
    for (const auto& r : result.rows) {
        out << io::format_double(r.params.delta) << ',' << io::format_double(r.params.lambda) << ','
            << io::format_double(r.params.kappa) << ',' << cell(r.alpha_bar) << ','
            << cell(r.sigma_bar) << ',' << cell(r.gamma_bar) << ',' << cell(r.acc_pred) << ','
            << cell(r.acc_emp) << ',' << cell(r.alpha_emp) << ',' << cell(r.sigma_emp) << ','
            << cell(r.residual_max) << ',' << r.seed << '\n';
    }
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

void write_sweep_summary(const std::filesystem::path& path, const SweepResult& result) {
    const SweepSummary& s = result.summary;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("grid_points", std::to_string(s.mean_acc_pred.size()));
    kv.emplace_back("rows", std::to_string(result.rows.size()));
    kv.emplace_back("failed_rows", std::to_string(s.failed_rows));
    kv.emplace_back("spearman", cell(s.spearman));
    kv.emplace_back("pearson", cell(s.pearson));
    io::write_key_values(path, kv);
}

}  // namespace raptor
