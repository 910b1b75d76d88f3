#include "core/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace raptor {

namespace {

void check_problem(const Matrix& x, const Vector& y, double lambda) {
    require(x.rows() == y.size(), ErrorCode::DimensionMismatch, "rows of x and labels differ");
    require(x.rows() > 0 && x.cols() > 0, ErrorCode::InvalidArgument, "empty design matrix");
    require(lambda > 0.0 && std::isfinite(lambda), ErrorCode::InvalidArgument,
            "lambda must be positive and finite");
    require(x.allFinite(), ErrorCode::InvalidArgument, "non-finite design entry");
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        require(y[i] == 1.0 || y[i] == -1.0, ErrorCode::InvalidArgument,
                "signed labels must be +1 or -1");
        (y[i] > 0 ? pos : neg) = true;
    }
    require(pos && neg, ErrorCode::SingleClass, "both classes are required to fit");
}

double mean_loss(const Vector& margins) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) acc += softplus(-margins[i]);
    return acc / static_cast<double>(margins.size());
}

/// Newton system for the current curvature weights d_i = s_i (1 - s_i) / n.
/// Solves H step = rhs where H = [[lambda I + X' D X, X' d], [d' X, sum d]].
class NewtonSystem {
public:
    NewtonSystem(const Matrix& x, double lambda, bool intercept)
        : x_(x), lambda_(lambda), intercept_(intercept), dual_(x.cols() > x.rows()) {
        if (dual_) gram_ = x_ * x_.transpose();
    }

    void solve(const Vector& d, const Vector& rhs_w, double rhs_b, Vector& step_w,
               double& step_b) {
        factor(d);
        step_w = apply_inverse(rhs_w);
        step_b = 0.0;
        if (!intercept_) return;
        const Vector c = x_.transpose() * d;
        const Vector q = apply_inverse(c);
        double schur = d.sum() - c.dot(q);
        schur = std::max(schur, 1e-300);
        step_b = (rhs_b - c.dot(step_w)) / schur;
        step_w -= q * step_b;
    }

private:
    void factor(const Vector& d) {
        sqrt_d_ = d.cwiseSqrt();
        if (dual_) {
            Eigen::MatrixXd m = sqrt_d_.asDiagonal() * gram_ * sqrt_d_.asDiagonal();
            m.diagonal().array() += lambda_;
            llt_.compute(m);
        } else {
            const Matrix xs = sqrt_d_.asDiagonal() * x_;
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(x_.cols(), x_.cols());
            a.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
            a.diagonal().array() += lambda_;
            llt_.compute(a);
        }
    }

    // (lambda I + X' D X)^{-1} r, directly or through Woodbury.
    Vector apply_inverse(const Vector& r) const {
        if (!dual_) return llt_.solve(r);
        const Vector inner = sqrt_d_.cwiseProduct(x_ * r);
        const Vector back = sqrt_d_.cwiseProduct(llt_.solve(inner));
        return (r - x_.transpose() * back) / lambda_;
    }

    const Matrix& x_;
    double lambda_;
    bool intercept_;
    bool dual_;
    Eigen::MatrixXd gram_;
    Vector sqrt_d_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace

double ridge_logistic_objective(const Matrix& x, const Vector& y_signed, const Vector& w,
                                double b, double lambda) {
    const Vector margins = (y_signed.array() * ((x * w).array() + b)).matrix();
    return mean_loss(margins) + 0.5 * lambda * w.squaredNorm();
}

Vector ridge_logistic_gradient(const Matrix& x, const Vector& y_signed, const Vector& w, double b,
                               double lambda) {
    const auto n = static_cast<double>(x.rows());
    const Vector margins = (y_signed.array() * ((x * w).array() + b)).matrix();
    Vector r(margins.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = -y_signed[i] * sigmoid(-margins[i]) / n;
    Vector g(w.size() + 1);
    g.head(w.size()) = x.transpose() * r + lambda * w;
    g[w.size()] = r.sum();
    return g;
}

FitResult fit_ridge_logistic(const Matrix& x, const Vector& y_signed, double lambda,
                             const FitOptions& opts, const std::optional<FitStart>& start) {
    check_problem(x, y_signed, lambda);
    require(opts.tol > 0.0 && opts.max_iter > 0, ErrorCode::InvalidArgument,
            "fit options need tol > 0 and max_iter > 0");
    const auto n = x.rows();
    const auto p = x.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    FitResult res;
    res.w = Vector::Zero(p);
    res.b = 0.0;
    if (start) {
        require(start->w.size() == p, ErrorCode::DimensionMismatch, "warm start has wrong size");
        res.w = start->w;
        res.b = opts.fit_intercept ? start->b : 0.0;
    }

    NewtonSystem system(x, lambda, opts.fit_intercept);
    Vector xw = x * res.w;
    Vector margins(n), resid(n), curv(n);
    Vector step_w;
    double step_b = 0.0;

    for (int iter = 0;; ++iter) {
        margins = y_signed.cwiseProduct((xw.array() + res.b).matrix());
        res.objective = mean_loss(margins) + 0.5 * lambda * res.w.squaredNorm();
        res.objective_trace.push_back(res.objective);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = sigmoid(-margins[i]);  // 1 - sigmoid(margin)
            resid[i] = -y_signed[i] * s * inv_n;
            curv[i] = s * (1.0 - s) * inv_n;
        }
        const Vector grad_w = x.transpose() * resid + lambda * res.w;
        const double grad_b = opts.fit_intercept ? resid.sum() : 0.0;
        res.grad_inf_norm = std::max(grad_w.lpNorm<Eigen::Infinity>(), std::abs(grad_b));
        res.iterations = iter;
        if (res.grad_inf_norm <= opts.tol) return res;
        if (iter >= opts.max_iter) break;

        system.solve(curv, grad_w, grad_b, step_w, step_b);
        const double decrement = grad_w.dot(step_w) + grad_b * step_b;
        const Vector x_step = x * step_w;

        // Backtracking on the objective. Near the optimum the predicted
        // decrease falls below rounding noise and the full step is taken.
        double t = 1.0;
        const bool rounding_regime = decrement <= 1e-14 * (1.0 + std::abs(res.objective));
        if (!rounding_regime) {
            for (int k = 0; k < 60; ++k) {
                const Vector trial_w = res.w - t * step_w;
                const double trial_b = res.b - t * step_b;
                const Vector trial_m =
                    y_signed.cwiseProduct(((xw - t * x_step).array() + trial_b).matrix());
                const double f = mean_loss(trial_m) + 0.5 * lambda * trial_w.squaredNorm();
                if (f <= res.objective - 1e-4 * t * decrement) break;
                t *= 0.5;
            }
        }
        res.w -= t * step_w;
        res.b -= t * step_b;
        xw -= t * x_step;
    }

    std::ostringstream msg;
    msg << "ridge logistic fit did not converge in " << opts.max_iter
        << " iterations (|grad|_inf = " << res.grad_inf_norm << ", tol = " << opts.tol << ")";
    throw FitNonConvergence(msg.str(), res);
}

double linear_accuracy(const Matrix& x, const Vector& y_signed, const Vector& w, double b) {
    require(x.rows() == y_signed.size(), ErrorCode::DimensionMismatch,
            "rows of x and labels differ");
    require(x.cols() == w.size(), ErrorCode::DimensionMismatch, "weight dimension mismatch");
    if (x.rows() == 0) return std::numeric_limits<double>::quiet_NaN();
    const Vector logits = (x * w).array() + b;
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        const double pred = logits[i] >= 0.0 ? 1.0 : -1.0;
        if (pred == y_signed[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

std::vector<double> c_grid(double c_lo, double c_hi, std::size_t count, bool log_spaced) {
    require(count >= 1, ErrorCode::EmptyGrid, "grid needs at least one point");
    require(c_lo > 0.0 && c_hi >= c_lo, ErrorCode::InvalidArgument,
            "grid bounds must satisfy 0 < lo <= hi");
    std::vector<double> lambdas(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        const double c = log_spaced
                             ? std::pow(10.0, std::log10(c_lo) + frac * (std::log10(c_hi) - std::log10(c_lo)))
                             : c_lo + frac * (c_hi - c_lo);
        lambdas[k] = 1.0 / c;
    }
    return lambdas;
}

std::vector<double> default_lambda_grid() { return c_grid(1e-4, 1e2, 100, true); }

std::vector<double> parse_grid_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    require(parts.size() == 4, ErrorCode::InvalidArgument,
            "grid spec must look like lo:hi:count:log|lin, got '" + spec + "'");
    try {
        std::size_t used = 0;
        const double lo = std::stod(parts[0], &used);
        require(used == parts[0].size(), ErrorCode::InvalidArgument, "bad grid lower bound");
        const double hi = std::stod(parts[1], &used);
        require(used == parts[1].size(), ErrorCode::InvalidArgument, "bad grid upper bound");
        const long count = std::stol(parts[2], &used);
        require(used == parts[2].size() && count >= 1, ErrorCode::InvalidArgument,
                "bad grid count");
        require(parts[3] == "log" || parts[3] == "lin", ErrorCode::InvalidArgument,
                "grid spacing must be 'log' or 'lin'");
        return c_grid(lo, hi, static_cast<std::size_t>(count), parts[3] == "log");
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::InvalidArgument, "unparsable grid spec '" + spec + "'");
    }
}

TuneResult tune_lambda(const Matrix& x_tr, const Vector& y_tr, const Matrix& x_val,
                       const Vector& y_val, const std::vector<double>& grid,
                       const TuneOptions& opts) {
    require(!grid.empty(), ErrorCode::EmptyGrid, "lambda grid is empty");
    require(x_val.rows() > 0, ErrorCode::InvalidArgument, "validation set is empty");
    require(x_tr.cols() == x_val.cols(), ErrorCode::DimensionMismatch,
            "train and validation dimensions differ");

    TuneResult out;
    out.grid = grid;
    out.val_accuracy.reserve(grid.size());
    double best = -std::numeric_limits<double>::infinity();
    std::optional<FitStart> start;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const FitResult fit = fit_ridge_logistic(x_tr, y_tr, grid[k], opts.fit, start);
        const double acc = linear_accuracy(x_val, y_val, fit.w, fit.b);
        out.val_accuracy.push_back(acc);
        if (acc > best) {
            best = acc;
            out.best_index = k;
            out.lambda_star = grid[k];
        }
        if (opts.warm_start) start = FitStart{fit.w, fit.b};
    }
    return out;
}

ProbeModel::ProbeModel(Vector w_std, double b_std, Vector omega, double b_orig, double lambda)
    : w_std_(std::move(w_std)), b_std_(b_std), omega_(std::move(omega)), b_orig_(b_orig),
      lambda_(lambda) {
    require(lambda_ > 0.0, ErrorCode::InvalidArgument, "probe lambda must be positive");
    require(w_std_.size() == omega_.size(), ErrorCode::DimensionMismatch,
            "w_std and omega differ in length");
    const double norm = omega_.norm();
    if (norm > 0.0 && std::isfinite(norm)) direction_ = omega_ / norm;
}

const Vector& ProbeModel::direction() const {
    if (!direction_) throw Error(ErrorCode::ZeroWeightVector, "probe weight vector is zero");
    return *direction_;
}

double ProbeModel::logit(const Eigen::Ref<const Vector>& h) const {
    require(h.size() == omega_.size(), ErrorCode::DimensionMismatch,
            "hidden state dimension does not match probe");
    return omega_.dot(h) + b_orig_;
}

ProbeModel fold_back(const Vector& w_std, double b_std, const Standardizer& std, double lambda) {
    require(static_cast<std::size_t>(w_std.size()) == std.dim(), ErrorCode::DimensionMismatch,
            "weights and standardizer differ in dimension");
    const Vector denom = std.s.cwiseMax(1.0);
    Vector omega = w_std.cwiseQuotient(denom);
    const double b_orig = b_std - omega.dot(std.mu);
    return ProbeModel(w_std, b_std, std::move(omega), b_orig, lambda);
}

ProbeModel refit_and_fold(const Matrix& x_full, const Vector& y_full, double lambda_star,
                          const Standardizer& std, const FitOptions& opts) {
    const FitResult fit = fit_ridge_logistic(x_full, y_full, lambda_star, opts);
    return fold_back(fit.w, fit.b, std, lambda_star);
}

double probe_accuracy(const ProbeModel& model, const Matrix& features_native,
                      std::span<const int> labels) {
    require(static_cast<std::size_t>(features_native.rows()) == labels.size(),
            ErrorCode::DimensionMismatch, "feature rows and label count differ");
    require(static_cast<std::size_t>(features_native.cols()) == model.dim(),
            ErrorCode::DimensionMismatch, "feature dimension does not match probe");
    return linear_accuracy(features_native, to_signed(labels), model.omega(), model.b_orig());
}

RaptorResult run_raptor(const EmbeddingDataset& data, const SplitIndices& split,
                        const RaptorOptions& opts) {
    require(!split.train.empty(), ErrorCode::InvalidArgument, "empty training split");
    const Matrix& h = data.features();
    const Standardizer standardizer = fit_standardizer(h, split.train);

    const auto y_tr_raw = select(data.labels(), split.train);
    const Matrix x_tr = apply_standardizer(standardizer, select_rows(h, split.train));
    const Vector y_tr = to_signed(y_tr_raw);

    std::optional<TuneResult> tuning;
    double lambda_star = 1.0;
    double val_acc = std::numeric_limits<double>::quiet_NaN();
    IndexSet full_idx = split.train;
    if (!split.val.empty() && has_both_classes(y_tr_raw)) {
        const Matrix x_val = apply_standardizer(standardizer, select_rows(h, split.val));
        const Vector y_val = to_signed(select(data.labels(), split.val));
        tuning = tune_lambda(x_tr, y_tr, x_val, y_val, opts.grid, opts.tune);
        lambda_star = tuning->lambda_star;
        val_acc = tuning->val_accuracy[tuning->best_index];
        full_idx.insert(full_idx.end(), split.val.begin(), split.val.end());
        // Row order of the refit block is canonical so that the same index
        // set always yields bit-identical parameters.
        std::sort(full_idx.begin(), full_idx.end());
    }

    const Matrix x_full = apply_standardizer(standardizer, select_rows(h, full_idx));
    const Vector y_full = to_signed(select(data.labels(), full_idx));
    const FitResult fit = fit_ridge_logistic(x_full, y_full, lambda_star, opts.tune.fit);

    double test_acc = std::numeric_limits<double>::quiet_NaN();
    if (!split.test.empty()) {
        const Matrix x_te = apply_standardizer(standardizer, select_rows(h, split.test));
        test_acc = linear_accuracy(x_te, to_signed(select(data.labels(), split.test)), fit.w,
                                   fit.b);
    }
    return RaptorResult{fold_back(fit.w, fit.b, standardizer, lambda_star), standardizer,
                        std::move(tuning), val_acc, test_acc};
}

PerceptronResult perceptron_separability(const Matrix& x, const Vector& y_signed,
                                         int max_epochs) {
    require(x.rows() == y_signed.size(), ErrorCode::DimensionMismatch,
            "rows of x and labels differ");
    require(max_epochs >= 1, ErrorCode::InvalidArgument, "max_epochs must be >= 1");
    Vector w = Vector::Zero(x.cols());
    double b = 0.0;
    for (int epoch = 1; epoch <= max_epochs; ++epoch) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (y_signed[i] * (x.row(i).dot(w) + b) <= 0.0) {
                w += y_signed[i] * x.row(i).transpose();
                b += y_signed[i];
            }
        }
        bool clean = true;
        for (Eigen::Index i = 0; i < x.rows() && clean; ++i)
            clean = y_signed[i] * (x.row(i).dot(w) + b) > 0.0;
        if (clean) return {Separability::Separable, epoch};
    }
    return {Separability::Undetermined, max_epochs};
}

}  // namespace raptor
