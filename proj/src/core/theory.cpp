#include "core/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "core/quadrature.hpp"
#include "core/rng.hpp"

namespace raptor {

namespace {

constexpr double kUpper = 40.0;

double integrate_half_line(const std::function<double(double)>& f, double split) {
    using boost::math::quadrature::gauss_kronrod;
    const double b1 = std::clamp(split, 1e-6, kUpper);
    double total = gauss_kronrod<double, 61>::integrate(f, 0.0, b1, 15, 1e-13);
    if (b1 < kUpper) total += gauss_kronrod<double, 61>::integrate(f, b1, kUpper, 15, 1e-13);
    return total;
}

double std_normal_pdf(double z) {
    constexpr double kInvSqrt2Pi = 0.39894228040143267794;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

using Theta = Eigen::Vector3d;

struct Evaluator {
    const RegimeParams& params;
    std::size_t nodes;

    Eigen::Vector3d operator()(const Theta& t) const {
        const auto r = fixed_point_residuals(params, t[0], std::exp(t[1]), std::exp(t[2]), nodes);
        return {r[0], r[1], r[2]};
    }
};

bool all_finite(const Eigen::Vector3d& v) { return v.allFinite(); }

/// Newton from one start. Returns the converged point or nothing; `last`
/// receives the final iterate either way.
std::optional<Theta> newton_from(const Evaluator& eval, Theta theta, const FixedPointOptions& opts,
                                 std::array<double, 4>& last) {
    Eigen::Vector3d r = eval(theta);
    const auto record = [&] {
        last = {theta[0], std::exp(theta[1]), std::exp(theta[2]),
                all_finite(r) ? r.cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity()};
    };
    struct Recorder {
        decltype(record)& f;
        ~Recorder() { f(); }
    } recorder{record};
    if (!all_finite(r)) return std::nullopt;
    for (int it = 0; it < opts.max_iter; ++it) {
        if (r.cwiseAbs().maxCoeff() <= opts.tol) return theta;
        Eigen::Matrix3d jac;
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(theta[j]));
            Theta tp = theta;
            tp[j] += h;
            const Eigen::Vector3d rp = eval(tp);
            if (!all_finite(rp)) return std::nullopt;
            jac.col(j) = (rp - r) / h;
        }
        const Eigen::FullPivLU<Eigen::Matrix3d> lu(jac);
        if (!lu.isInvertible()) return std::nullopt;
        Eigen::Vector3d step = -lu.solve(r);
        if (!step.allFinite()) return std::nullopt;

        double scale = 1.0;
        scale = std::min(scale, (1.0 + std::abs(theta[0])) / std::max(std::abs(step[0]), 1e-300));
        scale = std::min(scale, 1.5 / std::max(std::abs(step[1]), 1e-300));
        scale = std::min(scale, 1.5 / std::max(std::abs(step[2]), 1e-300));
        step *= scale;

        const double f0 = r.squaredNorm();
        bool accepted = false;
        double t = 1.0;
        for (int k = 0; k < 40; ++k, t *= 0.5) {
            const Theta cand = theta + t * step;
            const Eigen::Vector3d rc = eval(cand);
            if (all_finite(rc) && rc.squaredNorm() < (1.0 - 1e-4 * t) * f0) {
                theta = cand;
                r = rc;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Newton has stalled at the resolution of the quadrature.
            if (r.cwiseAbs().maxCoeff() <= 10.0 * opts.tol) return theta;
            return std::nullopt;
        }
    }
    if (r.cwiseAbs().maxCoeff() <= opts.tol) return theta;
    return std::nullopt;
}

bool same_solution(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    for (int i = 0; i < 3; ++i)
        if (std::abs(a[i] - b[i]) > 1e-6 * std::max(1.0, std::abs(a[i]))) return false;
    return true;
}

}  // namespace

void RegimeParams::validate() const {
    require(std::isfinite(delta) && delta > 0.0, ErrorCode::InvalidRegime, "delta must be positive");
    require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::InvalidRegime,
            "lambda must be positive");
    require(std::isfinite(kappa) && kappa >= 0.0, ErrorCode::InvalidRegime,
            "kappa must be non-negative");
}

double logistic_prox(double u, double gamma) {
    require(std::isfinite(u), ErrorCode::InvalidArgument, "prox argument must be finite");
    require(std::isfinite(gamma) && gamma > 0.0, ErrorCode::InvalidArgument,
            "prox parameter must be positive");
    // f(eta) = eta + gamma s(eta) - u is increasing, f(u - gamma) <= 0 <= f(u).
    double lo = u - gamma, hi = u;
    double eta = std::clamp(u - gamma * sigmoid(u), lo, hi);
    double prev_abs_f = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 400; ++it) {
        const double s = sigmoid(eta);
        const double f = eta + gamma * s - u;
        if (f == 0.0) return eta;
        if (f < 0.0) lo = eta; else hi = eta;
        double next = eta - f / (1.0 + gamma * s * (1.0 - s));
        // Fall back to bisection when Newton leaves the bracket or stalls.
        if (!(next > lo && next < hi) || std::abs(f) > 0.5 * prev_abs_f) next = 0.5 * (lo + hi);
        prev_abs_f = std::abs(f);
        const double eps = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(eta));
        if (std::abs(next - eta) <= eps || hi - lo <= eps) return next;
        eta = next;
    }
    return eta;
}

std::array<double, 3> fixed_point_residuals(const RegimeParams& params, double alpha,
                                            double sigma, double gamma,
                                            std::size_t quad_nodes) {
    params.validate();
    require(sigma > 0.0 && gamma > 0.0, ErrorCode::InvalidArgument,
            "sigma and gamma must be positive");
    const GaussHermiteRule& rule = gauss_hermite(quad_nodes);
    const double k = params.kappa;
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double z1 = rule.nodes[i];
        const double sm = sigmoid(-k * z1);
        double in1 = 0.0, in3 = 0.0, in2 = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double v = alpha * z1 + sigma * rule.nodes[j];
            const double eta = logistic_prox(v, gamma);
            const double se = sigmoid(eta);
            const double w = rule.weights[j];
            in1 += w * (v - eta) * (v - eta);
            in2 += w * eta;
            in3 += w / (1.0 + gamma * se * (1.0 - se));
        }
        const double wi = rule.weights[i];
        e1 += wi * sm * in1;
        e2 += wi * sm * (1.0 - sm) * in2;
        e3 += wi * 2.0 * sm * in3;
    }
    const double d = params.delta;
    return {2.0 * d / (sigma * sigma) * e1 - 1.0, alpha / d + 2.0 * k * e2,
            e3 - (1.0 - 1.0 / d + gamma * params.lambda)};
}

std::array<double, 3> fixed_point_residuals_mc(const RegimeParams& params, double alpha,
                                               double sigma, double gamma, std::size_t samples,
                                               std::uint64_t seed) {
    params.validate();
    require(sigma > 0.0 && gamma > 0.0, ErrorCode::InvalidArgument,
            "sigma and gamma must be positive");
    require(samples > 0, ErrorCode::InvalidArgument, "need at least one sample");
    Rng rng(seed);
    const double k = params.kappa;
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        const double sm = sigmoid(-k * z1);
        const double v = alpha * z1 + sigma * z2;
        const double eta = logistic_prox(v, gamma);
        const double se = sigmoid(eta);
        e1 += sm * (v - eta) * (v - eta);
        e2 += sm * (1.0 - sm) * eta;
        e3 += 2.0 * sm / (1.0 + gamma * se * (1.0 - se));
    }
    const auto n = static_cast<double>(samples);
    const double d = params.delta;
    return {2.0 * d / (sigma * sigma) * e1 / n - 1.0, alpha / d + 2.0 * k * e2 / n,
            e3 / n - (1.0 - 1.0 / d + gamma * params.lambda)};
}

double FixedPointSolution::residual_max() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, std::abs(r));
    return m;
}

FixedPointSolution solve_fixed_point(const RegimeParams& params, const FixedPointOptions& opts) {
    params.validate();
    require(opts.tol > 0.0 && opts.max_iter > 0, ErrorCode::InvalidArgument,
            "solver tolerance and iteration budget must be positive");
    require(opts.quad_nodes >= 8, ErrorCode::InvalidArgument, "need at least 8 quadrature nodes");

    std::vector<std::array<double, 3>> starts;
    if (opts.init) {
        const auto& s = *opts.init;
        require(s[1] > 0.0 && s[2] > 0.0, ErrorCode::InvalidArgument,
                "initial sigma and gamma must be positive");
        starts.push_back(s);
    }
    const double k = params.kappa;
    for (double sigma : {1.0, 0.1})
        for (double gamma : {1.0, 10.0, 0.1})
            for (double alpha : {k, 0.0}) starts.push_back({alpha, sigma, gamma});
    for (double gamma : {100.0, 1000.0}) starts.push_back({0.5 * k, 2.0, gamma});

    const Evaluator eval{params, opts.quad_nodes};
    std::vector<std::array<double, 3>> found;
    std::vector<std::array<double, 4>> trace;
    for (const auto& s : starts) {
        std::array<double, 4> last{};
        const auto theta =
            newton_from(eval, Theta{s[0], std::log(s[1]), std::log(s[2])}, opts, last);
        trace.push_back(last);
        if (!theta) continue;
        const std::array<double, 3> sol{(*theta)[0], std::exp((*theta)[1]), std::exp((*theta)[2])};
        if (std::none_of(found.begin(), found.end(),
                         [&](const auto& f) { return same_solution(f, sol); }))
            found.push_back(sol);
        if (!opts.explore_all && (k == 0.0 || sol[0] >= 0.0)) break;
    }
    if (found.empty())
        throw FixedPointNonConvergence(
            "fixed-point solver failed from every starting point (delta=" +
                std::to_string(params.delta) + ", lambda=" + std::to_string(params.lambda) +
                ", kappa=" + std::to_string(k) + ")",
            std::move(trace));

    // Prefer the branch with a non-negative teacher component.
    const auto primary = std::find_if(found.begin(), found.end(),
                                      [&](const auto& f) { return k == 0.0 || f[0] >= 0.0; });
    if (primary == found.end())
        throw Error(ErrorCode::InvalidRegime,
                    "only solutions with negative teacher alignment were found");

    FixedPointSolution sol;
    sol.alpha_bar = (*primary)[0];
    sol.sigma_bar = (*primary)[1];
    sol.gamma_bar = (*primary)[2];
    sol.residuals = fixed_point_residuals(params, sol.alpha_bar, sol.sigma_bar, sol.gamma_bar,
                                          opts.quad_nodes);
    sol.params = params;
    sol.quad_nodes = opts.quad_nodes;
    for (auto it = found.begin(); it != found.end(); ++it)
        if (it != primary) sol.alternatives.push_back(*it);
    return sol;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double accuracy_from_margin(double margin, double kappa) {
    require(std::isfinite(margin), ErrorCode::InvalidArgument, "margin must be finite");
    require(std::isfinite(kappa) && kappa >= 0.0, ErrorCode::InvalidArgument,
            "kappa must be non-negative");
    if (margin == 0.0 || kappa == 0.0) return 0.5;
    // The integrand is even in z; fold onto the half-line.
    const auto f = [&](double z) {
        return (sigmoid(-kappa * z) + std::tanh(0.5 * kappa * z) * normal_cdf(margin * z)) *
               std_normal_pdf(z);
    };
    return 2.0 * integrate_half_line(f, 10.0 / std::abs(margin));
}

double asymptotic_accuracy(const FixedPointSolution& sol) {
    return accuracy_from_margin(sol.margin(), sol.params.kappa);
}

double bayes_ceiling(double kappa) {
    require(std::isfinite(kappa) && kappa >= 0.0, ErrorCode::InvalidArgument,
            "kappa must be non-negative");
    if (kappa == 0.0) return 0.5;
    const auto f = [&](double z) { return sigmoid(kappa * z) * std_normal_pdf(z); };
    return 2.0 * integrate_half_line(f, 10.0 / kappa);
}

StabilityPrediction stability_prediction(double alpha, double sigma) {
    require(std::isfinite(alpha) && std::isfinite(sigma) && sigma >= 0.0,
            ErrorCode::InvalidArgument, "order parameters must be finite");
    const double norm2 = alpha * alpha + sigma * sigma;
    require(norm2 > 0.0, ErrorCode::DegenerateZeroEstimator,
            "estimator has zero norm; stability is undefined");
    return {alpha * alpha / norm2, alpha / std::sqrt(norm2)};
}

StabilityPrediction stability_prediction(const FixedPointSolution& sol) {
    return stability_prediction(sol.alpha_bar, sol.sigma_bar);
}

CalibrationParams fit_calibration(std::span<const double> probe_scores,
                                  std::span<const double> oracle_scores, double delta) {
    require(probe_scores.size() == oracle_scores.size(), ErrorCode::DimensionMismatch,
            "score vectors differ in length");
    require(!oracle_scores.empty(), ErrorCode::EmptyOracleSamples, "no oracle samples");
    require(oracle_scores.size() >= 2, ErrorCode::InvalidArgument,
            "calibration needs at least two samples");
    const auto n = static_cast<double>(oracle_scores.size());
    double mu_u = 0.0, mu_s = 0.0;
    for (std::size_t i = 0; i < oracle_scores.size(); ++i) {
        mu_u += oracle_scores[i];
        mu_s += probe_scores[i];
    }
    mu_u /= n;
    mu_s /= n;
    double suu = 0.0, sus = 0.0;
    for (std::size_t i = 0; i < oracle_scores.size(); ++i) {
        suu += (oracle_scores[i] - mu_u) * (oracle_scores[i] - mu_u);
        sus += (oracle_scores[i] - mu_u) * (probe_scores[i] - mu_s);
    }
    require(suu > 0.0, ErrorCode::InvalidArgument, "oracle scores are constant");
    CalibrationParams cal;
    cal.slope_a = sus / suu;
    cal.intercept_b = mu_s - cal.slope_a * mu_u;
    double rss = 0.0;
    for (std::size_t i = 0; i < oracle_scores.size(); ++i) {
        const double e = probe_scores[i] - cal.slope_a * oracle_scores[i] - cal.intercept_b;
        rss += e * e;
    }
    cal.residual_scale = std::max(kResidualFloor, std::sqrt(rss / n));
    cal.delta = delta;
    return cal;
}

double structure_predictor(const CalibrationParams& cal, std::span<const double> oracle_scores,
                           std::optional<std::span<const double>> p_plus) {
    require(!oracle_scores.empty(), ErrorCode::EmptyOracleSamples, "no oracle samples");
    if (p_plus)
        require(p_plus->size() == oracle_scores.size(), ErrorCode::DimensionMismatch,
                "calibrated probabilities differ in length from oracle scores");
    const double scale = std::max(kResidualFloor, cal.residual_scale);
    double total = 0.0;
    for (std::size_t i = 0; i < oracle_scores.size(); ++i) {
        const double u = oracle_scores[i];
        const double p = p_plus ? (*p_plus)[i] : sigmoid(u);
        const double phi = normal_cdf((cal.slope_a * u + cal.intercept_b) / scale);
        total += p * phi + (1.0 - p) * (1.0 - phi);
    }
    return total / static_cast<double>(oracle_scores.size());
}

}  // namespace raptor
