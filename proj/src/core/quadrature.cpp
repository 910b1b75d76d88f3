#include "core/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "core/common.hpp"

namespace raptor {

namespace {

// Orthonormal probabilists' Hermite recurrence at x:
// q_{k+1} = (x q_k - sqrt(k) q_{k-1}) / sqrt(k+1). Returns q_n, q_{n-1} and
// the Christoffel sum sum_{k<n} q_k^2.
// Far-tail nodes overflow the recurrence, so values are rescaled on the fly
// and the Christoffel sum is kept as a logarithm.
struct HermiteEval {
    double qn;
    double qn1;
    double log_christoffel;
};

HermiteEval eval_orthonormal(std::size_t n, double x) {
    constexpr double kBig = 1e100;
    double prev = 0.0, cur = 1.0, sum = 0.0, log_scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sum += cur * cur;
        const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                            std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
        if (std::abs(cur) > kBig) {
            cur /= kBig;
            prev /= kBig;
            sum /= kBig * kBig;
            log_scale += 2.0 * std::log(kBig);
        }
    }
    return {cur, prev, std::log(sum) + log_scale};
}

GaussHermiteRule build_rule(std::size_t n) {
    // Golub-Welsch on the symmetric Jacobi matrix for the N(0,1) weight.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k) {
        const double off = std::sqrt(static_cast<double>(k));
        jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = off;
        jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);
    std::vector<double> x(eig.eigenvalues().data(), eig.eigenvalues().data() + n);

    // Newton polish on q_n (q_n' = sqrt(n) q_{n-1}), then symmetrize.
    for (double& xi : x) {
        for (int it = 0; it < 3; ++it) {
            const auto e = eval_orthonormal(n, xi);
            xi -= e.qn / (std::sqrt(static_cast<double>(n)) * e.qn1);
        }
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double m = 0.5 * (x[n - 1 - k] - x[k]);
        x[k] = -m;
        x[n - 1 - k] = m;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;

    GaussHermiteRule rule;
    rule.nodes = x;
    rule.weights.resize(n);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        rule.weights[k] = std::exp(-eval_orthonormal(n, x[k]).log_christoffel);
        total += rule.weights[k];
    }
    for (double& w : rule.weights) w /= total;
    return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(std::size_t nodes) {
    require(nodes >= 1, ErrorCode::InvalidArgument, "quadrature needs at least one node");
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<GaussHermiteRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[nodes];
    if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(nodes));
    return *slot;
}

double gaussian_expectation(const std::function<double(double)>& f, std::size_t nodes) {
    const auto& rule = gauss_hermite(nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * f(rule.nodes[k]);
    return acc;
}

double gaussian_expectation_2d(const std::function<double(double, double)>& f,
                               std::size_t nodes) {
    const auto& rule = gauss_hermite(nodes);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j)
            inner += rule.weights[j] * f(rule.nodes[i], rule.nodes[j]);
        acc += rule.weights[i] * inner;
    }
    return acc;
}

}  // namespace raptor
