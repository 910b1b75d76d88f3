#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace raptor {

/// Gauss-Hermite rule for the standard normal weight: sum_k w_k f(z_k)
/// approximates E[f(Z)], Z ~ N(0,1). Weights sum to one.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached per node count; the returned reference stays valid for the life of
/// the process and may be shared across threads.
const GaussHermiteRule& gauss_hermite(std::size_t nodes);

double gaussian_expectation(const std::function<double(double)>& f, std::size_t nodes = 200);

/// E[f(Z1, Z2)] for independent standard normals, tensor-product rule.
double gaussian_expectation_2d(const std::function<double(double, double)>& f,
                               std::size_t nodes = 80);

}  // namespace raptor
