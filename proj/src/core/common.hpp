#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace raptor {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Failure classes surfaced by the library. The C API maps each one to a
/// distinct status code, so keep the two lists in sync.
enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    InsufficientClassCount,
    SingleClass,
    NonConvergence,
    ZeroWeightVector,
    EmptyGrid,
    MisalignedDirection,
    MissingLayer,
    EmptyEvaluationSet,
    NotUnitNorm,
    DegenerateAblation,
    InvalidRegime,
    DegenerateZeroEstimator,
    EmptyOracleSamples,
    Io,
    Format,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) throw Error(code, msg);
}

// Numerically stable logistic helpers.

inline double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

/// log(1 + e^t)
inline double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// Round half away from zero for non-negative inputs; the small epsilon keeps
/// products such as 25 * 0.1 from landing just under the .5 boundary.
inline long round_half_up(double x) { return static_cast<long>(std::floor(x + 0.5 + 1e-9)); }

}  // namespace raptor
