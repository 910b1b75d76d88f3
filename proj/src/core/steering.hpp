#pragma once

#include <map>
#include <optional>
#include <vector>

#include "core/probe.hpp"

namespace raptor {

enum class SteerMode { Towards, Away };

enum class SkipReason { LowAccuracy, MisalignedDirection };

const char* skip_reason_name(SkipReason r) noexcept;

struct SteeringConfig {
    double target_prob = 0.9999;
    SteerMode mode = SteerMode::Towards;
    std::optional<double> reliability_threshold;  ///< tau; no filtering when unset
    std::vector<std::uint32_t> layers;            ///< steered in increasing order

    /// Checks target side against mode and tau range.
    void validate() const;
    double target_logit() const { return logit(target_prob); }
};

/// Slack on the probability target. Steering lands on the target logit up to
/// rounding, so region checks accept post_prob within this distance.
inline constexpr double kTargetSlack = 1e-9;

/// Whether `prob` already lies in the target extreme region.
bool in_target_region(double prob, const SteeringConfig& cfg);

/// Minimal GCAV strength moving the probe logit to logit(target_prob) along
/// `direction` (the probe's own unit direction when omitted). Clamped at 0 on
/// the side that already satisfies the target. Throws MisalignedDirection
/// when omega.direction <= 0.
double gcav_alpha(const ProbeModel& probe, const Eigen::Ref<const Vector>& h,
                  const SteeringConfig& cfg,
                  const std::optional<Vector>& direction = std::nullopt);

struct SteeringOutcome {
    std::uint32_t layer_id = 0;
    std::size_t prompt = 0;
    double alpha = 0.0;
    bool intervened = false;
    double pre_prob = 0.0;
    double post_prob = 0.0;
    std::optional<SkipReason> skipped_reason;
};

struct LayerProbe {
    ProbeModel probe;
    double test_accuracy = 1.0;
};

/// One prompt, layers steered independently on the supplied hidden states.
std::vector<SteeringOutcome> steer_layerwise(const std::map<std::uint32_t, LayerProbe>& probes,
                                             const std::map<std::uint32_t, Vector>& hiddens,
                                             const SteeringConfig& cfg, std::size_t prompt = 0);

/// Every prompt (row) of per-layer hidden-state matrices; prompt-major order.
std::vector<SteeringOutcome> steer_batch(const std::map<std::uint32_t, LayerProbe>& probes,
                                         const std::map<std::uint32_t, Matrix>& hiddens,
                                         const SteeringConfig& cfg);

struct SteeringReport {
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    double success_rate = 0.0;
    double intervention_rate = 0.0;
    double alpha_median = 0.0;
    double alpha_p90 = 0.0;
    double alpha_max = 0.0;
};

SteeringReport summarize_steering(const std::vector<SteeringOutcome>& outcomes,
                                  const SteeringConfig& cfg);

}  // namespace raptor
