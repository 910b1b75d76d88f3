#include "core/steering.hpp"

#include <algorithm>
#include <cmath>

#include "core/stats.hpp"

namespace raptor {

const char* skip_reason_name(SkipReason r) noexcept {
    switch (r) {
        case SkipReason::LowAccuracy: return "low_accuracy";
        case SkipReason::MisalignedDirection: return "misaligned_direction";
    }
    return "unknown";
}

void SteeringConfig::validate() const {
    require(target_prob > 0.0 && target_prob < 1.0, ErrorCode::InvalidArgument,
            "target probability must lie in (0,1)");
    if (mode == SteerMode::Towards)
        require(target_prob > 0.5, ErrorCode::InvalidArgument,
                "towards steering needs target_prob > 0.5");
    else
        require(target_prob < 0.5, ErrorCode::InvalidArgument,
                "away steering needs target_prob < 0.5");
    if (reliability_threshold)
        require(*reliability_threshold >= 0.0 && *reliability_threshold <= 1.0,
                ErrorCode::InvalidArgument, "tau must lie in [0,1]");
}

bool in_target_region(double prob, const SteeringConfig& cfg) {
    return cfg.mode == SteerMode::Towards ? prob >= cfg.target_prob - kTargetSlack
                                          : prob <= cfg.target_prob + kTargetSlack;
}

double gcav_alpha(const ProbeModel& probe, const Eigen::Ref<const Vector>& h,
                  const SteeringConfig& cfg, const std::optional<Vector>& direction) {
    const Vector& v = direction ? *direction : probe.direction();
    require(static_cast<std::size_t>(v.size()) == probe.dim(), ErrorCode::DimensionMismatch,
            "steering direction dimension does not match probe");
    const double slope = probe.omega().dot(v);
    if (!(slope > 0.0))
        throw Error(ErrorCode::MisalignedDirection,
                    "omega . v <= 0; steering would reverse the concept");
    const double alpha = (cfg.target_logit() - probe.logit(h)) / slope;
    return cfg.mode == SteerMode::Towards ? std::max(0.0, alpha) : std::min(0.0, alpha);
}

std::vector<SteeringOutcome> steer_layerwise(const std::map<std::uint32_t, LayerProbe>& probes,
                                             const std::map<std::uint32_t, Vector>& hiddens,
                                             const SteeringConfig& cfg, std::size_t prompt) {
    cfg.validate();
    std::vector<std::uint32_t> layers = cfg.layers;
    std::sort(layers.begin(), layers.end());
    std::vector<SteeringOutcome> out;
    out.reserve(layers.size());
    for (auto layer : layers) {
        const auto pit = probes.find(layer);
        const auto hit = hiddens.find(layer);
        if (pit == probes.end() || hit == hiddens.end())
            throw Error(ErrorCode::MissingLayer,
                        "no probe or hidden state for layer " + std::to_string(layer));
        const ProbeModel& probe = pit->second.probe;
        const Vector& h = hit->second;

        SteeringOutcome o;
        o.layer_id = layer;
        o.prompt = prompt;
        o.pre_prob = probe.probability(h);
        o.post_prob = o.pre_prob;
        if (cfg.reliability_threshold && pit->second.test_accuracy < *cfg.reliability_threshold) {
            o.skipped_reason = SkipReason::LowAccuracy;
        } else if (!in_target_region(o.pre_prob, cfg)) {
            try {
                o.alpha = gcav_alpha(probe, h, cfg);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::MisalignedDirection) throw;
                o.skipped_reason = SkipReason::MisalignedDirection;
            }
            if (!o.skipped_reason && o.alpha != 0.0) {
                const Vector steered = h + o.alpha * probe.direction();
                o.intervened = true;
                o.post_prob = probe.probability(steered);
            } else {
                o.alpha = 0.0;
            }
        }
        out.push_back(o);
    }
    return out;
}

std::vector<SteeringOutcome> steer_batch(const std::map<std::uint32_t, LayerProbe>& probes,
                                         const std::map<std::uint32_t, Matrix>& hiddens,
                                         const SteeringConfig& cfg) {
    std::optional<Eigen::Index> prompts;
    for (auto layer : cfg.layers) {
        const auto it = hiddens.find(layer);
        if (it == hiddens.end())
            throw Error(ErrorCode::MissingLayer,
                        "no hidden states for layer " + std::to_string(layer));
        if (prompts)
            require(*prompts == it->second.rows(), ErrorCode::DimensionMismatch,
                    "hidden-state files disagree on prompt count");
        prompts = it->second.rows();
    }
    std::vector<SteeringOutcome> out;
    for (Eigen::Index i = 0; i < prompts.value_or(0); ++i) {
        std::map<std::uint32_t, Vector> row;
        for (auto layer : cfg.layers) row[layer] = hiddens.at(layer).row(i).transpose();
        auto part = steer_layerwise(probes, row, cfg, static_cast<std::size_t>(i));
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

SteeringReport summarize_steering(const std::vector<SteeringOutcome>& outcomes,
                                  const SteeringConfig& cfg) {
    SteeringReport rep;
    std::vector<double> magnitudes;
    std::size_t success = 0, intervened = 0;
    for (const auto& o : outcomes) {
        if (o.skipped_reason) {
            ++rep.skipped;
            continue;
        }
        ++rep.evaluated;
        if (in_target_region(o.post_prob, cfg)) ++success;
        if (o.intervened) ++intervened;
        magnitudes.push_back(std::abs(o.alpha));
    }
    require(rep.evaluated > 0, ErrorCode::EmptyEvaluationSet,
            "no evaluated layer-prompt pairs to summarize");
    const auto n = static_cast<double>(rep.evaluated);
    rep.success_rate = static_cast<double>(success) / n;
    rep.intervention_rate = static_cast<double>(intervened) / n;
    rep.alpha_median = stats::quantile(magnitudes, 0.5);
    rep.alpha_p90 = stats::quantile(magnitudes, 0.9);
    rep.alpha_max = *std::max_element(magnitudes.begin(), magnitudes.end());
    return rep;
}

}  // namespace raptor
