#pragma once

#include <vector>

#include "sonarpipe/types.hpp"

namespace sonarpipe {

enum class Connectivity { Four = 4, Eight = 8 };

enum class ConfidenceRule {
    AreaSaturating,  // min(1, area / (4 * min_area_px))
    MeanIntensity,   // mean raw intensity over the component / 255
};

struct BaselineParams {
    int min_area_px = 20;
    Connectivity connectivity = Connectivity::Eight;
    ConfidenceRule confidence_rule = ConfidenceRule::AreaSaturating;

    void validate() const;
};

/// Label of each pixel's connected component (0 = background, labels from 1
/// in raster order of their first pixel).
struct ComponentLabels {
    int width = 0;
    int height = 0;
    int count = 0;
    std::vector<int> labels;
};

ComponentLabels label_components(const BinaryMask& mask, Connectivity connectivity);

/// Connected-component detector over the b_f mask: one detection per
/// component of at least min_area_px pixels, tight box, raster order.
std::vector<Detection> detect_cc(const BinaryMask& b_f, const Frame& raw, const BaselineParams& params);

/// Detections with confidence >= tau, order kept. tau must be in [0,1].
std::vector<Detection> filter_confidence(const std::vector<Detection>& detections, double tau);
FrameDetections filter_confidence(const FrameDetections& detections, double tau);

}  // namespace sonarpipe
