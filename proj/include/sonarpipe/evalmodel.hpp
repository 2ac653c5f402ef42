#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sonarpipe/types.hpp"

namespace sonarpipe {

struct MatchCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    MatchCounts& operator+=(const MatchCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct FrameMatch {
    std::vector<bool> detection_tp;  // parallel to the input detections
    std::vector<bool> gt_matched;    // parallel to the input ground truths

    MatchCounts counts() const;
};

/// Greedy matching in descending confidence (ties keep input order). Each
/// detection claims the still unmatched ground truth of highest IoU, if that
/// IoU is >= iou_threshold.
FrameMatch match_frame(std::span<const Detection> detections, std::span<const Annotation> gts,
                       double iou_threshold = 0.5);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // some ratio was 0/0 and reported as 0
};

PrecisionRecall prf(const MatchCounts& counts);
PrecisionRecall prf_from_rates(double precision, double recall);

enum class ApInterpolation { AllPoint, ElevenPoint };
std::string_view to_string(ApInterpolation interp);
ApInterpolation ap_interpolation_from_string(std::string_view name);

/// One evaluated image with its detections and ground truths.
struct EvalImage {
    std::string clip_id;
    int frame_index = 0;
    std::vector<Detection> detections;
    std::vector<Annotation> gts;
};

/// A point of the raw precision/recall curve, one per ranked detection.
struct PrPoint {
    double recall;
    double precision;
};

/// Ranks all detections by confidence (ties: image order, then input order)
/// and returns cumulative precision/recall after each one.
std::vector<PrPoint> precision_recall_curve(std::span<const EvalImage> images, double iou_threshold = 0.5);

/// Average precision at the IoU threshold. Throws ValidationError when the
/// image set has no ground truth.
double average_precision(std::span<const EvalImage> images, double iou_threshold = 0.5,
                         ApInterpolation interp = ApInterpolation::AllPoint);

/// Column-normalized 2x2 confusion: [0][0]=TP rate, [0][1]=FP rate,
/// [1][0]=FN rate, [1][1]=TN rate (rows predicted fish/no fish, columns
/// actual fish/no fish).
using ConfusionMatrix = std::array<std::array<double, 2>, 2>;

struct KappaResult {
    double kappa = 0.0;
    ConfusionMatrix confusion{};
    MatchCounts counts;
    double observed_agreement = 0.0;
    double chance_agreement = 0.0;
    bool degenerate = false;  // chance agreement is 1; kappa reported as 1
};

KappaResult kappa_confusion(std::span<const bool> image_predictions, std::span<const bool> image_truths);
KappaResult kappa_from_counts(const MatchCounts& image_counts);

struct ModelEvalConfig {
    double iou_threshold = 0.5;
    double confidence_threshold = 0.25;  // applied before P/R/F1 and kappa; AP ranks everything
    ApInterpolation interpolation = ApInterpolation::AllPoint;
};

struct ModelEvalReport {
    ModelEvalConfig config;
    std::size_t images = 0;
    MatchCounts box_counts;
    PrecisionRecall pr;
    double ap50 = 0.0;
    bool ap_defined = false;
    KappaResult image_level;
};

ModelEvalReport evaluate_model(std::span<const EvalImage> images, const ModelEvalConfig& config = {});

nlohmann::ordered_json to_json(const ModelEvalReport& report);

}  // namespace sonarpipe
