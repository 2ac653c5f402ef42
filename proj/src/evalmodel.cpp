#include "sonarpipe/evalmodel.hpp"

#include <algorithm>
#include <numeric>

#include "sonarpipe/detect.hpp"
#include "sonarpipe/errors.hpp"

namespace sonarpipe {

MatchCounts FrameMatch::counts() const {
    MatchCounts c;
    for (bool tp : detection_tp) (tp ? c.tp : c.fp) += 1;
    for (bool m : gt_matched) c.fn += m ? 0 : 1;
    return c;
}

FrameMatch match_frame(std::span<const Detection> detections, std::span<const Annotation> gts,
                       double iou_threshold) {
    FrameMatch out{std::vector<bool>(detections.size(), false), std::vector<bool>(gts.size(), false)};
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].confidence > detections[b].confidence;
    });
    for (std::size_t di : order) {
        double best = -1.0;
        std::size_t best_g = gts.size();
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (out.gt_matched[g]) continue;
            const double v = iou(detections[di].bbox, gts[g].bbox);
            if (v > best) {
                best = v;
                best_g = g;
            }
        }
        if (best_g < gts.size() && best >= iou_threshold) {
            out.gt_matched[best_g] = true;
            out.detection_tp[di] = true;
        }
    }
    return out;
}

PrecisionRecall prf_from_rates(double precision, double recall) {
    PrecisionRecall r{precision, recall, 0.0, false};
    if (precision + recall > 0.0) {
        r.f1 = 2.0 * precision * recall / (precision + recall);
    } else {
        r.degenerate = true;
    }
    return r;
}

PrecisionRecall prf(const MatchCounts& c) {
    bool degenerate = false;
    double p = 0.0;
    double r = 0.0;
    if (c.tp + c.fp > 0) {
        p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    } else {
        degenerate = true;
    }
    if (c.tp + c.fn > 0) {
        r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    } else {
        degenerate = true;
    }
    PrecisionRecall out = prf_from_rates(p, r);
    out.degenerate = out.degenerate || degenerate;
    return out;
}

std::string_view to_string(ApInterpolation interp) {
    return interp == ApInterpolation::AllPoint ? "all-point" : "11-point";
}

ApInterpolation ap_interpolation_from_string(std::string_view name) {
    if (name == "all-point") return ApInterpolation::AllPoint;
    if (name == "11-point") return ApInterpolation::ElevenPoint;
    throw ValidationError("unknown AP interpolation '" + std::string(name) + "' (all-point or 11-point)");
}

namespace {

struct Ranked {
    double confidence;
    std::size_t image;
    std::size_t position;
    bool tp;
};

std::size_t total_gts(std::span<const EvalImage> images) {
    std::size_t n = 0;
    for (const auto& im : images) n += im.gts.size();
    return n;
}

}  // namespace

std::vector<PrPoint> precision_recall_curve(std::span<const EvalImage> images, double iou_threshold) {
    std::vector<Ranked> ranked;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto m = match_frame(images[i].detections, images[i].gts, iou_threshold);
        for (std::size_t d = 0; d < images[i].detections.size(); ++d) {
            ranked.push_back({images[i].detections[d].confidence, i, d, m.detection_tp[d]});
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.image != b.image) return a.image < b.image;
        return a.position < b.position;
    });
    const double n_gt = static_cast<double>(total_gts(images));
    std::vector<PrPoint> curve;
    curve.reserve(ranked.size());
    long long tp = 0;
    long long seen = 0;
    for (const auto& r : ranked) {
        ++seen;
        tp += r.tp ? 1 : 0;
        curve.push_back({n_gt > 0 ? static_cast<double>(tp) / n_gt : 0.0,
                         static_cast<double>(tp) / static_cast<double>(seen)});
    }
    return curve;
}

double average_precision(std::span<const EvalImage> images, double iou_threshold, ApInterpolation interp) {
    if (total_gts(images) == 0) throw ValidationError("average precision is undefined without ground truth");
    const auto curve = precision_recall_curve(images, iou_threshold);

    if (interp == ApInterpolation::ElevenPoint) {
        double ap = 0.0;
        for (int t = 0; t <= 10; ++t) {
            const double level = t / 10.0;
            double best = 0.0;
            for (const auto& pt : curve) {
                if (pt.recall >= level) best = std::max(best, pt.precision);
            }
            ap += best / 11.0;
        }
        return ap;
    }

    // Sentinels (0, 0) and (1, 0), then the precision envelope from the right.
    std::vector<double> rec{0.0};
    std::vector<double> prec{0.0};
    for (const auto& pt : curve) {
        rec.push_back(pt.recall);
        prec.push_back(pt.precision);
    }
    rec.push_back(1.0);
    prec.push_back(0.0);
    for (std::size_t i = prec.size() - 1; i > 0; --i) prec[i - 1] = std::max(prec[i - 1], prec[i]);
    double ap = 0.0;
    for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
        if (rec[i + 1] != rec[i]) ap += (rec[i + 1] - rec[i]) * prec[i + 1];
    }
    return ap;
}

KappaResult kappa_from_counts(const MatchCounts& c) {
    KappaResult r;
    r.counts = c;
    const double n = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
    const double actual_fish = static_cast<double>(c.tp + c.fn);
    const double actual_empty = static_cast<double>(c.fp + c.tn);
    r.confusion[0][0] = actual_fish > 0 ? c.tp / actual_fish : 0.0;
    r.confusion[1][0] = actual_fish > 0 ? c.fn / actual_fish : 0.0;
    r.confusion[0][1] = actual_empty > 0 ? c.fp / actual_empty : 0.0;
    r.confusion[1][1] = actual_empty > 0 ? c.tn / actual_empty : 0.0;
    if (n == 0) {
        r.degenerate = true;
        r.kappa = 1.0;
        return r;
    }
    r.observed_agreement = static_cast<double>(c.tp + c.tn) / n;
    const double pred_fish = static_cast<double>(c.tp + c.fp) / n;
    const double pred_empty = static_cast<double>(c.fn + c.tn) / n;
    r.chance_agreement = pred_fish * (actual_fish / n) + pred_empty * (actual_empty / n);
    if (r.chance_agreement >= 1.0) {
        r.degenerate = true;
        r.kappa = 1.0;
    } else {
        r.kappa = (r.observed_agreement - r.chance_agreement) / (1.0 - r.chance_agreement);
    }
    return r;
}

KappaResult kappa_confusion(std::span<const bool> image_predictions, std::span<const bool> image_truths) {
    if (image_predictions.size() != image_truths.size()) {
        throw ValidationError("kappa: prediction and ground-truth vectors differ in length");
    }
    MatchCounts c;
    for (std::size_t i = 0; i < image_predictions.size(); ++i) {
        const bool p = image_predictions[i];
        const bool t = image_truths[i];
        if (p && t) ++c.tp;
        else if (p && !t) ++c.fp;
        else if (!p && t) ++c.fn;
        else ++c.tn;
    }
    return kappa_from_counts(c);
}

ModelEvalReport evaluate_model(std::span<const EvalImage> images, const ModelEvalConfig& config) {
    if (!(config.iou_threshold > 0.0 && config.iou_threshold <= 1.0)) {
        throw ValidationError("eval-model: iou threshold must be in (0, 1]");
    }
    ModelEvalReport report;
    report.config = config;
    report.images = images.size();

    MatchCounts image_counts;
    for (const auto& im : images) {
        const auto kept = filter_confidence(im.detections, config.confidence_threshold);
        report.box_counts += match_frame(kept, im.gts, config.iou_threshold).counts();
        const bool predicted = !kept.empty();
        const bool actual = !im.gts.empty();
        if (predicted && actual) ++image_counts.tp;
        else if (predicted) ++image_counts.fp;
        else if (actual) ++image_counts.fn;
        else ++image_counts.tn;
    }
    report.pr = prf(report.box_counts);
    if (total_gts(images) > 0) {
        report.ap50 = average_precision(images, config.iou_threshold, config.interpolation);
        report.ap_defined = true;
    }
    report.image_level = kappa_from_counts(image_counts);
    return report;
}

nlohmann::ordered_json to_json(const ModelEvalReport& r) {
    using oj = nlohmann::ordered_json;
    const auto& k = r.image_level;
    oj j;
    j["config"] = {{"iou_threshold", r.config.iou_threshold},
                   {"confidence_threshold", r.config.confidence_threshold},
                   {"ap_interpolation", std::string(to_string(r.config.interpolation))}};
    j["images"] = r.images;
    j["box_counts"] = {{"tp", r.box_counts.tp}, {"fp", r.box_counts.fp}, {"fn", r.box_counts.fn}};
    j["precision"] = r.pr.precision;
    j["recall"] = r.pr.recall;
    j["f1"] = r.pr.f1;
    j["prf_degenerate"] = r.pr.degenerate;
    if (r.ap_defined) {
        j["ap50"] = r.ap50;
        j["ap50_percent"] = r.ap50 * 100.0;
    } else {
        j["ap50"] = nullptr;
        j["ap50_percent"] = nullptr;
    }
    j["kappa"] = k.kappa;
    j["kappa_degenerate"] = k.degenerate;
    j["image_counts"] = {{"tp", k.counts.tp}, {"fp", k.counts.fp}, {"fn", k.counts.fn}, {"tn", k.counts.tn}};
    j["confusion"] = {{"rows", oj::array({"predicted_fish", "predicted_no_fish"})},
                      {"columns", oj::array({"actual_fish", "actual_no_fish"})},
                      {"matrix", oj::array({oj::array({k.confusion[0][0], k.confusion[0][1]}),
                                            oj::array({k.confusion[1][0], k.confusion[1][1]})})}};
    return j;
}

}  // namespace sonarpipe
