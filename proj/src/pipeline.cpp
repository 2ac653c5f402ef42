#include "sonarpipe/pipeline.hpp"

#include <set>

#include "sonarpipe/errors.hpp"
#include "sonarpipe/image_io.hpp"

namespace fs = std::filesystem;

namespace sonarpipe {

CameraPreset camera_preset(Camera camera) { return {camera, background_preset(camera)}; }

nlohmann::ordered_json PipelineConfig::to_json(Camera camera) const {
    const BackgroundParams bg = background.value_or(background_preset(camera));
    nlohmann::ordered_json j;
    j["camera"] = std::string(to_string(camera));
    j["background"] = {{"var_threshold", bg.var_threshold},
                       {"history", bg.history},
                       {"max_components", bg.max_components},
                       {"background_ratio", bg.background_ratio},
                       {"initial_variance", bg.initial_variance},
                       {"match_threshold", bg.match_threshold},
                       {"min_variance", bg.min_variance},
                       {"max_variance", bg.max_variance},
                       {"complexity_prior", bg.complexity_prior}};
    j["mode"] = std::string(to_string(mode));
    if (external) {
        j["detector"] = "external";
    } else {
        j["detector"] = {{"name", "baseline"},
                         {"min_area_px", baseline.min_area_px},
                         {"connectivity", static_cast<int>(baseline.connectivity)},
                         {"confidence_rule", baseline.confidence_rule == ConfidenceRule::AreaSaturating
                                                 ? "area_saturating"
                                                 : "mean_intensity"}};
    }
    j["confidence_threshold"] = confidence_threshold;
    j["track_min_iou"] = overlap.min_iou;
    j["flash_filter"] = overlap.symmetric ? "previous-or-next" : "next-only";
    return j;
}

namespace {

template <typename F>
auto stage(const char* name, const std::string& clip_id, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, clip_id, e.what());
    }
}

std::string frame_name(const std::string& clip_id, int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d", index);
    return clip_id + "_" + buf;
}

}  // namespace

ClipResult run_clip(const ClipManifest& manifest, const std::vector<Frame>& frames, const PipelineConfig& config) {
    const std::string& id = manifest.clip_id;
    ClipResult result;
    result.clip_id = id;
    result.camera = manifest.camera;
    result.frame_count = frames.size();
    result.frame_rate_hz = manifest.frame_rate_hz;

    const BackgroundParams params = config.background.value_or(background_preset(manifest.camera));
    stage("background", id, [&] { params.validate(); });
    stage("detect", id, [&] {
        config.baseline.validate();
        if (!(config.confidence_threshold >= 0.0 && config.confidence_threshold <= 1.0)) {
            throw ValidationError("confidence threshold must be in [0,1]");
        }
    });

    const bool need_masks = !config.external || config.dump_masks || config.dump_composed;
    if (need_masks && !frames.empty()) {
        BackgroundModel model = stage("background", id, [&] {
            return BackgroundModel(params, frames.front().width(), frames.front().height());
        });
        for (const auto& f : frames) {
            const BinaryMask b = stage("background", id, [&] { return model.apply(f); });
            const BinaryMask b_f = stage("maskpipe", id, [&] { return denoise_mask(b); });
            if (config.dump_masks) {
                stage("maskpipe", id, [&] {
                    write_mask_image(*config.dump_masks / (frame_name(id, f.index) + "_b.pgm"), b);
                    write_mask_image(*config.dump_masks / (frame_name(id, f.index) + "_bf.pgm"), b_f);
                });
            }
            if (config.dump_composed) {
                stage("maskpipe", id, [&] {
                    const ComposedFrame c = compose(f.image, &b, &b_f, config.mode);
                    write_rgb_png(*config.dump_composed /
                                      (frame_name(id, f.index) + "_" + std::string(to_string(config.mode)) + ".png"),
                                  {c.red, c.green, c.blue});
                });
            }
            if (!config.external) {
                auto dets = stage("detect", id, [&] {
                    return filter_confidence(detect_cc(b_f, f, config.baseline), config.confidence_threshold);
                });
                if (!dets.empty()) result.raw[f.index] = std::move(dets);
            }
        }
    }
    if (config.external) {
        result.raw = stage("detect", id, [&] {
            return filter_confidence(frames_of(*config.external, id), config.confidence_threshold);
        });
    }

    stage("tracks", id, [&] {
        result.surviving = flash_filter(result.raw, config.overlap);
        result.tracks = build_tracks(result.surviving, config.overlap);
    });
    return result;
}

EcoEvalReport evaluate_eco(const std::vector<ClipResult>& results, const std::vector<PassageRecord>& passages,
                           const std::vector<std::string>& empty_clip_ids, double tolerance_s) {
    const std::set<std::string> empty(empty_clip_ids.begin(), empty_clip_ids.end());
    std::vector<EcoClipInput> inputs;
    for (const auto& r : results) {
        std::vector<PassageRecord> mine;
        std::copy_if(passages.begin(), passages.end(), std::back_inserter(mine),
                     [&](const PassageRecord& p) { return p.clip_id == r.clip_id; });
        EcoClipInput in;
        in.clip_id = r.clip_id;
        in.camera = r.camera;
        in.frame_count = r.frame_count;
        in.empty_clip = empty.count(r.clip_id) > 0;
        in.matching = stage("eval-eco", r.clip_id,
                            [&] { return match_passages(r.tracks, mine, r.frame_rate_hz, tolerance_s); });
        in.surviving = r.surviving;
        inputs.push_back(std::move(in));
    }
    for (const auto& id : empty) {
        const bool known = std::any_of(results.begin(), results.end(), [&](const ClipResult& r) { return r.clip_id == id; });
        if (!known) throw ValidationError("empty clip '" + id + "' is not among the evaluated clips");
    }
    return eco_report(inputs, tolerance_s);
}

std::vector<EvalImage> eval_images(const std::string& clip_id, const FrameDetections& detections,
                                   const AnnotationMap& annotations) {
    std::vector<EvalImage> out;
    for (const auto& [frame, gts] : annotations) {
        EvalImage im;
        im.clip_id = clip_id;
        im.frame_index = frame;
        im.gts = gts;
        if (const auto it = detections.find(frame); it != detections.end()) im.detections = it->second;
        out.push_back(std::move(im));
    }
    return out;
}

}  // namespace sonarpipe
