#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sonarpipe/background.hpp"
#include "sonarpipe/clipio.hpp"
#include "sonarpipe/detect.hpp"
#include "sonarpipe/evaleco.hpp"
#include "sonarpipe/evalmodel.hpp"
#include "sonarpipe/maskpipe.hpp"
#include "sonarpipe/tracks.hpp"

namespace sonarpipe {

struct CameraPreset {
    Camera camera;
    BackgroundParams background;
};

CameraPreset camera_preset(Camera camera);

struct PipelineConfig {
    /// Background parameters; unset means the preset of the clip's camera.
    std::optional<BackgroundParams> background;
    ComposeMode mode = ComposeMode::RBB_F;
    BaselineParams baseline;
    /// When set, detections come from this log instead of the baseline.
    const DetectionLog* external = nullptr;
    double confidence_threshold = 0.25;
    OverlapRule overlap;
    std::optional<std::filesystem::path> dump_masks;     // <clip>_<index>_b.pgm (+ _bf.pgm)
    std::optional<std::filesystem::path> dump_composed;  // <clip>_<index>_<mode>.png

    nlohmann::ordered_json to_json(Camera camera) const;
};

struct ClipResult {
    std::string clip_id;
    Camera camera = Camera::DIDSON;
    std::size_t frame_count = 0;
    double frame_rate_hz = 5.0;
    FrameDetections raw;        // detector output above the confidence threshold
    FrameDetections surviving;  // after the flash filter
    std::vector<Track> tracks;
};

/// Runs background, maskpipe, detect and tracks on one clip. Errors are
/// rethrown as StageError tagged with the stage and clip.
ClipResult run_clip(const ClipManifest& manifest, const std::vector<Frame>& frames, const PipelineConfig& config);

/// Ecological evaluation of pipeline results against passage logs.
EcoEvalReport evaluate_eco(const std::vector<ClipResult>& results, const std::vector<PassageRecord>& passages,
                           const std::vector<std::string>& empty_clip_ids, double tolerance_s);

/// Frame-level evaluation: one EvalImage per annotated frame.
std::vector<EvalImage> eval_images(const std::string& clip_id, const FrameDetections& detections,
                                   const AnnotationMap& annotations);

}  // namespace sonarpipe
