#pragma once

#include <filesystem>
#include <vector>

#include "sonarpipe/types.hpp"

namespace sonarpipe {

/// When two boxes on adjacent frames count as the same object.
struct OverlapRule {
    double min_iou = 0.0;    // overlap means intersection > 0 and IoU > min_iou
    bool symmetric = true;   // flash filter looks at the previous frame as well as the next

    void validate() const;
};

bool boxes_overlap(const BoundingBox& a, const BoundingBox& b, const OverlapRule& rule);

/// Drops every detection with no overlapping detection on an adjacent frame
/// (next frame only when the rule is asymmetric). Frame keys are preserved.
FrameDetections flash_filter(const FrameDetections& per_frame, const OverlapRule& rule = {});

/// Detections on consecutive frames, adjacent boxes overlapping.
struct Track {
    std::string clip_id;
    std::vector<Detection> detections;

    int start_frame() const { return detections.front().frame_index; }
    int end_frame() const { return detections.back().frame_index; }
    std::size_t length() const { return detections.size(); }
    double mean_confidence() const;

    /// Throws ValidationError unless length >= 2 with consecutive frames and
    /// overlapping neighbours.
    void validate(const OverlapRule& rule = {}) const;

    friend bool operator==(const Track&, const Track&) = default;
};

/// Greedy frame-to-frame association: between frames f and f+1 the
/// overlapping pairs are linked by descending IoU (ties: lower index in f,
/// then lower index in f+1), each detection used once. Chains of length
/// >= 2 are returned ordered by start frame, then creation order.
std::vector<Track> build_tracks(const FrameDetections& per_frame, const OverlapRule& rule = {});

// Track log: JSON lines
//   {clip_id, start_frame, end_frame, boxes: [{x, y, w, h, conf}, ...], mean_conf}
void write_track_log(const std::filesystem::path& path, const std::vector<Track>& tracks);
std::vector<Track> read_track_log(const std::filesystem::path& path);

}  // namespace sonarpipe
