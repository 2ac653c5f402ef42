#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sonarpipe/tracks.hpp"
#include "sonarpipe/types.hpp"

namespace sonarpipe {

struct PassageMatch {
    PassageRecord passage;
    std::optional<Track> track;

    bool is_tp() const { return track.has_value(); }
};

struct PassageMatching {
    std::vector<PassageMatch> matches;   // one per passage, input order
    std::vector<Track> unmatched_tracks; // false positives, input order
};

/// Time interval of a track in seconds, [start/fps, end/fps].
std::pair<double, double> track_interval(const Track& track, double frame_rate_hz);

/// One-to-one passage/track assignment. A track is eligible for a passage
/// when its time interval widened by tol_s on both sides contains the
/// passage time; pairs are taken greedily by time distance to the interval
/// (ties: earlier track start, then passage order).
PassageMatching match_passages(const std::vector<Track>& tracks, const std::vector<PassageRecord>& passages,
                               double frame_rate_hz, double tol_s);

/// Everything the ecological report needs about one evaluated clip.
struct EcoClipInput {
    std::string clip_id;
    Camera camera = Camera::DIDSON;
    std::size_t frame_count = 0;
    bool empty_clip = false;            // declared free of fish; feeds TN%
    PassageMatching matching;
    FrameDetections surviving;          // per-frame detections after flash filtering
};

struct CellStats {
    long long tp = 0;
    long long total = 0;
    double recall_percent() const { return total > 0 ? 100.0 * tp / total : 0.0; }
};

struct ClipEcoStats {
    std::string clip_id;
    long long tp = 0;
    long long fn = 0;
    long long fp = 0;
    std::optional<double> fp_tp_ratio;  // absent when tp == 0
};

struct CameraEcoStats {
    std::map<std::pair<std::string, SizeClass>, CellStats> cells;  // (species, size class)
    std::map<SizeClass, CellStats> by_size;
    CellStats total;
    long long empty_clip_images = 0;
    long long empty_clip_tn_images = 0;
    std::vector<ClipEcoStats> clips;
    std::optional<double> median_fp_tp;
    std::size_t clips_excluded_from_median = 0;  // tp == 0

    std::optional<double> tn_percent() const;
};

struct EcoEvalReport {
    double tolerance_s = 10.0;
    std::map<Camera, CameraEcoStats> cameras;
    CameraEcoStats overall;
};

/// Aggregates per-clip matchings. Throws ValidationError when a clip
/// declared empty has passages.
EcoEvalReport eco_report(const std::vector<EcoClipInput>& clips, double tolerance_s);

/// Median of the values; mean of the two middle ones for even counts.
std::optional<double> median(std::vector<double> values);

nlohmann::ordered_json to_json(const EcoEvalReport& report);

/// Plain-text table: rows species, columns size classes, "tp/total (xx.x%)".
std::string format_recall_table(const EcoEvalReport& report);

}  // namespace sonarpipe
