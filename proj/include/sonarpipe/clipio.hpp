#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sonarpipe/types.hpp"

namespace sonarpipe {

struct ClipManifest {
    std::string clip_id;
    Camera camera = Camera::DIDSON;
    double frame_rate_hz = 5.0;
    int width_px = 0;
    int height_px = 0;
    std::vector<std::filesystem::path> frame_paths;

    /// Throws ValidationError when a field breaks its invariant.
    void validate() const;
    std::size_t frame_count() const { return frame_paths.size(); }
};

struct LoadedClip {
    ClipManifest manifest;
    std::vector<Frame> frames;
};

/// Frame timestamp in seconds: index / frame_rate_hz.
inline double frame_time(int index, double frame_rate_hz) {
    return static_cast<double>(index) / frame_rate_hz;
}

// Manifest JSON:
//   {"clip_id": ..., "camera": "DIDSON"|"ARIS", "frame_rate_hz": ...,
//    "width_px": ..., "height_px": ..., "frames": [paths]}
// Relative frame paths resolve against the manifest's directory.
ClipManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const ClipManifest& manifest);

/// Reads the manifest and every frame it lists, in order.
LoadedClip load_clip(const std::filesystem::path& manifest_path);

// Annotations: one text file per frame, one "label cx cy w h" line per box,
// coordinates normalized to [0,1] in center format. The frame index is the
// run of digits after the last '_' in the file stem (or the whole stem).

std::vector<Annotation> parse_annotation_file(const std::filesystem::path& path, int frame_index,
                                              int frame_width, int frame_height,
                                              bool coalesce_to_fish = false);

/// Loads every *.txt in `dir`. Empty files yield an empty (no-fish) entry.
AnnotationMap load_annotations(const std::filesystem::path& dir, int frame_width, int frame_height,
                               bool coalesce_to_fish = false);

/// Writes `<clip_id>_<index:06>.txt` per entry of `annotations`.
void write_annotations(const std::filesystem::path& dir, const std::string& clip_id,
                       const AnnotationMap& annotations, int frame_width, int frame_height);

// Passage log CSV: clip_id,timestamp_s,species,size_class,direction

std::vector<PassageRecord> read_passages(const std::filesystem::path& path);
void write_passages(const std::filesystem::path& path, const std::vector<PassageRecord>& passages);

// Detection log: JSON lines {clip_id, frame, x, y, w, h, conf}.

using DetectionLog = std::map<std::pair<std::string, int>, std::vector<Detection>>;

DetectionLog read_detection_log(const std::filesystem::path& path);
void write_detection_log(const std::filesystem::path& path, const std::vector<Detection>& detections);

/// Flattens a log in key order.
std::vector<Detection> flatten(const DetectionLog& log);
/// Detections of one clip keyed by frame.
FrameDetections frames_of(const DetectionLog& log, const std::string& clip_id);

/// Reads one identifier per non-empty line ('#' starts a comment).
std::vector<std::string> read_id_list(const std::filesystem::path& path);

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

inline constexpr std::array<double, 3> kDefaultSplitRatios = {0.60, 0.19, 0.21};

/// Seeded shuffle, then largest-remainder partition sizes. When
/// `strata` is given (one key per item) each stratum is split separately.
DatasetSplit split_dataset(const std::vector<std::string>& items,
                           std::array<double, 3> ratios = kDefaultSplitRatios,
                           std::uint64_t seed = 0,
                           const std::vector<std::string>* strata = nullptr);

/// Partition sizes for `n` items under largest-remainder rounding.
std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<double, 3> ratios);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace sonarpipe
