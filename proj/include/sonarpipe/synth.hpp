#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sonarpipe/clipio.hpp"
#include "sonarpipe/types.hpp"

namespace sonarpipe {

/// One fish crossing the beam horizontally. Positive speed enters at the
/// left edge and is logged as UP; negative speed enters at the right, DOWN.
struct FishSpec {
    int entry_frame = 0;
    double speed_px_per_frame = 4.0;
    int length_px = 80;
    int thickness_px = 12;
    int intensity = 220;
    double undulation_amplitude = 3.0;      // vertical, pixels
    double undulation_period_frames = 20.0;
    int lane_y = 0;                         // body centre row before undulation
    std::string species = "generic";
};

struct NoiseSpec {
    double salt_pepper_rate = 0.002;
    double background_mean = 40.0;
    double background_std = 10.0;
};

struct SynthConfig {
    std::string clip_id = "synth";
    Camera camera = Camera::DIDSON;
    int width = 608;
    int height = 480;
    int n_frames = 300;
    double frame_rate_hz = 5.0;
    double px_per_cm = 4.0;  // body length -> size class
    NoiseSpec noise;
    std::vector<FishSpec> fish;
    std::uint64_t seed = 0;

    /// Throws ValidationError for bad rates or a fish that cannot fit the frame.
    void validate() const;
};

struct SynthClip {
    ClipManifest manifest;  // frame_paths are filled in by write_synth_clip
    std::vector<Frame> frames;
    AnnotationMap annotations;  // an entry for every frame, empty when no fish is visible
    std::vector<PassageRecord> passages;
};

/// Speckle background N(mean, std) clamped to [0,255] plus salt-and-pepper,
/// with each fish drawn as a filled ellipse (pixel = max(background,
/// intensity)). Ground truth is the tight box of the drawn pixels; one
/// passage per visible fish at the middle of its on-screen frames.
SynthClip gen_clip(const SynthConfig& config);

/// Centre of fish `fish` at frame `frame` (integer pixel position).
std::pair<int, int> fish_center(const SynthConfig& config, const FishSpec& fish, int frame);

/// Writes frames/<clip>_<index>.pgm, manifest.json, annotations/ and
/// passages.csv under `dir`; returns the manifest with frame paths set.
ClipManifest write_synth_clip(const std::filesystem::path& dir, SynthClip& clip);

/// A seeded layout of `n_fish` high-contrast fish on separate lanes, lengths
/// spread over the size classes (at least 60 px).
SynthConfig random_synth_config(std::uint64_t seed, int n_frames, int n_fish, int width = 608, int height = 480);

}  // namespace sonarpipe
