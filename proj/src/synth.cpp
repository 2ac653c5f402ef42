#include "sonarpipe/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "sonarpipe/errors.hpp"
#include "sonarpipe/image_io.hpp"

namespace fs = std::filesystem;

namespace sonarpipe {

void SynthConfig::validate() const {
    if (width <= 0 || height <= 0) throw ValidationError("synth: frame size must be positive");
    if (n_frames <= 0) throw ValidationError("synth: n_frames must be positive");
    if (!(frame_rate_hz > 0.0)) throw ValidationError("synth: frame_rate_hz must be positive");
    if (!(px_per_cm > 0.0)) throw ValidationError("synth: px_per_cm must be positive");
    if (!(noise.salt_pepper_rate >= 0.0 && noise.salt_pepper_rate <= 1.0)) {
        throw ValidationError("synth: salt_pepper_rate must be in [0,1]");
    }
    if (!(noise.background_std >= 0.0)) throw ValidationError("synth: background_std must be >= 0");
    if (!(noise.background_mean >= 0.0 && noise.background_mean <= 255.0)) {
        throw ValidationError("synth: background_mean must be in [0,255]");
    }
    for (std::size_t i = 0; i < fish.size(); ++i) {
        const auto& f = fish[i];
        const std::string who = "synth: fish " + std::to_string(i) + ": ";
        if (f.length_px < 2 || f.thickness_px < 1) throw ValidationError(who + "length >= 2 and thickness >= 1 required");
        if (f.length_px > width) throw ValidationError(who + "longer than the frame width");
        if (f.speed_px_per_frame == 0.0 || !std::isfinite(f.speed_px_per_frame)) {
            throw ValidationError(who + "speed must be non-zero");
        }
        if (f.intensity < 0 || f.intensity > 255) throw ValidationError(who + "intensity must be in [0,255]");
        if (f.entry_frame < 0 || f.entry_frame >= n_frames) throw ValidationError(who + "entry_frame outside the clip");
        if (!(f.undulation_amplitude >= 0.0) || !(f.undulation_period_frames > 0.0)) {
            throw ValidationError(who + "bad undulation parameters");
        }
        const int reach = f.thickness_px / 2 + static_cast<int>(std::ceil(f.undulation_amplitude));
        if (f.lane_y - reach < 0 || f.lane_y + reach >= height) {
            throw ValidationError(who + "lane plus thickness and undulation leaves the frame");
        }
        if (f.species.empty() || f.species.find(',') != std::string::npos) {
            throw ValidationError(who + "species must be non-empty without commas");
        }
    }
}

std::pair<int, int> fish_center(const SynthConfig& config, const FishSpec& fish, int frame) {
    const int half = fish.length_px / 2;
    const int start_x = fish.speed_px_per_frame > 0 ? -half : config.width - 1 + half;
    const int t = frame - fish.entry_frame;
    const int cx = start_x + static_cast<int>(std::lround(fish.speed_px_per_frame * t));
    const double phase = 2.0 * std::numbers::pi * t / fish.undulation_period_frames;
    const int cy = fish.lane_y + static_cast<int>(std::lround(fish.undulation_amplitude * std::sin(phase)));
    return {cx, cy};
}

namespace {

// Draws the ellipse, returns the tight box of drawn pixels (w == 0 if none).
BoundingBox draw_fish(GrayImage& img, int cx, int cy, const FishSpec& fish) {
    const double a = fish.length_px / 2.0;
    const double b = fish.thickness_px / 2.0;
    const int rx = static_cast<int>(std::floor(a));
    const int ry = static_cast<int>(std::floor(b));
    int x0 = img.width, y0 = img.height, x1 = -1, y1 = -1;
    const auto value = static_cast<std::uint8_t>(fish.intensity);
    for (int dy = -ry; dy <= ry; ++dy) {
        const int y = cy + dy;
        if (y < 0 || y >= img.height) continue;
        for (int dx = -rx; dx <= rx; ++dx) {
            const int x = cx + dx;
            if (x < 0 || x >= img.width) continue;
            const double u = dx / a;
            const double v = dy / b;
            if (u * u + v * v > 1.0) continue;
            auto& px = img.at(x, y);
            px = std::max(px, value);
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return {};
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

// Maps 16 uniform bits to round(N(mean, std)) clamped to [0,255]: entry k
// holds the smallest v whose cumulative probability exceeds (k + 0.5) / 2^16.
std::vector<std::uint8_t> gaussian_table(double mean, double std_dev) {
    std::vector<std::uint8_t> table(1u << 16);
    if (std_dev <= 0.0) {
        std::fill(table.begin(), table.end(), static_cast<std::uint8_t>(std::clamp(std::lround(mean), 0L, 255L)));
        return table;
    }
    // cdf[v] = P(round(X) <= v), with all mass beyond 255 folded into 255.
    std::array<double, 256> cdf{};
    for (int v = 0; v < 256; ++v) {
        cdf[v] = 0.5 * std::erfc(-((v + 0.5) - mean) / (std_dev * std::numbers::sqrt2));
    }
    cdf[255] = 1.0;
    int v = 0;
    for (std::size_t k = 0; k < table.size(); ++k) {
        const double u = (k + 0.5) / static_cast<double>(table.size());
        while (v < 255 && cdf[v] <= u) ++v;
        table[k] = static_cast<std::uint8_t>(v);
    }
    return table;
}

}  // namespace

SynthClip gen_clip(const SynthConfig& config) {
    config.validate();
    SynthClip clip;
    clip.manifest.clip_id = config.clip_id;
    clip.manifest.camera = config.camera;
    clip.manifest.frame_rate_hz = config.frame_rate_hz;
    clip.manifest.width_px = config.width;
    clip.manifest.height_px = config.height;

    std::mt19937_64 rng(config.seed);
    const auto gauss = gaussian_table(config.noise.background_mean, config.noise.background_std);
    const auto salt_limit = static_cast<std::uint64_t>(config.noise.salt_pepper_rate * 4294967296.0);

    std::vector<int> first_seen(config.fish.size(), -1);
    std::vector<int> last_seen(config.fish.size(), -1);

    clip.frames.reserve(static_cast<std::size_t>(config.n_frames));
    for (int t = 0; t < config.n_frames; ++t) {
        Frame f;
        f.clip_id = config.clip_id;
        f.index = t;
        f.timestamp_s = frame_time(t, config.frame_rate_hz);
        f.image = GrayImage(config.width, config.height);
        // One 64-bit draw per pixel: bits 0-15 pick the gray level, bits
        // 16-47 decide salt-and-pepper, bit 48 picks salt or pepper.
        for (auto& px : f.image.data) {
            const std::uint64_t r = rng();
            px = gauss[r & 0xFFFF];
            if (((r >> 16) & 0xFFFFFFFFu) < salt_limit) px = (r >> 48) & 1 ? 255 : 0;
        }
        auto& boxes = clip.annotations[t];
        for (std::size_t i = 0; i < config.fish.size(); ++i) {
            const auto& fish = config.fish[i];
            if (t < fish.entry_frame) continue;
            const auto [cx, cy] = fish_center(config, fish, t);
            const BoundingBox box = draw_fish(f.image, cx, cy, fish);
            if (!box.valid()) continue;
            if (first_seen[i] < 0) first_seen[i] = t;
            last_seen[i] = t;
            boxes.push_back({t, box, fish.species});
        }
        clip.frames.push_back(std::move(f));
    }

    for (std::size_t i = 0; i < config.fish.size(); ++i) {
        if (first_seen[i] < 0) continue;
        const auto& fish = config.fish[i];
        PassageRecord p;
        p.clip_id = config.clip_id;
        p.timestamp_s = (first_seen[i] + last_seen[i]) / 2.0 / config.frame_rate_hz;
        p.species = fish.species;
        p.size_class = size_class_for_length_cm(fish.length_px / config.px_per_cm);
        p.direction = fish.speed_px_per_frame > 0 ? Direction::UP : Direction::DOWN;
        clip.passages.push_back(std::move(p));
    }
    std::stable_sort(clip.passages.begin(), clip.passages.end(),
                     [](const PassageRecord& a, const PassageRecord& b) { return a.timestamp_s < b.timestamp_s; });
    return clip;
}

ClipManifest write_synth_clip(const fs::path& dir, SynthClip& clip) {
    fs::create_directories(dir / "frames");
    auto& m = clip.manifest;
    m.frame_paths.clear();
    for (const auto& f : clip.frames) {
        char name[32];
        std::snprintf(name, sizeof name, "_%06d.pgm", f.index);
        const fs::path p = dir / "frames" / (m.clip_id + name);
        write_gray_image(p, f.image);
        m.frame_paths.push_back(p);
    }
    write_manifest(dir / "manifest.json", m);
    write_annotations(dir / "annotations", m.clip_id, clip.annotations, m.width_px, m.height_px);
    write_passages(dir / "passages.csv", clip.passages);
    return m;
}

SynthConfig random_synth_config(std::uint64_t seed, int n_frames, int n_fish, int width, int height) {
    SynthConfig cfg;
    cfg.clip_id = "synth_" + std::to_string(seed);
    cfg.width = width;
    cfg.height = height;
    cfg.n_frames = n_frames;
    cfg.seed = seed;

    static const char* kSpecies[] = {"salmon", "eel", "lamprey", "shad", "catfish"};
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    auto uniform_int = [&rng](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    if (n_fish <= 0) return cfg;
    const int band = height / n_fish;
    const int max_len = std::max(60, std::min(width * 3 / 5, 360));
    for (int i = 0; i < n_fish; ++i) {
        FishSpec f;
        f.length_px = 60 + (max_len - 60) * i / std::max(1, n_fish - 1) + uniform_int(0, 10);
        f.length_px = std::min(f.length_px, width);
        f.thickness_px = std::clamp(f.length_px / 8, 8, std::max(8, band / 2 - 8));
        f.undulation_amplitude = std::min(3.0, std::max(0.0, band / 2.0 - f.thickness_px / 2.0 - 2.0));
        f.undulation_period_frames = uniform_int(24, 40);
        f.lane_y = band * i + band / 2;
        // Roughly one body length every 8-12 frames.
        const int speed = std::max(4, f.length_px / uniform_int(8, 12));
        f.speed_px_per_frame = uniform_int(0, 1) ? speed : -speed;
        f.intensity = uniform_int(190, 240);
        const int transit = (width + f.length_px) / speed + 1;
        f.entry_frame = uniform_int(std::min(5, n_frames - 1), std::max(std::min(5, n_frames - 1), n_frames - transit));
        f.species = kSpecies[uniform_int(0, 4)];
        cfg.fish.push_back(f);
    }
    return cfg;
}

}  // namespace sonarpipe
