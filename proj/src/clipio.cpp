#include "sonarpipe/clipio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sonarpipe/errors.hpp"
#include "sonarpipe/image_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sonarpipe {
namespace {

constexpr std::string_view kPassageHeader = "clip_id,timestamp_s,species,size_class,direction";

std::ifstream open_in(const fs::path& path) {
    if (!fs::exists(path)) throw IoError(path, "no such file");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    return in;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    return out;
}

std::optional<double> parse_double(std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::optional<int> frame_index_from_stem(const std::string& stem) {
    const auto us = stem.rfind('_');
    const std::string digits = us == std::string::npos ? stem : stem.substr(us + 1);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return std::nullopt;
    }
    int v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{}) return std::nullopt;
    return v;
}

// Portable unbiased draw in [0, bound).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

void ClipManifest::validate() const {
    if (clip_id.empty()) throw ValidationError("manifest: clip_id is empty");
    if (!(frame_rate_hz > 0.0) || !std::isfinite(frame_rate_hz)) {
        throw ValidationError("manifest '" + clip_id + "': frame_rate_hz must be positive");
    }
    if (width_px <= 0 || height_px <= 0) {
        throw ValidationError("manifest '" + clip_id + "': width_px and height_px must be positive");
    }
    if (frame_paths.empty()) throw ValidationError("manifest '" + clip_id + "': frame list is empty");
}

ClipManifest read_manifest(const fs::path& path) {
    auto in = open_in(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
    }
    ClipManifest m;
    try {
        m.clip_id = j.at("clip_id").get<std::string>();
        m.camera = camera_from_string(j.at("camera").get<std::string>());
        m.frame_rate_hz = j.at("frame_rate_hz").get<double>();
        m.width_px = j.at("width_px").get<int>();
        m.height_px = j.at("height_px").get<int>();
        const fs::path base = path.parent_path();
        for (const auto& f : j.at("frames")) {
            fs::path p = f.get<std::string>();
            m.frame_paths.push_back(p.is_absolute() ? p : base / p);
        }
    } catch (const json::exception& e) {
        throw ParseError(path, 0, std::string("bad manifest field: ") + e.what());
    }
    m.validate();
    return m;
}

void write_manifest(const fs::path& path, const ClipManifest& manifest) {
    manifest.validate();
    json frames = json::array();
    // Paths are stored relative to the manifest so a clip directory can move.
    const fs::path base = fs::absolute(path).parent_path().lexically_normal();
    for (const auto& p : manifest.frame_paths) {
        const fs::path abs = fs::absolute(p).lexically_normal();
        const fs::path rel = abs.lexically_relative(base);
        frames.push_back(rel.empty() ? abs.generic_string() : rel.generic_string());
    }
    json j = {{"clip_id", manifest.clip_id},
              {"camera", std::string(to_string(manifest.camera))},
              {"frame_rate_hz", manifest.frame_rate_hz},
              {"width_px", manifest.width_px},
              {"height_px", manifest.height_px},
              {"frames", frames}};
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

LoadedClip load_clip(const fs::path& manifest_path) {
    LoadedClip clip{read_manifest(manifest_path), {}};
    const auto& m = clip.manifest;
    clip.frames.reserve(m.frame_paths.size());
    for (std::size_t i = 0; i < m.frame_paths.size(); ++i) {
        Frame f;
        f.clip_id = m.clip_id;
        f.index = static_cast<int>(i);
        f.timestamp_s = frame_time(f.index, m.frame_rate_hz);
        f.image = read_gray_image(m.frame_paths[i]);
        if (f.image.width != m.width_px || f.image.height != m.height_px) {
            throw ValidationError("clip '" + m.clip_id + "': frame " + m.frame_paths[i].string() + " is " +
                                  std::to_string(f.image.width) + "x" + std::to_string(f.image.height) +
                                  ", manifest declares " + std::to_string(m.width_px) + "x" +
                                  std::to_string(m.height_px));
        }
        clip.frames.push_back(std::move(f));
    }
    return clip;
}

std::vector<Annotation> parse_annotation_file(const fs::path& path, int frame_index, int frame_width,
                                              int frame_height, bool coalesce_to_fish) {
    auto in = open_in(path);
    std::vector<Annotation> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok.size() != 5) {
            throw ParseError(path, lineno, "expected 5 fields 'label cx cy w h', got " + std::to_string(tok.size()));
        }
        double v[4];
        for (int k = 0; k < 4; ++k) {
            const auto d = parse_double(tok[k + 1]);
            if (!d) throw ParseError(path, lineno, "not a number: '" + tok[k + 1] + "'");
            if (!(*d >= 0.0 && *d <= 1.0)) {
                throw ParseError(path, lineno, "coordinate " + tok[k + 1] + " outside [0,1]");
            }
            v[k] = *d;
        }
        const auto [cx, cy, nw, nh] = v;
        const long x0 = std::lround((cx - nw / 2.0) * frame_width);
        const long x1 = std::lround((cx + nw / 2.0) * frame_width);
        const long y0 = std::lround((cy - nh / 2.0) * frame_height);
        const long y1 = std::lround((cy + nh / 2.0) * frame_height);
        Annotation a;
        a.frame_index = frame_index;
        a.bbox = {static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0), static_cast<int>(y1 - y0)};
        a.label = coalesce_to_fish ? std::string(Detection::label) : tok[0];
        if (!a.bbox.valid() || !a.bbox.inside(frame_width, frame_height)) {
            throw ParseError(path, lineno, "box does not fit inside the frame");
        }
        out.push_back(std::move(a));
    }
    return out;
}

AnnotationMap load_annotations(const fs::path& dir, int frame_width, int frame_height, bool coalesce_to_fish) {
    if (!fs::is_directory(dir)) throw IoError(dir, "not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    AnnotationMap out;
    for (const auto& f : files) {
        const auto idx = frame_index_from_stem(f.stem().string());
        if (!idx) throw ParseError(f, 0, "cannot derive a frame index from the file name");
        if (out.count(*idx)) throw ParseError(f, 0, "duplicate annotation file for frame " + std::to_string(*idx));
        out[*idx] = parse_annotation_file(f, *idx, frame_width, frame_height, coalesce_to_fish);
    }
    return out;
}

void write_annotations(const fs::path& dir, const std::string& clip_id, const AnnotationMap& annotations,
                       int frame_width, int frame_height) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    for (const auto& [index, boxes] : annotations) {
        char name[32];
        std::snprintf(name, sizeof name, "_%06d.txt", index);
        auto out = open_out(dir / (clip_id + name));
        for (const auto& a : boxes) {
            if (a.label.empty() || a.label.find_first_of(" \t\n") != std::string::npos) {
                throw ValidationError("annotation label must be a non-empty single token");
            }
            const double cx = (a.bbox.x + a.bbox.w / 2.0) / frame_width;
            const double cy = (a.bbox.y + a.bbox.h / 2.0) / frame_height;
            const double nw = static_cast<double>(a.bbox.w) / frame_width;
            const double nh = static_cast<double>(a.bbox.h) / frame_height;
            out << a.label << ' ' << format_double(cx) << ' ' << format_double(cy) << ' ' << format_double(nw)
                << ' ' << format_double(nh) << '\n';
        }
    }
}

std::vector<PassageRecord> read_passages(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<PassageRecord> out;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kPassageHeader) {
                throw ParseError(path, lineno, "expected header '" + std::string(kPassageHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 5) throw ParseError(path, lineno, "expected 5 comma-separated fields");
        PassageRecord p;
        p.clip_id = f[0];
        const auto t = parse_double(f[1]);
        if (!t || !(*t >= 0.0)) throw ParseError(path, lineno, "timestamp_s must be a non-negative number");
        p.timestamp_s = *t;
        p.species = f[2].empty() ? "generic" : f[2];
        try {
            p.size_class = size_class_from_string(f[3]);
            p.direction = direction_from_string(f[4]);
        } catch (const ValidationError& e) {
            throw ParseError(path, lineno, e.what());
        }
        if (p.clip_id.empty()) throw ParseError(path, lineno, "clip_id is empty");
        out.push_back(std::move(p));
    }
    if (!header_seen) throw ParseError(path, 1, "missing header");
    return out;
}

void write_passages(const fs::path& path, const std::vector<PassageRecord>& passages) {
    auto out = open_out(path);
    out << kPassageHeader << '\n';
    for (const auto& p : passages) {
        if (p.clip_id.find(',') != std::string::npos || p.species.find(',') != std::string::npos) {
            throw ValidationError("passage fields must not contain commas");
        }
        out << p.clip_id << ',' << format_double(p.timestamp_s) << ',' << p.species << ','
            << to_string(p.size_class) << ',' << to_string(p.direction) << '\n';
    }
}

DetectionLog read_detection_log(const fs::path& path) {
    auto in = open_in(path);
    DetectionLog out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Detection d;
        try {
            const json j = json::parse(line);
            d.clip_id = j.at("clip_id").get<std::string>();
            d.frame_index = j.at("frame").get<int>();
            d.bbox = {j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
            d.confidence = j.at("conf").get<double>();
        } catch (const json::exception& e) {
            throw ParseError(path, lineno, std::string("bad detection record: ") + e.what());
        }
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
            throw ParseError(path, lineno, "conf " + format_double(d.confidence) + " outside [0,1]");
        }
        if (!d.bbox.valid()) throw ParseError(path, lineno, "w and h must be positive");
        if (d.frame_index < 0 || d.bbox.x < 0 || d.bbox.y < 0) {
            throw ParseError(path, lineno, "frame, x and y must be non-negative");
        }
        out[{d.clip_id, d.frame_index}].push_back(std::move(d));
    }
    return out;
}

void write_detection_log(const fs::path& path, const std::vector<Detection>& detections) {
    auto out = open_out(path);
    for (const auto& d : detections) {
        json j = {{"clip_id", d.clip_id}, {"frame", d.frame_index}, {"x", d.bbox.x}, {"y", d.bbox.y},
                  {"w", d.bbox.w},        {"h", d.bbox.h},          {"conf", d.confidence}};
        out << j.dump() << '\n';
    }
}

std::vector<Detection> flatten(const DetectionLog& log) {
    std::vector<Detection> out;
    for (const auto& [key, dets] : log) out.insert(out.end(), dets.begin(), dets.end());
    return out;
}

FrameDetections frames_of(const DetectionLog& log, const std::string& clip_id) {
    FrameDetections out;
    for (auto it = log.lower_bound({clip_id, std::numeric_limits<int>::min()});
         it != log.end() && it->first.first == clip_id; ++it) {
        out[it->first.second] = it->second;
    }
    return out;
}

std::vector<std::string> read_id_list(const fs::path& path) {
    auto in = open_in(path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto tok = split_ws(line);
        if (!tok.empty()) out.push_back(tok[0]);
    }
    return out;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<double, 3> ratios) {
    double sum = 0.0;
    for (double r : ratios) {
        if (!(r >= 0.0)) throw ValidationError("split ratios must be non-negative");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1, got " + format_double(sum));

    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        const double quota = ratios[k] * static_cast<double>(n);
        // Absorb representation error such as 0.19 * 100 = 18.999...
        const double fl = std::floor(quota + 1e-9);
        sizes[k] = static_cast<std::size_t>(fl);
        frac[k] = quota - fl;
        assigned += sizes[k];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        return ratios[a] > ratios[b];
    });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) sizes[order[i % 3]] += 1;
    return sizes;
}

DatasetSplit split_dataset(const std::vector<std::string>& items, std::array<double, 3> ratios, std::uint64_t seed,
                           const std::vector<std::string>* strata) {
    if (items.empty()) throw ValidationError("split_dataset: no items");
    split_sizes(items.size(), ratios);  // validates ratios
    if (strata && strata->size() != items.size()) {
        throw ValidationError("split_dataset: one stratum key per item required");
    }

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < items.size(); ++i) groups[strata ? (*strata)[i] : std::string()].push_back(i);

    std::mt19937_64 rng(seed);
    DatasetSplit out;
    for (auto& [key, idx] : groups) {
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::swap(idx[i - 1], idx[bounded(rng, i)]);
        }
        const auto sizes = split_sizes(idx.size(), ratios);
        std::size_t pos = 0;
        for (std::size_t k = 0; k < sizes[0]; ++k) out.train.push_back(items[idx[pos++]]);
        for (std::size_t k = 0; k < sizes[1]; ++k) out.val.push_back(items[idx[pos++]]);
        for (std::size_t k = 0; k < sizes[2]; ++k) out.test.push_back(items[idx[pos++]]);
    }
    return out;
}

}  // namespace sonarpipe
