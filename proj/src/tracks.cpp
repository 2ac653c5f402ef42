#include "sonarpipe/tracks.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "sonarpipe/errors.hpp"

using json = nlohmann::json;

namespace sonarpipe {

void OverlapRule::validate() const {
    if (!(min_iou >= 0.0 && min_iou < 1.0)) throw ValidationError("tracks: min_iou must be in [0, 1)");
}

bool boxes_overlap(const BoundingBox& a, const BoundingBox& b, const OverlapRule& rule) {
    if (intersection_area(a, b) <= 0) return false;
    return iou(a, b) > rule.min_iou;
}

namespace {

bool any_overlap(const Detection& d, const FrameDetections& per_frame, int frame, const OverlapRule& rule) {
    const auto it = per_frame.find(frame);
    if (it == per_frame.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](const Detection& other) { return boxes_overlap(d.bbox, other.bbox, rule); });
}

}  // namespace

FrameDetections flash_filter(const FrameDetections& per_frame, const OverlapRule& rule) {
    rule.validate();
    FrameDetections out;
    for (const auto& [frame, dets] : per_frame) {
        auto& kept = out[frame];
        for (const auto& d : dets) {
            if (any_overlap(d, per_frame, frame + 1, rule) ||
                (rule.symmetric && any_overlap(d, per_frame, frame - 1, rule))) {
                kept.push_back(d);
            }
        }
    }
    return out;
}

double Track::mean_confidence() const {
    if (detections.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& d : detections) sum += d.confidence;
    return sum / static_cast<double>(detections.size());
}

void Track::validate(const OverlapRule& rule) const {
    if (detections.size() < 2) throw ValidationError("track shorter than 2 frames");
    for (std::size_t i = 1; i < detections.size(); ++i) {
        if (detections[i].frame_index != detections[i - 1].frame_index + 1) {
            throw ValidationError("track frames are not consecutive");
        }
        if (!boxes_overlap(detections[i - 1].bbox, detections[i].bbox, rule)) {
            throw ValidationError("track boxes do not overlap between frames " +
                                  std::to_string(detections[i - 1].frame_index) + " and " +
                                  std::to_string(detections[i].frame_index));
        }
    }
}

std::vector<Track> build_tracks(const FrameDetections& per_frame, const OverlapRule& rule) {
    rule.validate();
    std::vector<Track> chains;
    // chain id of each detection on the previous frame
    std::vector<int> prev_chain;
    const std::vector<Detection>* prev = nullptr;
    int prev_frame = 0;

    for (const auto& [frame, dets] : per_frame) {
        std::vector<int> cur_chain(dets.size(), -1);
        if (prev && frame == prev_frame + 1) {
            struct Link {
                double iou;
                std::size_t i, j;
            };
            std::vector<Link> links;
            for (std::size_t i = 0; i < prev->size(); ++i) {
                for (std::size_t j = 0; j < dets.size(); ++j) {
                    if (boxes_overlap((*prev)[i].bbox, dets[j].bbox, rule)) {
                        links.push_back({iou((*prev)[i].bbox, dets[j].bbox), i, j});
                    }
                }
            }
            std::stable_sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
                if (a.iou != b.iou) return a.iou > b.iou;
                if (a.i != b.i) return a.i < b.i;
                return a.j < b.j;
            });
            std::vector<bool> prev_used(prev->size(), false);
            for (const auto& l : links) {
                if (prev_used[l.i] || cur_chain[l.j] >= 0) continue;
                prev_used[l.i] = true;
                cur_chain[l.j] = prev_chain[l.i];
                chains[prev_chain[l.i]].detections.push_back(dets[l.j]);
            }
        }
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (cur_chain[j] >= 0) continue;
            cur_chain[j] = static_cast<int>(chains.size());
            chains.push_back({dets[j].clip_id, {dets[j]}});
        }
        prev_chain = std::move(cur_chain);
        prev = &dets;
        prev_frame = frame;
    }

    std::vector<Track> out;
    for (auto& c : chains) {
        if (c.detections.size() >= 2) out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Track& a, const Track& b) { return a.start_frame() < b.start_frame(); });
    return out;
}

void write_track_log(const std::filesystem::path& path, const std::vector<Track>& tracks) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    for (const auto& t : tracks) {
        json boxes = json::array();
        for (const auto& d : t.detections) {
            boxes.push_back({{"x", d.bbox.x}, {"y", d.bbox.y}, {"w", d.bbox.w}, {"h", d.bbox.h}, {"conf", d.confidence}});
        }
        json j = {{"clip_id", t.clip_id},
                  {"start_frame", t.start_frame()},
                  {"end_frame", t.end_frame()},
                  {"boxes", boxes},
                  {"mean_conf", t.mean_confidence()}};
        out << j.dump() << '\n';
    }
}

std::vector<Track> read_track_log(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError(path, "no such file");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::vector<Track> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Track t;
        try {
            const json j = json::parse(line);
            t.clip_id = j.at("clip_id").get<std::string>();
            const int start = j.at("start_frame").get<int>();
            const int end = j.at("end_frame").get<int>();
            const auto& boxes = j.at("boxes");
            if (static_cast<long long>(boxes.size()) != static_cast<long long>(end) - start + 1) {
                throw ParseError(path, lineno, "box count does not match start_frame..end_frame");
            }
            int frame = start;
            for (const auto& b : boxes) {
                Detection d;
                d.clip_id = t.clip_id;
                d.frame_index = frame++;
                d.bbox = {b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(), b.at("h").get<int>()};
                d.confidence = b.at("conf").get<double>();
                if (!d.bbox.valid()) throw ParseError(path, lineno, "w and h must be positive");
                if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw ParseError(path, lineno, "conf outside [0,1]");
                t.detections.push_back(std::move(d));
            }
        } catch (const json::exception& e) {
            throw ParseError(path, lineno, std::string("bad track record: ") + e.what());
        }
        if (t.detections.size() < 2) throw ParseError(path, lineno, "a track needs at least 2 boxes");
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace sonarpipe
