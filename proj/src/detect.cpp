#include "sonarpipe/detect.hpp"

#include <algorithm>

#include "sonarpipe/errors.hpp"

namespace sonarpipe {

void BaselineParams::validate() const {
    if (min_area_px < 1) throw ValidationError("detect: min_area_px must be >= 1");
    if (connectivity != Connectivity::Four && connectivity != Connectivity::Eight) {
        throw ValidationError("detect: connectivity must be 4 or 8");
    }
}

ComponentLabels label_components(const BinaryMask& mask, Connectivity connectivity) {
    const int w = mask.width;
    const int h = mask.height;
    ComponentLabels out{w, h, 0, std::vector<int>(mask.bits.size(), 0)};
    std::vector<int> stack;
    const bool eight = connectivity == Connectivity::Eight;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            const std::size_t p0 = static_cast<std::size_t>(y0) * w + x0;
            if (!mask.bits[p0] || out.labels[p0]) continue;
            const int label = ++out.count;
            out.labels[p0] = label;
            stack.push_back(static_cast<int>(p0));
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                const int x = p % w;
                const int y = p / w;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) continue;
                        const int nx = x + dx;
                        const int ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
                        if (mask.bits[q] && !out.labels[q]) {
                            out.labels[q] = label;
                            stack.push_back(static_cast<int>(q));
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::vector<Detection> detect_cc(const BinaryMask& b_f, const Frame& raw, const BaselineParams& params) {
    params.validate();
    if (b_f.width != raw.width() || b_f.height != raw.height()) {
        throw ValidationError("detect: mask size differs from frame " + std::to_string(raw.index));
    }
    const ComponentLabels cc = label_components(b_f, params.connectivity);

    struct Stats {
        int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
        long long area = 0;
        long long intensity = 0;
    };
    std::vector<Stats> stats(static_cast<std::size_t>(cc.count) + 1);
    for (int y = 0; y < cc.height; ++y) {
        for (int x = 0; x < cc.width; ++x) {
            const int label = cc.labels[static_cast<std::size_t>(y) * cc.width + x];
            if (!label) continue;
            Stats& s = stats[label];
            if (s.area == 0) {
                s.x0 = s.x1 = x;
                s.y0 = s.y1 = y;
            } else {
                s.x0 = std::min(s.x0, x);
                s.x1 = std::max(s.x1, x);
                s.y0 = std::min(s.y0, y);
                s.y1 = std::max(s.y1, y);
            }
            ++s.area;
            s.intensity += raw.image.at(x, y);
        }
    }

    std::vector<Detection> out;
    for (int label = 1; label <= cc.count; ++label) {
        const Stats& s = stats[label];
        if (s.area < params.min_area_px) continue;
        Detection d;
        d.clip_id = raw.clip_id;
        d.frame_index = raw.index;
        d.bbox = {s.x0, s.y0, s.x1 - s.x0 + 1, s.y1 - s.y0 + 1};
        if (params.confidence_rule == ConfidenceRule::AreaSaturating) {
            d.confidence = std::min(1.0, static_cast<double>(s.area) / (4.0 * params.min_area_px));
        } else {
            d.confidence = static_cast<double>(s.intensity) / static_cast<double>(s.area) / 255.0;
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<Detection> filter_confidence(const std::vector<Detection>& detections, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("filter_confidence: tau must be in [0,1]");
    std::vector<Detection> out;
    std::copy_if(detections.begin(), detections.end(), std::back_inserter(out),
                 [tau](const Detection& d) { return d.confidence >= tau; });
    return out;
}

FrameDetections filter_confidence(const FrameDetections& detections, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("filter_confidence: tau must be in [0,1]");
    FrameDetections out;
    for (const auto& [frame, dets] : detections) {
        auto kept = filter_confidence(dets, tau);
        if (!kept.empty()) out.emplace(frame, std::move(kept));
    }
    return out;
}

}  // namespace sonarpipe
