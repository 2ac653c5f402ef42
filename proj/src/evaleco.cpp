#include "sonarpipe/evaleco.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "sonarpipe/errors.hpp"

namespace sonarpipe {

std::pair<double, double> track_interval(const Track& track, double frame_rate_hz) {
    return {track.start_frame() / frame_rate_hz, track.end_frame() / frame_rate_hz};
}

PassageMatching match_passages(const std::vector<Track>& tracks, const std::vector<PassageRecord>& passages,
                               double frame_rate_hz, double tol_s) {
    if (!(tol_s >= 0.0)) throw ValidationError("match_passages: tolerance must be >= 0");
    if (!(frame_rate_hz > 0.0)) throw ValidationError("match_passages: frame rate must be > 0");

    struct Pair {
        double distance;
        int start_frame;
        std::size_t passage;
        std::size_t track;
    };
    std::vector<Pair> pairs;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        const auto [lo, hi] = track_interval(tracks[t], frame_rate_hz);
        for (std::size_t p = 0; p < passages.size(); ++p) {
            const double ts = passages[p].timestamp_s;
            if (ts < lo - tol_s || ts > hi + tol_s) continue;
            const double dist = ts < lo ? lo - ts : (ts > hi ? ts - hi : 0.0);
            pairs.push_back({dist, tracks[t].start_frame(), p, t});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.start_frame != b.start_frame) return a.start_frame < b.start_frame;
        if (a.passage != b.passage) return a.passage < b.passage;
        return a.track < b.track;
    });

    std::vector<int> track_for(passages.size(), -1);
    std::vector<bool> track_used(tracks.size(), false);
    for (const auto& pr : pairs) {
        if (track_for[pr.passage] >= 0 || track_used[pr.track]) continue;
        track_for[pr.passage] = static_cast<int>(pr.track);
        track_used[pr.track] = true;
    }

    PassageMatching out;
    for (std::size_t p = 0; p < passages.size(); ++p) {
        PassageMatch m{passages[p], std::nullopt};
        if (track_for[p] >= 0) m.track = tracks[track_for[p]];
        out.matches.push_back(std::move(m));
    }
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        if (!track_used[t]) out.unmatched_tracks.push_back(tracks[t]);
    }
    return out;
}

std::optional<double> median(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::optional<double> CameraEcoStats::tn_percent() const {
    if (empty_clip_images == 0) return std::nullopt;
    return 100.0 * static_cast<double>(empty_clip_tn_images) / static_cast<double>(empty_clip_images);
}

namespace {

void add_clip(CameraEcoStats& cam, const EcoClipInput& clip) {
    ClipEcoStats cs;
    cs.clip_id = clip.clip_id;
    for (const auto& m : clip.matching.matches) {
        const auto key = std::make_pair(m.passage.species, m.passage.size_class);
        auto& cell = cam.cells[key];
        auto& size = cam.by_size[m.passage.size_class];
        ++cell.total;
        ++size.total;
        ++cam.total.total;
        if (m.is_tp()) {
            ++cell.tp;
            ++size.tp;
            ++cam.total.tp;
            ++cs.tp;
        } else {
            ++cs.fn;
        }
    }
    cs.fp = static_cast<long long>(clip.matching.unmatched_tracks.size());
    if (cs.tp > 0) cs.fp_tp_ratio = static_cast<double>(cs.fp) / static_cast<double>(cs.tp);

    if (clip.empty_clip) {
        long long with_detection = 0;
        for (const auto& [frame, dets] : clip.surviving) {
            if (!dets.empty() && frame >= 0 && static_cast<std::size_t>(frame) < clip.frame_count) ++with_detection;
        }
        cam.empty_clip_images += static_cast<long long>(clip.frame_count);
        cam.empty_clip_tn_images += static_cast<long long>(clip.frame_count) - with_detection;
    }
    cam.clips.push_back(std::move(cs));
}

void finish(CameraEcoStats& cam) {
    std::vector<double> ratios;
    cam.clips_excluded_from_median = 0;
    for (const auto& c : cam.clips) {
        if (c.fp_tp_ratio) {
            ratios.push_back(*c.fp_tp_ratio);
        } else {
            ++cam.clips_excluded_from_median;
        }
    }
    cam.median_fp_tp = median(std::move(ratios));
}

nlohmann::ordered_json camera_json(const CameraEcoStats& cam) {
    using oj = nlohmann::ordered_json;
    oj cells = oj::array();
    for (const auto& [key, cell] : cam.cells) {
        cells.push_back({{"species", key.first},
                         {"size_class", std::string(to_string(key.second))},
                         {"tp", cell.tp},
                         {"total", cell.total},
                         {"recall_percent", cell.recall_percent()}});
    }
    oj sizes = oj::array();
    for (const auto& [sc, cell] : cam.by_size) {
        sizes.push_back({{"size_class", std::string(to_string(sc))},
                         {"tp", cell.tp},
                         {"total", cell.total},
                         {"recall_percent", cell.recall_percent()}});
    }
    oj clips = oj::array();
    for (const auto& c : cam.clips) {
        oj row = {{"clip_id", c.clip_id}, {"tp", c.tp}, {"fn", c.fn}, {"fp", c.fp}};
        row["fp_tp_ratio"] = c.fp_tp_ratio ? oj(*c.fp_tp_ratio) : oj(nullptr);
        clips.push_back(std::move(row));
    }
    oj j;
    j["recall_by_cell"] = std::move(cells);
    j["recall_by_size_class"] = std::move(sizes);
    j["recall_total"] = {{"tp", cam.total.tp}, {"total", cam.total.total}, {"recall_percent", cam.total.recall_percent()}};
    const auto tn = cam.tn_percent();
    j["tn_percent"] = tn ? oj(*tn) : oj(nullptr);
    j["empty_clip_images"] = cam.empty_clip_images;
    j["empty_clip_tn_images"] = cam.empty_clip_tn_images;
    j["clips"] = std::move(clips);
    j["median_fp_tp"] = cam.median_fp_tp ? oj(*cam.median_fp_tp) : oj(nullptr);
    j["clips_excluded_from_median"] = cam.clips_excluded_from_median;
    return j;
}

}  // namespace

EcoEvalReport eco_report(const std::vector<EcoClipInput>& clips, double tolerance_s) {
    EcoEvalReport report;
    report.tolerance_s = tolerance_s;
    for (const auto& clip : clips) {
        if (clip.empty_clip && !clip.matching.matches.empty()) {
            throw ValidationError("eco report: clip '" + clip.clip_id + "' is declared empty but has " +
                                  std::to_string(clip.matching.matches.size()) + " logged passages");
        }
        add_clip(report.cameras[clip.camera], clip);
        add_clip(report.overall, clip);
    }
    for (auto& [cam, stats] : report.cameras) finish(stats);
    finish(report.overall);
    return report;
}

nlohmann::ordered_json to_json(const EcoEvalReport& report) {
    nlohmann::ordered_json j;
    j["config"] = {{"tolerance_s", report.tolerance_s},
                   {"passage_rule", "track of >= 2 consecutive overlapping frames within tolerance"},
                   {"median_excludes_clips_without_tp", true}};
    nlohmann::ordered_json cams;
    for (const auto& [cam, stats] : report.cameras) cams[std::string(to_string(cam))] = camera_json(stats);
    j["cameras"] = std::move(cams);
    j["overall"] = camera_json(report.overall);
    return j;
}

std::string format_recall_table(const EcoEvalReport& report) {
    std::ostringstream os;
    auto cell_text = [](const CellStats* c) {
        if (!c || c->total == 0) return std::string("-");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%lld/%lld (%.1f%%)", c->tp, c->total, c->recall_percent());
        return std::string(buf);
    };
    auto row = [&os](const std::string& head, const std::vector<std::string>& cols) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%-16s", head.c_str());
        os << buf;
        for (const auto& c : cols) {
            std::snprintf(buf, sizeof buf, " %-18s", c.c_str());
            os << buf;
        }
        os << '\n';
    };
    for (const auto& [cam, stats] : report.cameras) {
        os << "Recall (%TP) by size class, " << to_string(cam) << ", tolerance " << report.tolerance_s << " s\n";
        std::vector<std::string> head;
        for (SizeClass sc : kAllSizeClasses) head.push_back(std::string(to_string(sc)) + " cm");
        head.push_back("total");
        row("species", head);
        std::set<std::string> species;
        for (const auto& [key, c] : stats.cells) species.insert(key.first);
        for (const auto& sp : species) {
            std::vector<std::string> cols;
            CellStats sum;
            for (SizeClass sc : kAllSizeClasses) {
                const auto it = stats.cells.find({sp, sc});
                const CellStats* c = it == stats.cells.end() ? nullptr : &it->second;
                if (c) {
                    sum.tp += c->tp;
                    sum.total += c->total;
                }
                cols.push_back(cell_text(c));
            }
            cols.push_back(cell_text(&sum));
            row(sp, cols);
        }
        std::vector<std::string> totals;
        for (SizeClass sc : kAllSizeClasses) {
            const auto it = stats.by_size.find(sc);
            totals.push_back(cell_text(it == stats.by_size.end() ? nullptr : &it->second));
        }
        totals.push_back(cell_text(&stats.total));
        row("all", totals);
        auto fixed2 = [](const std::optional<double>& v) {
            if (!v) return std::string("n/a");
            char b[32];
            std::snprintf(b, sizeof b, "%.2f", *v);
            return std::string(b);
        };
        char buf[160];
        std::snprintf(buf, sizeof buf, "TN%% on empty clips: %s   median FP/TP: %s (%zu clips without TP excluded)\n",
                      fixed2(stats.tn_percent()).c_str(), fixed2(stats.median_fp_tp).c_str(),
                      stats.clips_excluded_from_median);
        os << buf << '\n';
    }
    return os.str();
}

}  // namespace sonarpipe
