// sonarpipe command-line front end.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sonarpipe/clipio.hpp"
#include "sonarpipe/errors.hpp"
#include "sonarpipe/pipeline.hpp"
#include "sonarpipe/synth.hpp"

namespace fs = std::filesystem;
using namespace sonarpipe;
using ojson = nlohmann::ordered_json;

namespace {

struct PipelineFlags {
    std::string preset;  // empty: camera from the manifest
    std::string mode = "rbb_f";
    int min_area = 20;
    int connectivity = 8;
    std::string confidence_rule = "area";
    double tau = 0.25;
    double min_iou = 0.0;
    bool next_only = false;
    std::string dump_masks;
    std::string dump_composed;
    std::string external;
};

void add_detector_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("--min-area", f.min_area, "Baseline detector: minimum component area in pixels")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--connectivity", f.connectivity, "Baseline detector: 4 or 8")->check(CLI::IsMember({4, 8}));
    cmd->add_option("--confidence-rule", f.confidence_rule, "Baseline detector confidence: area or intensity")
        ->check(CLI::IsMember({"area", "intensity"}));
    cmd->add_option("--tau", f.tau, "Confidence threshold")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--external", f.external, "Use detections from this JSON-lines log instead of the baseline");
}

void add_background_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("--preset", f.preset, "Camera preset overriding the manifest camera")
        ->check(CLI::IsMember({"DIDSON", "ARIS"}));
    cmd->add_option("--mode", f.mode, "Composition mode")->check(CLI::IsMember({"r", "rb", "rb_f", "rbb_f"}));
    cmd->add_option("--dump-masks", f.dump_masks, "Write b and b_f masks to this directory");
    cmd->add_option("--dump-composed", f.dump_composed, "Write composed RGB frames to this directory");
}

void add_track_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("--min-iou", f.min_iou, "IoU above which boxes on adjacent frames overlap")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--next-only", f.next_only, "Flash filter looks at the next frame only");
}

PipelineConfig make_config(const PipelineFlags& f, const DetectionLog* external) {
    PipelineConfig c;
    if (!f.preset.empty()) c.background = background_preset(camera_from_string(f.preset));
    c.mode = compose_mode_from_string(f.mode);
    c.baseline.min_area_px = f.min_area;
    c.baseline.connectivity = f.connectivity == 4 ? Connectivity::Four : Connectivity::Eight;
    c.baseline.confidence_rule = f.confidence_rule == "area" ? ConfidenceRule::AreaSaturating
                                                             : ConfidenceRule::MeanIntensity;
    c.confidence_threshold = f.tau;
    c.overlap.min_iou = f.min_iou;
    c.overlap.symmetric = !f.next_only;
    c.external = external;
    if (!f.dump_masks.empty()) {
        fs::create_directories(f.dump_masks);
        c.dump_masks = f.dump_masks;
    }
    if (!f.dump_composed.empty()) {
        fs::create_directories(f.dump_composed);
        c.dump_composed = f.dump_composed;
    }
    return c;
}

std::vector<Detection> flatten(const FrameDetections& per_frame) {
    std::vector<Detection> out;
    for (const auto& [frame, dets] : per_frame) out.insert(out.end(), dets.begin(), dets.end());
    return out;
}

unsigned resolve_jobs(unsigned requested) {
    if (const char* env = std::getenv("SONARPIPE_JOBS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        throw ValidationError(std::string("SONARPIPE_JOBS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, requested);
}

/// Runs every clip, `jobs` clips at a time; results keep manifest order.
std::vector<ClipResult> run_clips(const std::vector<std::string>& manifests, const PipelineConfig& config,
                                  unsigned jobs) {
    std::vector<ClipResult> results(manifests.size());
    std::vector<std::exception_ptr> errors(manifests.size());
    auto work = [&](std::size_t i) {
        try {
            const LoadedClip clip = [&] {
                try {
                    return load_clip(manifests[i]);
                } catch (const Error& e) {
                    throw StageError("load", manifests[i], e.what());
                }
            }();
            results[i] = run_clip(clip.manifest, clip.frames, config);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (jobs <= 1 || manifests.size() <= 1) {
        for (std::size_t i = 0; i < manifests.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, manifests.size()); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next++) < manifests.size();) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

void write_json(const std::string& path, const ojson& j) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << j.dump(2) << '\n';
}

std::vector<PassageRecord> read_all_passages(const std::vector<std::string>& paths) {
    std::vector<PassageRecord> all;
    for (const auto& p : paths) {
        auto part = read_passages(p);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

std::vector<EvalImage> load_eval_images(const std::vector<std::string>& manifests, const std::vector<std::string>& gt_dirs,
                                        const std::map<std::string, FrameDetections>& detections) {
    if (manifests.size() != gt_dirs.size()) {
        throw ValidationError("give one --gt directory per --manifest");
    }
    std::vector<EvalImage> images;
    for (std::size_t i = 0; i < manifests.size(); ++i) {
        const auto m = read_manifest(manifests[i]);
        const auto ann = load_annotations(gt_dirs[i], m.width_px, m.height_px, true);
        const auto it = detections.find(m.clip_id);
        auto part = eval_images(m.clip_id, it == detections.end() ? FrameDetections{} : it->second, ann);
        images.insert(images.end(), part.begin(), part.end());
    }
    return images;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acoustic-camera fish detection pipeline and evaluation"};
    app.require_subcommand(1);
    std::string active = "cli";

    // preprocess
    PipelineFlags pre_flags;
    std::vector<std::string> pre_manifests;
    auto* pre = app.add_subcommand("preprocess", "Background subtraction and mask denoising; dumps masks/composed frames");
    pre->add_option("--manifest", pre_manifests, "Clip manifest (repeatable)")->required()->check(CLI::ExistingFile);
    add_background_flags(pre, pre_flags);

    // detect
    PipelineFlags det_flags;
    std::vector<std::string> det_manifests;
    std::string det_out;
    auto* det = app.add_subcommand("detect", "Detect fish with the baseline detector or filter an external log");
    det->add_option("--manifest", det_manifests, "Clip manifest (repeatable)")->required()->check(CLI::ExistingFile);
    det->add_option("--out", det_out, "Detection log (JSON lines)")->required();
    add_background_flags(det, det_flags);
    add_detector_flags(det, det_flags);

    // track-filter
    PipelineFlags trk_flags;
    std::string trk_in, trk_tracks, trk_surviving;
    auto* trk = app.add_subcommand("track-filter", "Flash filter and track building on a detection log");
    trk->add_option("--detections", trk_in, "Detection log (JSON lines)")->required()->check(CLI::ExistingFile);
    trk->add_option("--tracks", trk_tracks, "Track log to write")->required();
    trk->add_option("--surviving", trk_surviving, "Write the detections surviving the flash filter");
    add_track_flags(trk, trk_flags);

    // eval-model
    std::string em_pred, em_out, em_interp = "all-point";
    std::vector<std::string> em_gt, em_manifests;
    double em_iou = 0.5, em_tau = 0.25;
    auto* em = app.add_subcommand("eval-model", "Frame-level metrics: P/R/F1, AP@IoU, kappa, confusion");
    em->add_option("--pred", em_pred, "Detection log (JSON lines)")->required()->check(CLI::ExistingFile);
    em->add_option("--gt", em_gt, "Annotation directory, one per --manifest")->required()->check(CLI::ExistingDirectory);
    em->add_option("--manifest", em_manifests, "Clip manifest giving clip id and frame size")
        ->required()
        ->check(CLI::ExistingFile);
    em->add_option("--iou", em_iou, "IoU threshold")->check(CLI::Range(0.0, 1.0));
    em->add_option("--tau", em_tau, "Confidence threshold for P/R/F1 and kappa")->check(CLI::Range(0.0, 1.0));
    em->add_option("--interp", em_interp, "AP interpolation")->check(CLI::IsMember({"all-point", "11-point"}));
    em->add_option("--out", em_out, "Report path ('-' for stdout)");

    // eval-eco
    std::string ee_tracks, ee_out, ee_empty, ee_surviving;
    std::vector<std::string> ee_passages, ee_manifests;
    double ee_tol = 10.0;
    auto* ee = app.add_subcommand("eval-eco", "Passage-level metrics: recall by size class, TN%, FP/TP median");
    ee->add_option("--tracks", ee_tracks, "Track log")->required()->check(CLI::ExistingFile);
    ee->add_option("--passages", ee_passages, "Passage CSV (repeatable)")->check(CLI::ExistingFile);
    ee->add_option("--manifest", ee_manifests, "Clip manifest (repeatable)")->required()->check(CLI::ExistingFile);
    ee->add_option("--empty-clips", ee_empty, "File listing fish-free clip ids")->check(CLI::ExistingFile);
    ee->add_option("--detections", ee_surviving,
                   "Surviving detections for TN% (defaults to the detections inside tracks)")
        ->check(CLI::ExistingFile);
    ee->add_option("--tolerance", ee_tol, "Passage time tolerance in seconds")->check(CLI::NonNegativeNumber);
    ee->add_option("--out", ee_out, "Report path ('-' for stdout)");

    // synth
    std::uint64_t sy_seed = 0;
    int sy_frames = 300, sy_fish = 5, sy_width = 608, sy_height = 480;
    double sy_fps = 5.0;
    std::string sy_out, sy_camera = "DIDSON";
    auto* sy = app.add_subcommand("synth", "Generate a synthetic clip with ground truth");
    sy->add_option("--seed", sy_seed, "Random seed");
    sy->add_option("--frames", sy_frames, "Number of frames")->check(CLI::PositiveNumber);
    sy->add_option("--fish", sy_fish, "Number of fish")->check(CLI::NonNegativeNumber);
    sy->add_option("--width", sy_width, "Frame width")->check(CLI::PositiveNumber);
    sy->add_option("--height", sy_height, "Frame height")->check(CLI::PositiveNumber);
    sy->add_option("--fps", sy_fps, "Frame rate")->check(CLI::PositiveNumber);
    sy->add_option("--camera", sy_camera, "Camera recorded in the manifest")->check(CLI::IsMember({"DIDSON", "ARIS"}));
    sy->add_option("--out", sy_out, "Output directory")->required();

    // run
    PipelineFlags run_flags;
    std::vector<std::string> run_manifests, run_passages, run_gt;
    std::string run_out, run_empty, run_interp = "all-point";
    double run_tol = 10.0, run_iou = 0.5;
    unsigned run_jobs = 1;
    auto* run = app.add_subcommand("run", "Full pipeline with evaluation reports");
    run->add_option("--manifest", run_manifests, "Clip manifest (repeatable)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", run_out, "Output directory")->required();
    run->add_option("--passages", run_passages, "Passage CSV (repeatable)")->check(CLI::ExistingFile);
    run->add_option("--empty-clips", run_empty, "File listing fish-free clip ids")->check(CLI::ExistingFile);
    run->add_option("--gt", run_gt, "Annotation directory, one per --manifest, enables eval-model")
        ->check(CLI::ExistingDirectory);
    run->add_option("--tolerance", run_tol, "Passage time tolerance in seconds")->check(CLI::NonNegativeNumber);
    run->add_option("--iou", run_iou, "IoU threshold for frame-level evaluation")->check(CLI::Range(0.0, 1.0));
    run->add_option("--interp", run_interp, "AP interpolation")->check(CLI::IsMember({"all-point", "11-point"}));
    run->add_option("--jobs", run_jobs, "Clips processed in parallel (SONARPIPE_JOBS overrides)")
        ->check(CLI::PositiveNumber);
    add_background_flags(run, run_flags);
    add_detector_flags(run, run_flags);
    add_track_flags(run, run_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed()) {
            active = "preprocess";
            if (pre_flags.dump_masks.empty() && pre_flags.dump_composed.empty()) {
                throw ValidationError("nothing to write: give --dump-masks and/or --dump-composed");
            }
            // Detection and tracking are cheap next to the background model; the
            // result is discarded.
            const auto config = make_config(pre_flags, nullptr);
            run_clips(pre_manifests, config, 1);
        } else if (det->parsed()) {
            active = "detect";
            DetectionLog external;
            if (!det_flags.external.empty()) external = read_detection_log(det_flags.external);
            const auto config = make_config(det_flags, det_flags.external.empty() ? nullptr : &external);
            std::vector<Detection> all;
            for (const auto& r : run_clips(det_manifests, config, 1)) {
                const auto part = flatten(r.raw);
                all.insert(all.end(), part.begin(), part.end());
            }
            write_detection_log(det_out, all);
            std::cerr << "detect: " << all.size() << " detections\n";
        } else if (trk->parsed()) {
            active = "track-filter";
            const auto log = read_detection_log(trk_in);
            OverlapRule rule;
            rule.min_iou = trk_flags.min_iou;
            rule.symmetric = !trk_flags.next_only;
            std::set<std::string> clips;
            for (const auto& [key, _] : log) clips.insert(key.first);
            std::vector<Track> tracks;
            std::vector<Detection> surviving;
            for (const auto& clip : clips) {
                const auto kept = flash_filter(frames_of(log, clip), rule);
                auto part = build_tracks(kept, rule);
                tracks.insert(tracks.end(), part.begin(), part.end());
                const auto flat = flatten(kept);
                surviving.insert(surviving.end(), flat.begin(), flat.end());
            }
            write_track_log(trk_tracks, tracks);
            if (!trk_surviving.empty()) write_detection_log(trk_surviving, surviving);
            std::cerr << "track-filter: " << surviving.size() << " surviving detections, " << tracks.size()
                      << " tracks\n";
        } else if (em->parsed()) {
            active = "eval-model";
            const auto log = read_detection_log(em_pred);
            std::map<std::string, FrameDetections> by_clip;
            for (const auto& m : em_manifests) {
                const auto id = read_manifest(m).clip_id;
                by_clip[id] = frames_of(log, id);
            }
            const auto images = load_eval_images(em_manifests, em_gt, by_clip);
            ModelEvalConfig cfg;
            cfg.iou_threshold = em_iou;
            cfg.confidence_threshold = em_tau;
            cfg.interpolation = ap_interpolation_from_string(em_interp);
            write_json(em_out, to_json(evaluate_model(images, cfg)));
        } else if (ee->parsed()) {
            active = "eval-eco";
            const auto track_log = read_track_log(ee_tracks);
            const DetectionLog surviving_log = ee_surviving.empty() ? DetectionLog{} : read_detection_log(ee_surviving);
            std::vector<ClipResult> results;
            for (const auto& path : ee_manifests) {
                const auto m = read_manifest(path);
                ClipResult r;
                r.clip_id = m.clip_id;
                r.camera = m.camera;
                r.frame_count = m.frame_count();
                r.frame_rate_hz = m.frame_rate_hz;
                for (const auto& t : track_log) {
                    if (t.clip_id == m.clip_id) r.tracks.push_back(t);
                }
                if (ee_surviving.empty()) {
                    for (const auto& t : r.tracks) {
                        for (const auto& d : t.detections) r.surviving[d.frame_index].push_back(d);
                    }
                } else {
                    r.surviving = frames_of(surviving_log, m.clip_id);
                }
                results.push_back(std::move(r));
            }
            const auto empty = ee_empty.empty() ? std::vector<std::string>{} : read_id_list(ee_empty);
            const auto report = evaluate_eco(results, read_all_passages(ee_passages), empty, ee_tol);
            std::cout << format_recall_table(report);
            if (!ee_out.empty()) write_json(ee_out, to_json(report));
        } else if (sy->parsed()) {
            active = "synth";
            auto cfg = random_synth_config(sy_seed, sy_frames, sy_fish, sy_width, sy_height);
            cfg.camera = camera_from_string(sy_camera);
            cfg.frame_rate_hz = sy_fps;
            auto clip = gen_clip(cfg);
            write_synth_clip(sy_out, clip);
            std::cerr << "synth: wrote " << clip.frames.size() << " frames and " << clip.passages.size()
                      << " passages to " << sy_out << '\n';
        } else if (run->parsed()) {
            active = "run";
            DetectionLog external;
            if (!run_flags.external.empty()) external = read_detection_log(run_flags.external);
            const auto config = make_config(run_flags, run_flags.external.empty() ? nullptr : &external);
            const auto results = run_clips(run_manifests, config, resolve_jobs(run_jobs));

            const fs::path out(run_out);
            fs::create_directories(out);
            std::vector<Detection> raw, surviving;
            std::vector<Track> tracks;
            ojson clips = ojson::array();
            ojson configs = ojson::object();
            for (const auto& r : results) {
                auto a = flatten(r.raw), b = flatten(r.surviving);
                raw.insert(raw.end(), a.begin(), a.end());
                surviving.insert(surviving.end(), b.begin(), b.end());
                tracks.insert(tracks.end(), r.tracks.begin(), r.tracks.end());
                clips.push_back({{"clip_id", r.clip_id},
                                 {"camera", std::string(to_string(r.camera))},
                                 {"frames", r.frame_count},
                                 {"detections", a.size()},
                                 {"surviving_detections", b.size()},
                                 {"tracks", r.tracks.size()}});
                const std::string cam(to_string(r.camera));
                if (!configs.contains(cam)) configs[cam] = config.to_json(r.camera);
            }
            write_detection_log(out / "detections.jsonl", raw);
            write_detection_log(out / "surviving.jsonl", surviving);
            write_track_log(out / "tracks.jsonl", tracks);

            ojson report;
            report["pipeline"] = std::move(configs);
            report["clips"] = std::move(clips);
            if (!run_passages.empty() || !run_empty.empty()) {
                active = "eval-eco";
                const auto empty = run_empty.empty() ? std::vector<std::string>{} : read_id_list(run_empty);
                const auto eco = evaluate_eco(results, read_all_passages(run_passages), empty, run_tol);
                std::cout << format_recall_table(eco);
                report["eco"] = to_json(eco);
            }
            if (!run_gt.empty()) {
                active = "eval-model";
                std::map<std::string, FrameDetections> by_clip;
                for (const auto& r : results) by_clip[r.clip_id] = r.raw;
                ModelEvalConfig cfg;
                cfg.iou_threshold = run_iou;
                cfg.confidence_threshold = run_flags.tau;
                cfg.interpolation = ap_interpolation_from_string(run_interp);
                report["model"] = to_json(evaluate_model(load_eval_images(run_manifests, run_gt, by_clip), cfg));
            }
            write_json((out / "report.json").string(), report);
        }
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: [" << active << "] " << e.what() << '\n';
        return 2;
    }
    return 0;
}
