#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <utility>

#include "sonarpipe/errors.hpp"
#include "sonarpipe/tracks.hpp"
#include "test_util.hpp"

using namespace sonarpipe;
using testutil::det;

namespace {

FrameDetections frames(std::initializer_list<Detection> dets) {
    FrameDetections out;
    for (const auto& d : dets) out[d.frame_index].push_back(d);
    return out;
}

std::size_t total(const FrameDetections& f) {
    std::size_t n = 0;
    for (const auto& [_, v] : f) n += v.size();
    return n;
}

// Confidences are distinct so equal detections never appear twice.
FrameDetections random_frames(std::mt19937_64& rng, int n_frames, int max_per_frame) {
    FrameDetections out;
    int serial = 0;
    for (int f = 0; f < n_frames; ++f) {
        auto& v = out[f];
        const int n = static_cast<int>(rng() % (max_per_frame + 1));
        for (int i = 0; i < n; ++i) {
            v.push_back(det(f, static_cast<int>(rng() % 40), static_cast<int>(rng() % 40),
                            1 + static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 10),
                            (++serial) / 1000.0));
        }
    }
    return out;
}

// Maximal chains when every detection overlaps at most one detection on
// each adjacent frame, found by walking forward from chain heads.
std::vector<std::vector<Detection>> unique_chains(const FrameDetections& f, const OverlapRule& rule) {
    auto neighbours = [&](const Detection& d, int frame) {
        std::vector<Detection> out;
        auto it = f.find(frame);
        if (it == f.end()) return out;
        for (const auto& e : it->second) {
            if (boxes_overlap(d.bbox, e.bbox, rule)) out.push_back(e);
        }
        return out;
    };
    std::vector<std::vector<Detection>> chains;
    for (const auto& [frame, dets] : f) {
        for (const auto& d : dets) {
            if (!neighbours(d, frame - 1).empty()) continue;
            std::vector<Detection> chain{d};
            for (;;) {
                const auto next = neighbours(chain.back(), chain.back().frame_index + 1);
                REQUIRE(next.size() <= 1);
                if (next.empty()) break;
                chain.push_back(next.front());
            }
            if (chain.size() >= 2) chains.push_back(chain);
        }
    }
    return chains;
}

}  // namespace

TEST_CASE("boxes_overlap") {
    OverlapRule r;
    CHECK(boxes_overlap({10, 10, 5, 5}, {12, 10, 5, 5}, r));
    CHECK_FALSE(boxes_overlap({0, 0, 5, 5}, {5, 0, 5, 5}, r));  // touching edges share no pixel
    r.min_iou = 0.5;
    CHECK_FALSE(boxes_overlap({10, 10, 5, 5}, {12, 10, 5, 5}, r));  // IoU 15/35
    CHECK(boxes_overlap({10, 10, 5, 5}, {11, 10, 5, 5}, r));        // IoU 20/30
    r.min_iou = 1.0;
    CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("flash filter removes an isolated detection") {
    const auto out = flash_filter(frames({det(5, 10, 10, 5, 5)}));
    CHECK(total(out) == 0);
    CHECK(out.count(5) == 1);
}

TEST_CASE("flash filter keeps overlapping detections on adjacent frames") {
    const auto in = frames({det(5, 10, 10, 5, 5), det(6, 12, 10, 5, 5)});
    CHECK(flash_filter(in) == in);
}

TEST_CASE("a frame gap breaks persistence") {
    const auto in = frames({det(5, 10, 10, 5, 5), det(7, 10, 10, 5, 5)});
    CHECK(total(flash_filter(in)) == 0);
}

TEST_CASE("asymmetric rule only looks ahead") {
    const auto in = frames({det(5, 10, 10, 5, 5), det(6, 12, 10, 5, 5)});
    OverlapRule r;
    r.symmetric = false;
    const auto out = flash_filter(in, r);
    CHECK(out.at(5).size() == 1);
    CHECK(out.at(6).empty());
}

TEST_CASE("flash filter properties on random input") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        OverlapRule rule;
        rule.min_iou = (i % 3) * 0.2;
        const auto in = random_frames(rng, 8, 4);
        const auto out = flash_filter(in, rule);
        CHECK(out.size() == in.size());
        for (const auto& [frame, dets] : out) {
            for (const auto& d : dets) {
                // Subset of the input.
                const auto& src = in.at(frame);
                CHECK(std::find(src.begin(), src.end(), d) != src.end());
                // Every survivor overlaps something on an adjacent input frame.
                bool found = false;
                for (int adj : {frame - 1, frame + 1}) {
                    auto it = in.find(adj);
                    if (it == in.end()) continue;
                    for (const auto& e : it->second) found = found || boxes_overlap(d.bbox, e.bbox, rule);
                }
                CHECK(found);
            }
        }
        // Every track built from the input lies within the filtered set.
        for (const auto& t : build_tracks(in, rule)) {
            for (const auto& d : t.detections) {
                const auto& kept = out.at(d.frame_index);
                CHECK(std::find(kept.begin(), kept.end(), d) != kept.end());
            }
        }
    }
}

TEST_CASE("three overlapping frames form one track") {
    const auto in = frames({det(0, 10, 10, 6, 6, 0.5), det(1, 12, 10, 6, 6, 0.7), det(2, 14, 10, 6, 6, 0.9)});
    const auto tracks = build_tracks(in);
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].length() == 3);
    CHECK(tracks[0].start_frame() == 0);
    CHECK(tracks[0].end_frame() == 2);
    CHECK(tracks[0].mean_confidence() == doctest::Approx(0.7));
    CHECK(tracks[0].clip_id == "c");
}

TEST_CASE("two disjoint fish give two tracks matching chain enumeration") {
    FrameDetections in;
    for (int f = 0; f < 6; ++f) {
        in[f].push_back(det(f, 100 - 3 * f, 50, 8, 4));  // moving left
        in[f].push_back(det(f, 10 + 3 * f, 10, 8, 4));   // moving right
    }
    in[6].push_back(det(6, 300, 300, 3, 3));  // lone flash
    const auto tracks = build_tracks(in);
    const auto chains = unique_chains(in, {});
    REQUIRE(tracks.size() == 2);
    std::vector<std::vector<Detection>> got;
    for (const auto& t : tracks) got.push_back(t.detections);
    for (const auto& c : chains) CHECK(std::find(got.begin(), got.end(), c) != got.end());
    CHECK(chains.size() == got.size());
}

TEST_CASE("greedy linking prefers the higher IoU pair") {
    // Frame 0 box overlaps both frame 1 boxes; the closer one wins.
    const auto in = frames({det(0, 10, 10, 10, 10), det(1, 18, 10, 10, 10), det(1, 11, 10, 10, 10)});
    const auto tracks = build_tracks(in);
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].detections[1].bbox.x == 11);
}

TEST_CASE("no detections gives no tracks") {
    CHECK(build_tracks({}).empty());
    CHECK(build_tracks(frames({det(0, 0, 0, 2, 2)})).empty());
}

TEST_CASE("track invariants on random input") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto in = random_frames(rng, 10, 5);
        const auto tracks = build_tracks(in);
        std::set<std::pair<int, std::size_t>> used;
        int prev_start = -1;
        for (const auto& t : tracks) {
            CHECK_NOTHROW(t.validate());
            CHECK(t.start_frame() >= prev_start);
            prev_start = t.start_frame();
            for (const auto& d : t.detections) {
                // Each detection belongs to at most one track.
                const auto& v = in.at(d.frame_index);
                const auto idx = static_cast<std::size_t>(std::find(v.begin(), v.end(), d) - v.begin());
                REQUIRE(idx < v.size());
                CHECK(used.insert({d.frame_index, idx}).second);
            }
        }
    }
}

TEST_CASE("invalid tracks are rejected") {
    Track t;
    t.clip_id = "c";
    t.detections = {det(0, 0, 0, 5, 5)};
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t.detections = {det(0, 0, 0, 5, 5), det(2, 0, 0, 5, 5)};
    CHECK_THROWS_AS(t.validate(), ValidationError);
    t.detections = {det(0, 0, 0, 5, 5), det(1, 50, 50, 5, 5)};
    CHECK_THROWS_AS(t.validate(), ValidationError);
}

TEST_CASE("track log round-trips") {
    testutil::TempDir dir("tracks");
    std::mt19937_64 rng(9);
    const auto tracks = build_tracks(random_frames(rng, 12, 4));
    REQUIRE(!tracks.empty());
    write_track_log(dir / "t.jsonl", tracks);
    CHECK(read_track_log(dir / "t.jsonl") == tracks);
    testutil::write_text(dir / "bad.jsonl", "{\"clip_id\":\"c\",\"start_frame\":0}\n");
    CHECK_THROWS_AS(read_track_log(dir / "bad.jsonl"), ParseError);
}
