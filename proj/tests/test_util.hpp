#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

#include "sonarpipe/types.hpp"

namespace testutil {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("sonarpipe_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << text;
}

inline sonarpipe::BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
    std::bernoulli_distribution coin(density);
    sonarpipe::BinaryMask m(w, h);
    for (auto& b : m.bits) b = coin(rng) ? 1 : 0;
    return m;
}

inline sonarpipe::Detection det(int frame, int x, int y, int w, int h, double conf = 0.9,
                                const std::string& clip = "c") {
    sonarpipe::Detection d;
    d.clip_id = clip;
    d.frame_index = frame;
    d.bbox = {x, y, w, h};
    d.confidence = conf;
    return d;
}

inline sonarpipe::Annotation gt(int frame, int x, int y, int w, int h) {
    return {frame, {x, y, w, h}, "fish"};
}

}  // namespace testutil
