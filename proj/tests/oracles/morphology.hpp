#pragma once

// Brute-force neighbourhood oracles for the binary mask filters.

#include <algorithm>
#include <array>
#include <utility>

#include "sonarpipe/types.hpp"

namespace oracle {

/// Sorts the edge-replicated 3x3 neighbourhood and takes element 4.
inline sonarpipe::BinaryMask median_by_sort(const sonarpipe::BinaryMask& m) {
    sonarpipe::BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            std::array<int, 9> v{};
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = std::clamp(x + dx, 0, m.width - 1);
                    const int yy = std::clamp(y + dy, 0, m.height - 1);
                    v[n++] = m.at(xx, yy);
                }
            }
            std::sort(v.begin(), v.end());
            out.at(x, y) = static_cast<std::uint8_t>(v[4]);
        }
    }
    return out;
}

inline constexpr std::array<std::pair<int, int>, 5> kCross = {
    std::pair{0, 0}, std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}};

/// Minkowski erosion: keep p iff every p + s is inside and set.
inline sonarpipe::BinaryMask erode(const sonarpipe::BinaryMask& m) {
    sonarpipe::BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            bool all = true;
            for (auto [dx, dy] : kCross) {
                const int xx = x + dx, yy = y + dy;
                const bool inside = xx >= 0 && yy >= 0 && xx < m.width && yy < m.height;
                if (!inside || !m.at(xx, yy)) all = false;
            }
            out.at(x, y) = all ? 1 : 0;
        }
    }
    return out;
}

/// Minkowski dilation by scattering: every set p marks p + s.
inline sonarpipe::BinaryMask dilate(const sonarpipe::BinaryMask& m) {
    sonarpipe::BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            for (auto [dx, dy] : kCross) {
                const int xx = x + dx, yy = y + dy;
                if (xx >= 0 && yy >= 0 && xx < m.width && yy < m.height) out.at(xx, yy) = 1;
            }
        }
    }
    return out;
}

inline sonarpipe::BinaryMask open(const sonarpipe::BinaryMask& m) { return dilate(erode(m)); }

}  // namespace oracle
