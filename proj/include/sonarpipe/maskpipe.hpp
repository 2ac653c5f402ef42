#pragma once

#include <optional>
#include <string_view>

#include "sonarpipe/types.hpp"

namespace sonarpipe {

/// 3x3 binary median (majority of 9), borders by edge replication.
BinaryMask median3x3(const BinaryMask& mask);

/// Erosion then dilation by the 5-pixel cross. Outside the mask counts as
/// background for the erosion and is ignored by the dilation.
BinaryMask open_cross3x3(const BinaryMask& mask);

BinaryMask erode_cross3x3(const BinaryMask& mask);
BinaryMask dilate_cross3x3(const BinaryMask& mask);

/// b -> b_f.
inline BinaryMask denoise_mask(const BinaryMask& b) { return open_cross3x3(median3x3(b)); }

/// Which inputs a composed frame carries.
enum class ComposeMode { R, RB, RB_F, RBB_F };

std::string_view to_string(ComposeMode mode);
ComposeMode compose_mode_from_string(std::string_view name);  // "r", "rb", "rb_f", "rbb_f"

bool mode_uses_b(ComposeMode mode);
bool mode_uses_bf(ComposeMode mode);

/// Detector input: blue = raw, green = b * 255, red = b_f * 255. Channels
/// not used by the mode are zero.
struct ComposedFrame {
    int width = 0;
    int height = 0;
    ComposeMode mode = ComposeMode::RBB_F;
    GrayImage red;
    GrayImage green;
    GrayImage blue;

    friend bool operator==(const ComposedFrame&, const ComposedFrame&) = default;
};

/// Throws ValidationError when a mask the mode needs is missing or any
/// input size differs from the raw frame.
ComposedFrame compose(const GrayImage& raw, const BinaryMask* b, const BinaryMask* b_f, ComposeMode mode);

struct ExtractedChannels {
    GrayImage raw;
    std::optional<BinaryMask> b;
    std::optional<BinaryMask> b_f;
};

/// Inverse of compose for the channels the mode populates.
ExtractedChannels extract_channels(const ComposedFrame& composed);

}  // namespace sonarpipe
