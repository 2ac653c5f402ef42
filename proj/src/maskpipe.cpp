#include "sonarpipe/maskpipe.hpp"

#include <algorithm>

#include "sonarpipe/errors.hpp"

namespace sonarpipe {

BinaryMask median3x3(const BinaryMask& mask) {
    const int w = mask.width;
    const int h = mask.height;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        const int rows[3] = {std::max(y - 1, 0), y, std::min(y + 1, h - 1)};
        for (int x = 0; x < w; ++x) {
            const int cols[3] = {std::max(x - 1, 0), x, std::min(x + 1, w - 1)};
            int ones = 0;
            for (int yy : rows) {
                for (int xx : cols) ones += mask.at(xx, yy);
            }
            out.at(x, y) = ones >= 5 ? 1 : 0;
        }
    }
    return out;
}

BinaryMask erode_cross3x3(const BinaryMask& mask) {
    const int w = mask.width;
    const int h = mask.height;
    BinaryMask out(w, h);
    for (int y = 1; y + 1 < h; ++y) {
        for (int x = 1; x + 1 < w; ++x) {
            out.at(x, y) = mask.at(x, y) && mask.at(x - 1, y) && mask.at(x + 1, y) && mask.at(x, y - 1) &&
                           mask.at(x, y + 1);
        }
    }
    return out;
}

BinaryMask dilate_cross3x3(const BinaryMask& mask) {
    const int w = mask.width;
    const int h = mask.height;
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(x, y) = mask.at(x, y) || (x > 0 && mask.at(x - 1, y)) || (x + 1 < w && mask.at(x + 1, y)) ||
                           (y > 0 && mask.at(x, y - 1)) || (y + 1 < h && mask.at(x, y + 1));
        }
    }
    return out;
}

BinaryMask open_cross3x3(const BinaryMask& mask) { return dilate_cross3x3(erode_cross3x3(mask)); }

std::string_view to_string(ComposeMode mode) {
    switch (mode) {
        case ComposeMode::R: return "r";
        case ComposeMode::RB: return "rb";
        case ComposeMode::RB_F: return "rb_f";
        case ComposeMode::RBB_F: return "rbb_f";
    }
    return "?";
}

ComposeMode compose_mode_from_string(std::string_view name) {
    for (auto m : {ComposeMode::R, ComposeMode::RB, ComposeMode::RB_F, ComposeMode::RBB_F}) {
        if (to_string(m) == name) return m;
    }
    throw ValidationError("unknown compose mode '" + std::string(name) + "' (expected r, rb, rb_f or rbb_f)");
}

bool mode_uses_b(ComposeMode mode) { return mode == ComposeMode::RB || mode == ComposeMode::RBB_F; }
bool mode_uses_bf(ComposeMode mode) { return mode == ComposeMode::RB_F || mode == ComposeMode::RBB_F; }

namespace {

GrayImage scale_mask(const BinaryMask& m) {
    GrayImage img(m.width, m.height);
    std::transform(m.bits.begin(), m.bits.end(), img.data.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
    return img;
}

BinaryMask unscale(const GrayImage& img) {
    BinaryMask m(img.width, img.height);
    std::transform(img.data.begin(), img.data.end(), m.bits.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 1 : 0); });
    return m;
}

void require_mask(const BinaryMask* m, const GrayImage& raw, const char* name, ComposeMode mode) {
    if (!m) {
        throw ValidationError("compose: mode " + std::string(to_string(mode)) + " requires the " + name + " mask");
    }
    if (m->width != raw.width || m->height != raw.height) {
        throw ValidationError(std::string("compose: ") + name + " mask size differs from the raw frame");
    }
}

}  // namespace

ComposedFrame compose(const GrayImage& raw, const BinaryMask* b, const BinaryMask* b_f, ComposeMode mode) {
    ComposedFrame out;
    out.width = raw.width;
    out.height = raw.height;
    out.mode = mode;
    out.blue = raw;
    if (mode_uses_b(mode)) {
        require_mask(b, raw, "b", mode);
        out.green = scale_mask(*b);
    } else {
        out.green = GrayImage(raw.width, raw.height);
    }
    if (mode_uses_bf(mode)) {
        require_mask(b_f, raw, "b_f", mode);
        out.red = scale_mask(*b_f);
    } else {
        out.red = GrayImage(raw.width, raw.height);
    }
    return out;
}

ExtractedChannels extract_channels(const ComposedFrame& composed) {
    ExtractedChannels out{composed.blue, std::nullopt, std::nullopt};
    if (mode_uses_b(composed.mode)) out.b = unscale(composed.green);
    if (mode_uses_bf(composed.mode)) out.b_f = unscale(composed.red);
    return out;
}

}  // namespace sonarpipe
