#pragma once

#include <array>
#include <filesystem>

#include "sonarpipe/types.hpp"

namespace sonarpipe {

// 8-bit image files. The format follows the extension: .pgm (binary P5) or .png.

GrayImage read_gray_image(const std::filesystem::path& path);
void write_gray_image(const std::filesystem::path& path, const GrayImage& image);

/// Masks are stored as 0/255; any nonzero value reads back as 1.
void write_mask_image(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask_image(const std::filesystem::path& path);

/// Planes in semantic order {red, green, blue}; byte order on disk is whatever PNG uses.
using RgbPlanes = std::array<GrayImage, 3>;

void write_rgb_png(const std::filesystem::path& path, const RgbPlanes& planes);
RgbPlanes read_rgb_png(const std::filesystem::path& path);

}  // namespace sonarpipe
