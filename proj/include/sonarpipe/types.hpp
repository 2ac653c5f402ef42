#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sonarpipe {

enum class Camera { DIDSON, ARIS };

/// Operator size classes, in centimetres: 20-40, 40-60, 60-80, >80.
enum class SizeClass { S20_40, S40_60, S60_80, GT80 };

enum class Direction { UP, DOWN, UNKNOWN };

inline constexpr SizeClass kAllSizeClasses[] = {SizeClass::S20_40, SizeClass::S40_60,
                                                SizeClass::S60_80, SizeClass::GT80};

std::string_view to_string(Camera camera);
std::string_view to_string(SizeClass size_class);
std::string_view to_string(Direction direction);

// Parsers throw ValidationError on unknown names. Size classes use the
// on-disk spelling ("20-40", "40-60", "60-80", ">80").
Camera camera_from_string(std::string_view name);
SizeClass size_class_from_string(std::string_view name);
Direction direction_from_string(std::string_view name);

/// Size class for a body length; lengths under 20 cm fall in the smallest class.
SizeClass size_class_for_length_cm(double length_cm);

/// Axis-aligned box in pixel units, top-left anchored.
struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }
    int right() const { return x + w; }    // exclusive
    int bottom() const { return y + h; }   // exclusive
    bool valid() const { return w > 0 && h > 0; }
    bool inside(int width, int height) const {
        return x >= 0 && y >= 0 && right() <= width && bottom() <= height;
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

long long intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Row-major 8-bit single-channel image.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Row-major {0,1} mask, 1 = foreground.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct Frame {
    std::string clip_id;
    int index = 0;
    double timestamp_s = 0.0;
    GrayImage image;

    int width() const { return image.width; }
    int height() const { return image.height; }
};

struct Annotation {
    int frame_index = 0;
    BoundingBox bbox;
    std::string label;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// A scored single-class ("fish") box on one frame.
struct Detection {
    static constexpr std::string_view label = "fish";

    std::string clip_id;
    int frame_index = 0;
    BoundingBox bbox;
    double confidence = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct PassageRecord {
    std::string clip_id;
    double timestamp_s = 0.0;
    std::string species = "generic";
    SizeClass size_class = SizeClass::S20_40;
    Direction direction = Direction::UNKNOWN;

    friend bool operator==(const PassageRecord&, const PassageRecord&) = default;
};

/// Detections of one clip keyed by frame index.
using FrameDetections = std::map<int, std::vector<Detection>>;

/// Annotations of one clip keyed by frame index.
using AnnotationMap = std::map<int, std::vector<Annotation>>;

}  // namespace sonarpipe
