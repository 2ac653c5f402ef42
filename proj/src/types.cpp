#include "sonarpipe/types.hpp"

#include <algorithm>
#include <numeric>

#include "sonarpipe/errors.hpp"

namespace sonarpipe {

std::string_view to_string(Camera camera) {
    switch (camera) {
        case Camera::DIDSON: return "DIDSON";
        case Camera::ARIS: return "ARIS";
    }
    return "?";
}

std::string_view to_string(SizeClass size_class) {
    switch (size_class) {
        case SizeClass::S20_40: return "20-40";
        case SizeClass::S40_60: return "40-60";
        case SizeClass::S60_80: return "60-80";
        case SizeClass::GT80: return ">80";
    }
    return "?";
}

std::string_view to_string(Direction direction) {
    switch (direction) {
        case Direction::UP: return "UP";
        case Direction::DOWN: return "DOWN";
        case Direction::UNKNOWN: return "UNKNOWN";
    }
    return "?";
}

Camera camera_from_string(std::string_view name) {
    if (name == "DIDSON") return Camera::DIDSON;
    if (name == "ARIS") return Camera::ARIS;
    throw ValidationError("unknown camera '" + std::string(name) + "' (expected DIDSON or ARIS)");
}

SizeClass size_class_from_string(std::string_view name) {
    for (SizeClass c : kAllSizeClasses) {
        if (to_string(c) == name) return c;
    }
    throw ValidationError("unknown size class '" + std::string(name) +
                          "' (expected 20-40, 40-60, 60-80 or >80)");
}

Direction direction_from_string(std::string_view name) {
    if (name == "UP") return Direction::UP;
    if (name == "DOWN") return Direction::DOWN;
    if (name == "UNKNOWN") return Direction::UNKNOWN;
    throw ValidationError("unknown direction '" + std::string(name) + "'");
}

SizeClass size_class_for_length_cm(double length_cm) {
    if (length_cm > 80.0) return SizeClass::GT80;
    if (length_cm > 60.0) return SizeClass::S60_80;
    if (length_cm > 40.0) return SizeClass::S40_60;
    return SizeClass::S20_40;
}

long long intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const long long iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const long long ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (iw <= 0 || ih <= 0) return 0;
    return iw * ih;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const long long inter = intersection_area(a, b);
    if (inter == 0) return 0.0;
    const long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t v) { return v != 0; }));
}

}  // namespace sonarpipe
