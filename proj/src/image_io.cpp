#include "sonarpipe/image_io.hpp"

#include <cstring>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "sonarpipe/errors.hpp"

namespace sonarpipe {
namespace {

cv::Mat as_mat(const GrayImage& image) {
    cv::Mat m(image.height, image.width, CV_8UC1);
    std::memcpy(m.data, image.data.data(), image.data.size());
    return m;
}

GrayImage from_mat(const cv::Mat& m) {
    GrayImage out(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        std::memcpy(&out.data[static_cast<std::size_t>(y) * m.cols], m.ptr<std::uint8_t>(y),
                    static_cast<std::size_t>(m.cols));
    }
    return out;
}

void write_mat(const std::filesystem::path& path, const cv::Mat& m) {
    const auto ext = path.extension().string();
    if (ext != ".pgm" && ext != ".png") {
        throw IoError(path, "unsupported image extension '" + ext + "' (use .pgm or .png)");
    }
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::vector<int> flags;
    if (ext == ".pgm") flags = {cv::IMWRITE_PXM_BINARY, 1};
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), m, flags);
    } catch (const cv::Exception& e) {
        throw IoError(path, e.what());
    }
    if (!ok) throw IoError(path, "cannot write image");
}

cv::Mat read_mat(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError(path, "no such file");
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (m.empty()) throw IoError(path, "cannot decode image");
    if (m.depth() != CV_8U) throw IoError(path, "expected an 8-bit image");
    return m;
}

}  // namespace

GrayImage read_gray_image(const std::filesystem::path& path) {
    const cv::Mat m = read_mat(path);
    if (m.channels() != 1) throw IoError(path, "expected a single-channel image");
    return from_mat(m);
}

void write_gray_image(const std::filesystem::path& path, const GrayImage& image) {
    write_mat(path, as_mat(image));
}

void write_mask_image(const std::filesystem::path& path, const BinaryMask& mask) {
    GrayImage img(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) img.data[i] = mask.bits[i] ? 255 : 0;
    write_gray_image(path, img);
}

BinaryMask read_mask_image(const std::filesystem::path& path) {
    const GrayImage img = read_gray_image(path);
    BinaryMask mask(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) mask.bits[i] = img.data[i] ? 1 : 0;
    return mask;
}

void write_rgb_png(const std::filesystem::path& path, const RgbPlanes& planes) {
    const int w = planes[0].width;
    const int h = planes[0].height;
    for (const auto& p : planes) {
        if (p.width != w || p.height != h) throw ValidationError("RGB planes differ in size");
    }
    if (path.extension() != ".png") throw IoError(path, "RGB output must be .png");
    // OpenCV orders channels B, G, R in memory.
    std::vector<cv::Mat> bgr = {as_mat(planes[2]), as_mat(planes[1]), as_mat(planes[0])};
    cv::Mat merged;
    cv::merge(bgr, merged);
    write_mat(path, merged);
}

RgbPlanes read_rgb_png(const std::filesystem::path& path) {
    const cv::Mat m = read_mat(path);
    if (m.channels() != 3) throw IoError(path, "expected a 3-channel image");
    std::vector<cv::Mat> bgr;
    cv::split(m, bgr);
    return {from_mat(bgr[2]), from_mat(bgr[1]), from_mat(bgr[0])};
}

}  // namespace sonarpipe
