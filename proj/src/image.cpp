#include "xprobe/image.hpp"

#include <string>

#include "xprobe/simd.hpp"

namespace xprobe {

ImageBuffer::ImageBuffer(std::uint32_t width, std::uint32_t height, Rgb fill)
    : width_(width), height_(height), data_(std::size_t{width} * height * 3) {
    if (width == 0 || height == 0) throw std::invalid_argument("ImageBuffer: dimensions must be >= 1");
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

ImageBuffer::ImageBuffer(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> interleaved)
    : width_(width), height_(height), data_(std::move(interleaved)) {
    if (width == 0 || height == 0) throw std::invalid_argument("ImageBuffer: dimensions must be >= 1");
    if (data_.size() != std::size_t{width} * height * 3)
        throw std::invalid_argument("ImageBuffer: expected " + std::to_string(std::size_t{width} * height * 3) +
                                    " bytes, got " + std::to_string(data_.size()));
}

Plane extract_plane(const ImageBuffer& img, int channel) {
    Plane p{img.width(), img.height(), std::vector<float>(img.pixel_count())};
    const auto bytes = img.bytes();
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = bytes[i * 3 + static_cast<std::size_t>(channel)];
    return p;
}

void store_plane(const Plane& plane, ImageBuffer& img, int channel) {
    std::vector<std::uint8_t> tmp(plane.values.size());
    simd::active().round_clip_f32_u8(plane.values.data(), tmp.data(), tmp.size());
    auto bytes = img.bytes();
    for (std::size_t i = 0; i < tmp.size(); ++i) bytes[i * 3 + static_cast<std::size_t>(channel)] = tmp[i];
}

}  // namespace xprobe
