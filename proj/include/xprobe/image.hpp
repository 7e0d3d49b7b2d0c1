#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace xprobe {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Round half up (floor(x + 0.5)) then clip to [0, 255]. The one rounding rule
/// used for every conversion from a real value back to an 8-bit level.
inline std::uint8_t round_clip(double x) {
    const double r = std::floor(x + 0.5);
    if (!(r > 0.0)) return 0;  // also maps NaN to 0
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

inline double clip_level(double x) {
    return x < 0.0 ? 0.0 : (x > 255.0 ? 255.0 : x);
}

/// Rec.601 luma of an RGB triple, unrounded.
inline double luma601(double r, double g, double b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}
inline double luma601(Rgb p) { return luma601(p.r, p.g, p.b); }

/// W x H grid of 8-bit RGB pixels, row-major, interleaved.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(std::uint32_t width, std::uint32_t height, Rgb fill = {});
    ImageBuffer(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> interleaved);

    [[nodiscard]] std::uint32_t width() const { return width_; }
    [[nodiscard]] std::uint32_t height() const { return height_; }
    [[nodiscard]] std::size_t pixel_count() const { return std::size_t{width_} * height_; }
    [[nodiscard]] bool empty() const { return width_ == 0 || height_ == 0; }

    [[nodiscard]] Rgb at(std::uint32_t x, std::uint32_t y) const {
        const std::uint8_t* p = data_.data() + index(x, y);
        return {p[0], p[1], p[2]};
    }
    void set(std::uint32_t x, std::uint32_t y, Rgb c) {
        std::uint8_t* p = data_.data() + index(x, y);
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }
    [[nodiscard]] std::uint8_t channel(std::uint32_t x, std::uint32_t y, int c) const {
        return data_[index(x, y) + static_cast<std::size_t>(c)];
    }

    /// Interleaved r,g,b bytes; length is exactly 3 * width * height.
    [[nodiscard]] std::span<const std::uint8_t> bytes() const { return data_; }
    [[nodiscard]] std::span<std::uint8_t> bytes() { return data_; }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    [[nodiscard]] std::size_t index(std::uint32_t x, std::uint32_t y) const {
        return (std::size_t{y} * width_ + x) * 3;
    }

    std::uint32_t width_ = 0;
    std::uint32_t height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// One channel as floats, used by the convolution and resampling paths.
struct Plane {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<float> values;

    [[nodiscard]] float at(std::uint32_t x, std::uint32_t y) const {
        return values[std::size_t{y} * width + x];
    }
    [[nodiscard]] std::span<float> row(std::uint32_t y) {
        return {values.data() + std::size_t{y} * width, width};
    }
    [[nodiscard]] std::span<const float> row(std::uint32_t y) const {
        return {values.data() + std::size_t{y} * width, width};
    }
};

[[nodiscard]] Plane extract_plane(const ImageBuffer& img, int channel);
/// Writes a float plane back into `channel` of `img` with round_clip.
void store_plane(const Plane& plane, ImageBuffer& img, int channel);

}  // namespace xprobe
