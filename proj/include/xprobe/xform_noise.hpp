#pragma once

#include <cstdint>
#include <vector>

#include "xprobe/image.hpp"

namespace xprobe {

/// The 2^bits quantization levels evenly spaced over [0, 255] (endpoints
/// included), rounded half-up: bits=1 -> {0, 255}, bits=2 -> {0, 85, 170, 255}.
class DitherLevels {
public:
    explicit DitherLevels(int bits);

    [[nodiscard]] int bits() const { return bits_; }
    [[nodiscard]] const std::vector<int>& levels() const { return levels_; }
    /// Nearest level to v (v already clipped to [0,255]); ties go to the lower level.
    [[nodiscard]] int quantize(double v) const;

private:
    int bits_;
    std::vector<int> levels_;
};

/// v' = clip(round(v + 255 * sigma * z)), z ~ N(0,1) drawn row-major, r,g,b.
[[nodiscard]] ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, std::uint64_t seed);
/// Each pixel selected with probability p; selected pixels become white or
/// black with equal probability.
[[nodiscard]] ImageBuffer impulse_noise(const ImageBuffer& img, double p, std::uint64_t seed);
/// Per channel threshold t ~ U{0..254}; v' = 255 if v > t else 0.
[[nodiscard]] ImageBuffer random_dither(const ImageBuffer& img, std::uint64_t seed);
/// 2x2 Bayer [[0,2],[3,1]] with thresholds (M + 0.5) * 255 / 4.
[[nodiscard]] ImageBuffer ordered_dither(const ImageBuffer& img);
/// Floyd-Steinberg per channel, plain raster order, classic 7/3/5/1 weights.
[[nodiscard]] ImageBuffer fs_dither(const ImageBuffer& img, int bits);
/// Baseline JPEG round trip at `quality` (1..100).
[[nodiscard]] ImageBuffer jpeg_recompress(const ImageBuffer& img, int quality);

}  // namespace xprobe
