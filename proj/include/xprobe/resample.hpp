#pragma once

#include <cstdint>
#include <vector>

#include "xprobe/image.hpp"

namespace xprobe {

enum class ResizeMode { bilinear, nearest, area };

/// Resizes to exactly (w, h). Equal dimensions return a copy for every mode.
/// Sample positions use pixel-center alignment; bilinear clamps at edges;
/// area averages the exact source footprint of each destination pixel.
[[nodiscard]] ImageBuffer resize(const ImageBuffer& img, std::uint32_t w, std::uint32_t h, ResizeMode mode);
[[nodiscard]] Plane resize_plane_area(const Plane& src, std::uint32_t w, std::uint32_t h);

/// Odd-sized 2-D kernel, row-major weights.
struct Kernel2d {
    std::uint32_t width = 1;
    std::uint32_t height = 1;
    std::vector<double> weights{1.0};

    [[nodiscard]] double at(std::uint32_t x, std::uint32_t y) const { return weights[std::size_t{y} * width + x]; }
};

/// Replicate-edge convolution, channels independent, float accumulation,
/// round-half-up at the end. Throws std::invalid_argument on even kernel dims.
[[nodiscard]] ImageBuffer convolve2d(const ImageBuffer& img, const Kernel2d& kernel);

/// Separable replicate-edge convolution with an odd 1-D kernel applied along
/// x then y; the intermediate stays in float.
[[nodiscard]] ImageBuffer convolve_separable(const ImageBuffer& img, const std::vector<float>& kernel);

void convolve_plane_separable(Plane& plane, const std::vector<float>& kernel);

}  // namespace xprobe
