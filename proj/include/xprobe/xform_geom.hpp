#pragma once

#include <cstdint>
#include <vector>

#include "xprobe/image.hpp"
#include "xprobe/resample.hpp"

namespace xprobe {

/// Normalized 1-D Gaussian with sigma = radius and half-width ceil(3 sigma).
[[nodiscard]] std::vector<float> gaussian_kernel_1d(double radius);
[[nodiscard]] ImageBuffer gaussian_blur(const ImageBuffer& img, double radius);

/// 1-pixel-wide Bresenham line of `length` pixels through the kernel center,
/// direction (cos a, -sin a) in image coordinates (counter-clockwise on screen),
/// uniform weight 1/n over its n cells.
[[nodiscard]] Kernel2d motion_kernel(int length, double angle);
[[nodiscard]] ImageBuffer motion_blur(const ImageBuffer& img, int length, double angle);

[[nodiscard]] ImageBuffer pixelate(const ImageBuffer& img, double factor);

/// Stretches the canvas by (max(sw,1), max(sh,1)), fills it with a blurred
/// stretched copy, pastes the (possibly shrunk) image centered, then resizes
/// back to the original dimensions.
[[nodiscard]] ImageBuffer blurry_background(const ImageBuffer& img, double sw, double sh, double blur_radius);

/// Bottom-right quadrant: rows [H/2, H), columns [W/2, W).
[[nodiscard]] ImageBuffer corner_crop(const ImageBuffer& img);

/// Counter-clockwise about the image center, same output dimensions. Right
/// angles are exact permutations for square images (180 for any image);
/// everything else is bilinear with black outside the source.
[[nodiscard]] ImageBuffer rotate(const ImageBuffer& img, double degrees);

[[nodiscard]] ImageBuffer flip_vertical(const ImageBuffer& img);
[[nodiscard]] ImageBuffer flip_horizontal(const ImageBuffer& img);

enum class Diagonal { major, minor };
/// major: out(x, y) = in(y, x); minor: rotate180(transpose(major)).
[[nodiscard]] ImageBuffer transpose(const ImageBuffer& img, Diagonal diagonal);

enum class ShiftAxis { rows, columns };
/// columns: even columns rotate down by `distance`, odd columns up (wrapping);
/// rows: even rows rotate right, odd rows left.
[[nodiscard]] ImageBuffer line_shift(const ImageBuffer& img, ShiftAxis axis, std::int64_t distance);

}  // namespace xprobe
