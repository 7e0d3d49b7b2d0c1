#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xprobe/image.hpp"

namespace xprobe {

enum class HslChannel { hue, saturation, lightness };

/// Hue: h' = (h * scale + offset) mod 360. Saturation/lightness:
/// v' = clip(v * scale + offset, 0, 255) on the 0..255 level scale.
[[nodiscard]] ImageBuffer hsl_affine(const ImageBuffer& img, HslChannel channel, double scale, double offset);

[[nodiscard]] ImageBuffer solarize(const ImageBuffer& img, std::uint8_t threshold);
[[nodiscard]] ImageBuffer invert(const ImageBuffer& img);
[[nodiscard]] ImageBuffer grayscale(const ImageBuffer& img);
/// Keeps the top `bits` bits of every channel (1..8).
[[nodiscard]] ImageBuffer posterize(const ImageBuffer& img, int bits);

struct KMeansFit {
    std::vector<std::array<double, 3>> centroids;
    /// Within-cluster squared error after each of the Lloyd assignment steps.
    std::vector<double> sse_history;
};

inline constexpr int kLloydIterations = 10;
inline constexpr std::size_t kKMeansSampleLimit = 65536;

/// k-means++ seeding followed by exactly kLloydIterations Lloyd steps on
/// `points` (RGB triples). Fewer than k centroids are returned when the points
/// have fewer than k distinct values.
[[nodiscard]] KMeansFit kmeans_fit(const std::vector<Rgb>& points, int k, std::uint64_t seed);

/// Replaces every pixel by its nearest of at most k centroids (rounded).
[[nodiscard]] ImageBuffer quantize_colors(const ImageBuffer& img, int k, std::uint64_t seed);

/// Reads (hue * 255/360, saturation, lightness) directly as (r, g, b).
[[nodiscard]] ImageBuffer hsl_as_rgb(const ImageBuffer& img);

}  // namespace xprobe
