#pragma once

#include <cstdint>
#include <string>

#include "xprobe/assets.hpp"
#include "xprobe/image.hpp"

namespace xprobe {

enum class Waveform { sine, triangle, sawtooth, square };

[[nodiscard]] std::string to_string(Waveform w);
[[nodiscard]] Waveform waveform_from_string(const std::string& s);
/// Unit-amplitude periodic wave at phase `phi` (radians).
[[nodiscard]] double wave_value(Waveform w, double phi);

/// Paints every pixel on an even row or an even column.
[[nodiscard]] ImageBuffer grid_overlay(const ImageBuffer& img, Rgb color);

/// Stripes of `width` pixels with period width + gap, measured along
/// u = -x sin(a) + y cos(a); a stripe starts at u = 0.
[[nodiscard]] ImageBuffer line_overlay(const ImageBuffer& img, int width, int gap, double angle, Rgb color);

/// Tiles the page's coverage mask at glyph height max(7, round(H/20)).
[[nodiscard]] ImageBuffer text_overlay(const ImageBuffer& img, const OverlayAsset& page, Rgb color);

/// Icons of side round(W / ratio) on a grid with one icon of spacing,
/// alpha-blended at `opacity` inside icon coverage.
[[nodiscard]] ImageBuffer icon_overlay(const ImageBuffer& img, const OverlayAsset& icon, int opacity, double ratio);

/// Distraction resized to frac of the image, placed at a seeded random
/// position, alpha-blended at `opacity`.
[[nodiscard]] ImageBuffer image_overlay(const ImageBuffer& img, const OverlayAsset& distraction, double frac,
                                        int opacity, std::uint64_t seed);

/// Distraction stretched to the full frame as background; the image shrunk to
/// frac and blended centered at `opacity`.
[[nodiscard]] ImageBuffer fuse_background(const ImageBuffer& img, const OverlayAsset& distraction, double frac,
                                          int opacity);

/// Amplitude-modulated line halftone on a white canvas.
[[nodiscard]] ImageBuffer halftone(const ImageBuffer& img, Waveform wave, int line_width, int max_amp);

/// round((a * over + (255 - a) * under) / 255)
[[nodiscard]] inline std::uint8_t alpha_blend(int a, std::uint8_t over, std::uint8_t under) {
    return round_clip((a * static_cast<double>(over) + (255 - a) * static_cast<double>(under)) / 255.0);
}

}  // namespace xprobe
