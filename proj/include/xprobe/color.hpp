#pragma once

#include "xprobe/image.hpp"

namespace xprobe {

/// Hue in degrees [0, 360); saturation and lightness on the 0..255 level
/// scale. All three are kept unrounded so that the RGB round trip is exact;
/// `*_level()` gives the round-half-up integer view used for serialization.
struct HslPixel {
    double h = 0.0;
    double s = 0.0;
    double l = 0.0;

    [[nodiscard]] int s_level() const { return round_clip(s); }
    [[nodiscard]] int l_level() const { return round_clip(l); }
};

[[nodiscard]] HslPixel rgb_to_hsl(Rgb p);
[[nodiscard]] Rgb hsl_to_rgb(const HslPixel& p);

/// Mathematical modulo into [0, 360).
[[nodiscard]] double wrap_degrees(double h);

}  // namespace xprobe
