#include "xprobe/color.hpp"

#include <algorithm>
#include <cmath>

namespace xprobe {

double wrap_degrees(double h) {
    double r = std::fmod(h, 360.0);
    if (r < 0.0) r += 360.0;
    if (r >= 360.0) r -= 360.0;
    return r;
}

HslPixel rgb_to_hsl(Rgb p) {
    const int r = p.r, g = p.g, b = p.b;
    const int mx = std::max({r, g, b});
    const int mn = std::min({r, g, b});
    const int d = mx - mn;
    const int sum = mx + mn;
    HslPixel out;
    out.l = sum / 2.0;
    if (d == 0) return out;
    out.s = 255.0 * d / (255 - std::abs(sum - 255));
    double h;
    if (mx == r)
        h = 60.0 * (static_cast<double>(g - b) / d);
    else if (mx == g)
        h = 60.0 * (static_cast<double>(b - r) / d + 2.0);
    else
        h = 60.0 * (static_cast<double>(r - g) / d + 4.0);
    out.h = wrap_degrees(h);
    return out;
}

Rgb hsl_to_rgb(const HslPixel& p) {
    const double s = clip_level(p.s);
    const double l = clip_level(p.l);
    const double c = s / 255.0 * (255.0 - std::abs(2.0 * l - 255.0));
    const double hp = wrap_degrees(p.h) / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    const double m = l - c / 2.0;
    double r1 = 0, g1 = 0, b1 = 0;
    switch (static_cast<int>(hp)) {
        case 0: r1 = c; g1 = x; break;
        case 1: r1 = x; g1 = c; break;
        case 2: g1 = c; b1 = x; break;
        case 3: g1 = x; b1 = c; break;
        case 4: r1 = x; b1 = c; break;
        default: r1 = c; b1 = x; break;
    }
    return {round_clip(r1 + m), round_clip(g1 + m), round_clip(b1 + m)};
}

}  // namespace xprobe
