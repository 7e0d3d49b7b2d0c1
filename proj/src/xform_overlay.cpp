#include "xprobe/xform_overlay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "xprobe/resample.hpp"
#include "xprobe/rng.hpp"

namespace xprobe {
namespace {

void check_opacity(int opacity) {
    if (opacity < 0 || opacity > 255) throw std::invalid_argument("opacity must be in [0, 255]");
}

void check_frac(double frac) {
    if (!(frac > 0.0 && frac <= 1.0)) throw std::invalid_argument("size fraction must be in (0, 1]");
}

std::uint32_t scaled_dim(std::uint32_t n, double f) {
    return static_cast<std::uint32_t>(std::max(1.0, std::floor(n * f + 0.5)));
}

Rgb blend(int a, Rgb over, Rgb under) {
    return {alpha_blend(a, over.r, under.r), alpha_blend(a, over.g, under.g), alpha_blend(a, over.b, under.b)};
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace

std::string to_string(Waveform w) {
    switch (w) {
        case Waveform::sine: return "sine";
        case Waveform::triangle: return "triangle";
        case Waveform::sawtooth: return "sawtooth";
        case Waveform::square: return "square";
    }
    return "sine";
}

Waveform waveform_from_string(const std::string& s) {
    for (Waveform w : {Waveform::sine, Waveform::triangle, Waveform::sawtooth, Waveform::square})
        if (to_string(w) == s) return w;
    throw std::invalid_argument("unknown waveform '" + s + "'");
}

double wave_value(Waveform w, double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (w) {
        case Waveform::sine: return std::sin(phi);
        case Waveform::triangle: return 2.0 / std::numbers::pi * std::asin(std::sin(phi));
        case Waveform::sawtooth: {
            const double t = phi / two_pi;
            return 2.0 * (t - std::floor(t)) - 1.0;
        }
        case Waveform::square: return std::sin(phi) >= 0.0 ? 1.0 : -1.0;
    }
    return 0.0;
}

ImageBuffer grid_overlay(const ImageBuffer& img, Rgb color) {
    ImageBuffer out = img;
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x)
            if (y % 2 == 0 || x % 2 == 0) out.set(x, y, color);
    return out;
}

ImageBuffer line_overlay(const ImageBuffer& img, int width, int gap, double angle, Rgb color) {
    if (width < 1 || gap < 1) throw std::invalid_argument("line_overlay: width and gap must be >= 1");
    const double sa = std::sin(angle), ca = std::cos(angle);
    const std::int64_t period = std::int64_t{width} + gap;
    ImageBuffer out = img;
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x) {
            const double u = -static_cast<double>(x) * sa + static_cast<double>(y) * ca;
            if (floor_mod(static_cast<std::int64_t>(std::floor(u)), period) < width) out.set(x, y, color);
        }
    return out;
}

ImageBuffer text_overlay(const ImageBuffer& img, const OverlayAsset& page, Rgb color) {
    if (page.kind != AssetKind::text_page) throw std::invalid_argument("text_overlay: asset is not a text page");
    const std::uint32_t glyph = std::max<std::uint32_t>(7, scaled_dim(img.height(), 1.0 / 20.0));
    const std::uint32_t pw = page.bitmap.width(), ph = page.bitmap.height();
    ImageBuffer out = img;
    for (std::uint32_t y = 0; y < img.height(); ++y) {
        const auto my = static_cast<std::uint32_t>(std::uint64_t{y} * 7 / glyph % ph);
        for (std::uint32_t x = 0; x < img.width(); ++x) {
            const auto mx = static_cast<std::uint32_t>(std::uint64_t{x} * 7 / glyph % pw);
            if (page.covered(mx, my)) out.set(x, y, color);
        }
    }
    return out;
}

ImageBuffer icon_overlay(const ImageBuffer& img, const OverlayAsset& icon, int opacity, double ratio) {
    if (icon.kind != AssetKind::icon) throw std::invalid_argument("icon_overlay: asset is not an icon");
    if (!(ratio > 0.0)) throw std::invalid_argument("icon_overlay: ratio must be positive");
    check_opacity(opacity);
    const std::uint32_t size = scaled_dim(img.width(), 1.0 / ratio);
    const ImageBuffer glyph = resize(icon.bitmap, size, size, ResizeMode::nearest);
    const OverlayAsset scaled{icon.id, AssetKind::icon, glyph, icon.sha256};
    const std::uint64_t pitch = 2 * std::uint64_t{size};
    ImageBuffer out = img;
    for (std::uint32_t y = 0; y < img.height(); ++y) {
        const std::uint64_t ty = y % pitch;
        if (ty >= size) continue;
        for (std::uint32_t x = 0; x < img.width(); ++x) {
            const std::uint64_t tx = x % pitch;
            if (tx >= size) continue;
            const auto ix = static_cast<std::uint32_t>(tx), iy = static_cast<std::uint32_t>(ty);
            if (scaled.covered(ix, iy)) out.set(x, y, blend(opacity, glyph.at(ix, iy), img.at(x, y)));
        }
    }
    return out;
}

ImageBuffer image_overlay(const ImageBuffer& img, const OverlayAsset& distraction, double frac, int opacity,
                          std::uint64_t seed) {
    check_frac(frac);
    check_opacity(opacity);
    const std::uint32_t w = scaled_dim(img.width(), frac), h = scaled_dim(img.height(), frac);
    const ImageBuffer over = resize(distraction.bitmap, w, h, ResizeMode::bilinear);
    DetRng rng(derive_seed(seed, {std::string("image_overlay")}));
    const auto x0 = static_cast<std::uint32_t>(rng.uniform_int(0, img.width() - w));
    const auto y0 = static_cast<std::uint32_t>(rng.uniform_int(0, img.height() - h));
    ImageBuffer out = img;
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x)
            out.set(x0 + x, y0 + y, blend(opacity, over.at(x, y), img.at(x0 + x, y0 + y)));
    return out;
}

ImageBuffer fuse_background(const ImageBuffer& img, const OverlayAsset& distraction, double frac, int opacity) {
    check_frac(frac);
    check_opacity(opacity);
    ImageBuffer out = resize(distraction.bitmap, img.width(), img.height(), ResizeMode::bilinear);
    const std::uint32_t w = scaled_dim(img.width(), frac), h = scaled_dim(img.height(), frac);
    const ImageBuffer fg = resize(img, w, h, ResizeMode::bilinear);
    const std::uint32_t x0 = (img.width() - w) / 2, y0 = (img.height() - h) / 2;
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x)
            out.set(x0 + x, y0 + y, blend(opacity, fg.at(x, y), out.at(x0 + x, y0 + y)));
    return out;
}

ImageBuffer halftone(const ImageBuffer& img, Waveform wave, int line_width, int max_amp) {
    if (line_width < 1 || max_amp < 1) throw std::invalid_argument("halftone: line width and amplitude must be >= 1");
    const std::int64_t w = img.width(), h = img.height();
    const std::int64_t band = 2 * std::int64_t{max_amp} + line_width;
    const double wavelength = 4.0 * max_amp;
    ImageBuffer out(img.width(), img.height(), Rgb{255, 255, 255});
    auto paint = [&](std::int64_t x, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t y = std::max<std::int64_t>(lo, 0); y <= std::min(hi, h - 1); ++y)
            out.set(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), Rgb{0, 0, 0});
    };
    for (std::int64_t top = 0; top < h; top += band) {
        const std::int64_t center = top + max_amp;
        const auto sample_row = static_cast<std::uint32_t>(std::min(center, h - 1));
        std::int64_t prev = 0;
        for (std::int64_t x = 0; x < w; ++x) {
            const double luma = luma601(img.at(static_cast<std::uint32_t>(x), sample_row));
            const double amp = max_amp * (1.0 - luma / 255.0);
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(x) / wavelength;
            const auto y0 = static_cast<std::int64_t>(std::floor(center + amp * wave_value(wave, phi) + 0.5));
            const std::int64_t lo = x == 0 ? y0 : std::min(prev, y0);
            const std::int64_t hi = x == 0 ? y0 : std::max(prev, y0);
            paint(x, lo, hi + line_width - 1);
            prev = y0;
        }
    }
    return out;
}

}  // namespace xprobe
