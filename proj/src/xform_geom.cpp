#include "xprobe/xform_geom.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace xprobe {
namespace {

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

std::uint32_t wrap(std::int64_t v, std::uint32_t n) {
    const std::int64_t m = v % n;
    return static_cast<std::uint32_t>(m < 0 ? m + n : m);
}

ImageBuffer rotate90_ccw(const ImageBuffer& img) {
    const std::uint32_t w = img.width(), h = img.height();
    ImageBuffer out(h, w);
    for (std::uint32_t y = 0; y < w; ++y)
        for (std::uint32_t x = 0; x < h; ++x) out.set(x, y, img.at(w - 1 - y, x));
    return out;
}

ImageBuffer rotate180(const ImageBuffer& img) {
    const std::uint32_t w = img.width(), h = img.height();
    ImageBuffer out(w, h);
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) out.set(x, y, img.at(w - 1 - x, h - 1 - y));
    return out;
}

ImageBuffer rotate_bilinear(const ImageBuffer& img, double degrees) {
    const double theta = degrees * std::acos(-1.0) / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const std::uint32_t w = img.width(), h = img.height();
    const double cx = w / 2.0, cy = h / 2.0;
    ImageBuffer out(w, h);
    auto sample = [&](std::int64_t x, std::int64_t y, int ch) -> double {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
        return img.channel(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), ch);
    };
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            // visual frame (y up): rotate the output point back by -theta
            const double vx = x + 0.5 - cx;
            const double vy = cy - (y + 0.5);
            const double sx = cx + (vx * c + vy * s) - 0.5;
            const double sy = cy - (-vx * s + vy * c) - 0.5;
            const double fx = std::floor(sx), fy = std::floor(sy);
            const double tx = sx - fx, ty = sy - fy;
            const auto x0 = static_cast<std::int64_t>(fx), y0 = static_cast<std::int64_t>(fy);
            std::uint8_t px[3];
            for (int ch = 0; ch < 3; ++ch) {
                const double top = sample(x0, y0, ch) * (1 - tx) + sample(x0 + 1, y0, ch) * tx;
                const double bottom = sample(x0, y0 + 1, ch) * (1 - tx) + sample(x0 + 1, y0 + 1, ch) * tx;
                px[ch] = round_clip(top * (1 - ty) + bottom * ty);
            }
            out.set(x, y, {px[0], px[1], px[2]});
        }
    }
    return out;
}

}  // namespace

std::vector<float> gaussian_kernel_1d(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("gaussian kernel: radius must be > 0");
    const int half = static_cast<int>(std::ceil(3.0 * radius));
    std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double v = std::exp(-(double(i) * i) / (2.0 * radius * radius));
        w[static_cast<std::size_t>(i + half)] = v;
        sum += v;
    }
    std::vector<float> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<float>(w[i] / sum);
    return out;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double radius) {
    if (!(radius >= 0.0)) throw std::invalid_argument("gaussian_blur: radius must be >= 0");
    if (radius == 0.0) return img;
    return convolve_separable(img, gaussian_kernel_1d(radius));
}

Kernel2d motion_kernel(int length, double angle) {
    if (length < 1) throw std::invalid_argument("motion_blur: length must be >= 1");
    const double half = (length - 1) / 2.0;
    const double dx = std::cos(angle), dy = -std::sin(angle);
    const int x0 = round_half_up(-half * dx), y0 = round_half_up(-half * dy);
    const int x1 = round_half_up(half * dx), y1 = round_half_up(half * dy);

    std::set<std::pair<int, int>> cells;
    {
        int x = x0, y = y0;
        const int ax = std::abs(x1 - x0), ay = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = ax + ay;
        while (true) {
            cells.insert({x, y});
            if (x == x1 && y == y1) break;
            const int e2 = 2 * err;
            if (e2 >= ay) {
                err += ay;
                x += sx;
            }
            if (e2 <= ax) {
                err += ax;
                y += sy;
            }
        }
    }
    int reach = 0;
    for (const auto& [x, y] : cells) reach = std::max({reach, std::abs(x), std::abs(y)});
    Kernel2d k;
    k.width = k.height = static_cast<std::uint32_t>(2 * reach + 1);
    k.weights.assign(std::size_t{k.width} * k.height, 0.0);
    const double wgt = 1.0 / static_cast<double>(cells.size());
    for (const auto& [x, y] : cells) k.weights[static_cast<std::size_t>(y + reach) * k.width + static_cast<std::size_t>(x + reach)] = wgt;
    return k;
}

ImageBuffer motion_blur(const ImageBuffer& img, int length, double angle) {
    if (length < 1) throw std::invalid_argument("motion_blur: length must be >= 1");
    if (length == 1) return img;
    return convolve2d(img, motion_kernel(length, angle));
}

ImageBuffer pixelate(const ImageBuffer& img, double factor) {
    if (!(factor > 0.0 && factor <= 1.0)) throw std::invalid_argument("pixelate: factor must be in (0, 1]");
    if (factor == 1.0) return img;
    const auto dw = static_cast<std::uint32_t>(std::max(1, round_half_up(img.width() * factor)));
    const auto dh = static_cast<std::uint32_t>(std::max(1, round_half_up(img.height() * factor)));
    return resize(resize(img, dw, dh, ResizeMode::area), img.width(), img.height(), ResizeMode::nearest);
}

ImageBuffer blurry_background(const ImageBuffer& img, double sw, double sh, double blur_radius) {
    if (!(sw > 0.0 && sh > 0.0)) throw std::invalid_argument("blurry_background: scale factors must be > 0");
    const std::uint32_t w = img.width(), h = img.height();
    const auto cw = static_cast<std::uint32_t>(std::max(1, round_half_up(w * std::max(sw, 1.0))));
    const auto ch = static_cast<std::uint32_t>(std::max(1, round_half_up(h * std::max(sh, 1.0))));
    const auto fw = static_cast<std::uint32_t>(std::max(1, round_half_up(w * std::min(sw, 1.0))));
    const auto fh = static_cast<std::uint32_t>(std::max(1, round_half_up(h * std::min(sh, 1.0))));

    ImageBuffer canvas = gaussian_blur(resize(img, cw, ch, ResizeMode::bilinear), blur_radius);
    const ImageBuffer fg = resize(img, fw, fh, ResizeMode::bilinear);
    const std::uint32_t ox = (cw - fw) / 2, oy = (ch - fh) / 2;
    for (std::uint32_t y = 0; y < fh; ++y)
        for (std::uint32_t x = 0; x < fw; ++x) canvas.set(ox + x, oy + y, fg.at(x, y));
    return resize(canvas, w, h, ResizeMode::bilinear);
}

ImageBuffer corner_crop(const ImageBuffer& img) {
    if (img.width() < 2 || img.height() < 2)
        throw std::invalid_argument("corner_crop: image must be at least 2x2");
    const std::uint32_t x0 = img.width() / 2, y0 = img.height() / 2;
    ImageBuffer out(img.width() - x0, img.height() - y0);
    for (std::uint32_t y = 0; y < out.height(); ++y)
        for (std::uint32_t x = 0; x < out.width(); ++x) out.set(x, y, img.at(x0 + x, y0 + y));
    return out;
}

ImageBuffer rotate(const ImageBuffer& img, double degrees) {
    const double d = std::fmod(std::fmod(degrees, 360.0) + 360.0, 360.0);
    if (std::fmod(d, 90.0) == 0.0) {
        const int quarter = static_cast<int>(d / 90.0) % 4;
        if (quarter == 0) return img;
        if (quarter == 2) return rotate180(img);
        if (img.width() == img.height()) {
            ImageBuffer r = rotate90_ccw(img);
            return quarter == 1 ? r : rotate180(r);
        }
    }
    return rotate_bilinear(img, d);
}

ImageBuffer flip_vertical(const ImageBuffer& img) {
    ImageBuffer out(img.width(), img.height());
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x) out.set(x, y, img.at(x, img.height() - 1 - y));
    return out;
}

ImageBuffer flip_horizontal(const ImageBuffer& img) {
    ImageBuffer out(img.width(), img.height());
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x) out.set(x, y, img.at(img.width() - 1 - x, y));
    return out;
}

ImageBuffer transpose(const ImageBuffer& img, Diagonal diagonal) {
    const std::uint32_t w = img.width(), h = img.height();
    ImageBuffer out(h, w);
    for (std::uint32_t y = 0; y < w; ++y)
        for (std::uint32_t x = 0; x < h; ++x)
            out.set(x, y, diagonal == Diagonal::major ? img.at(y, x) : img.at(w - 1 - y, h - 1 - x));
    return out;
}

ImageBuffer line_shift(const ImageBuffer& img, ShiftAxis axis, std::int64_t distance) {
    if (distance < 0) throw std::invalid_argument("line_shift: distance must be >= 0");
    const std::uint32_t w = img.width(), h = img.height();
    ImageBuffer out(w, h);
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            if (axis == ShiftAxis::columns) {
                const std::int64_t dy = (x % 2 == 0) ? distance : -distance;
                out.set(x, wrap(std::int64_t{y} + dy, h), img.at(x, y));
            } else {
                const std::int64_t dx = (y % 2 == 0) ? distance : -distance;
                out.set(wrap(std::int64_t{x} + dx, w), y, img.at(x, y));
            }
        }
    return out;
}

}  // namespace xprobe
