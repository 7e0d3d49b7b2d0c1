#include "xprobe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xprobe/color.hpp"
#include "xprobe/rng.hpp"

namespace xprobe {
namespace {

struct Color3 {
    double r, g, b;
};

Color3 natural_color(DetRng& rng) {
    static constexpr double kHueBands[3][2] = {{15, 45}, {85, 135}, {195, 230}};
    const auto band = static_cast<std::size_t>(rng.uniform_int(0, 2));
    HslPixel p;
    p.h = rng.uniform(kHueBands[band][0], kHueBands[band][1]);
    p.s = rng.uniform(50, 190);
    p.l = rng.uniform(60, 200);
    const Rgb c = hsl_to_rgb(p);
    return {double(c.r), double(c.g), double(c.b)};
}

Color3 mix(Color3 a, Color3 b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

struct Shape {
    bool ellipse;
    double cx, cy, rx, ry;
    Color3 color;
    double shade;  // vertical shading strength
};

Shape random_shape(DetRng& rng, double w, double h, double min_r, double max_r) {
    Shape s;
    s.ellipse = rng.bernoulli(0.6);
    s.cx = rng.uniform(0, w);
    s.cy = rng.uniform(0, h);
    s.rx = rng.uniform(min_r, max_r) * w;
    s.ry = rng.uniform(min_r, max_r) * h;
    s.color = natural_color(rng);
    s.shade = rng.uniform(-40, 40);
    return s;
}

bool inside(const Shape& s, double x, double y) {
    const double dx = (x - s.cx) / s.rx, dy = (y - s.cy) / s.ry;
    return s.ellipse ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
}

}  // namespace

ImageBuffer synth_photo(std::uint64_t seed, std::uint32_t width, std::uint32_t height, int scene_kind) {
    if (scene_kind < 0 || scene_kind >= kSynthSceneKinds) throw std::invalid_argument("synth_photo: bad scene kind");
    DetRng rng(derive_seed(seed, {std::string("synth_photo"), std::int64_t{scene_kind}}));
    const double w = width, h = height;

    const Color3 top = natural_color(rng), bottom = natural_color(rng);
    const double horizon = rng.uniform(0.3, 0.7) * h;
    std::vector<Shape> shapes;
    Color3 stripe_a{}, stripe_b{};
    double stripe_period = 0, stripe_angle = 0;
    switch (scene_kind) {
        case 0:
            for (int i = 0, n = static_cast<int>(rng.uniform_int(3, 6)); i < n; ++i)
                shapes.push_back(random_shape(rng, w, h, 0.08, 0.3));
            break;
        case 1: {
            Shape s = random_shape(rng, w, h, 0.2, 0.35);
            s.cx = w * rng.uniform(0.4, 0.6);
            s.cy = h * rng.uniform(0.4, 0.6);
            shapes.push_back(s);
            break;
        }
        case 2:
            stripe_a = natural_color(rng);
            stripe_b = natural_color(rng);
            stripe_period = rng.uniform(10, 40);
            stripe_angle = rng.uniform(0, std::acos(-1.0));
            break;
        default:
            for (int i = 0, n = static_cast<int>(rng.uniform_int(15, 30)); i < n; ++i)
                shapes.push_back(random_shape(rng, w, h, 0.03, 0.1));
            break;
    }

    double wave_k[3][3];
    for (auto& wv : wave_k) {
        wv[0] = rng.uniform(0.5, 3.0) * 2 * std::acos(-1.0) / w;
        wv[1] = rng.uniform(0.5, 3.0) * 2 * std::acos(-1.0) / h;
        wv[2] = rng.uniform(0, 6.283);
    }

    ImageBuffer img(width, height);
    for (std::uint32_t y = 0; y < height; ++y) {
        for (std::uint32_t x = 0; x < width; ++x) {
            Color3 c;
            if (scene_kind == 2) {
                const double u = x * std::cos(stripe_angle) + y * std::sin(stripe_angle);
                const double t = 0.5 + 0.5 * std::sin(2 * std::acos(-1.0) * u / stripe_period);
                c = mix(stripe_a, stripe_b, t);
            } else if (scene_kind == 1) {
                c = mix(top, bottom, y / h);
            } else {
                c = y < horizon ? mix(top, mix(top, bottom, 0.3), y / horizon)
                                : mix(bottom, mix(bottom, top, 0.2), (y - horizon) / (h - horizon));
            }
            for (const Shape& s : shapes) {
                if (inside(s, x, y)) {
                    const double shade = s.shade * ((y - s.cy) / s.ry);
                    c = {s.color.r + shade, s.color.g + shade, s.color.b + shade};
                }
            }
            double lum = 0;
            for (const auto& wv : wave_k) lum += 6.0 * std::sin(wv[0] * x + wv[1] * y + wv[2]);
            lum += rng.uniform(-4, 4);
            img.set(x, y, {round_clip(c.r + lum), round_clip(c.g + lum), round_clip(c.b + lum)});
        }
    }
    return img;
}

}  // namespace xprobe
