#include "xprobe/xform_color.hpp"

#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "xprobe/color.hpp"
#include "xprobe/rng.hpp"
#include "xprobe/simd.hpp"

namespace xprobe {
namespace {

template <typename F>
ImageBuffer map_pixels(const ImageBuffer& img, F&& f) {
    ImageBuffer out = img;
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x) out.set(x, y, f(img.at(x, y)));
    return out;
}

std::uint32_t pack(Rgb p) { return (std::uint32_t{p.r} << 16) | (std::uint32_t{p.g} << 8) | p.b; }

double dist2(const std::array<double, 3>& c, Rgb p) {
    const double dr = c[0] - p.r, dg = c[1] - p.g, db = c[2] - p.b;
    return dr * dr + dg * dg + db * db;
}

std::size_t nearest(const std::vector<std::array<double, 3>>& centroids, Rgb p, double* best_d = nullptr) {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        const double d = dist2(centroids[i], p);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    if (best_d) *best_d = bd;
    return best;
}

}  // namespace

ImageBuffer hsl_affine(const ImageBuffer& img, HslChannel channel, double scale, double offset) {
    return map_pixels(img, [&](Rgb p) {
        HslPixel q = rgb_to_hsl(p);
        switch (channel) {
            case HslChannel::hue:
                q.h = wrap_degrees(q.h * scale + offset);
                break;
            case HslChannel::saturation:
                q.s = clip_level(q.s * scale + offset);
                break;
            case HslChannel::lightness:
                q.l = clip_level(q.l * scale + offset);
                break;
        }
        return hsl_to_rgb(q);
    });
}

ImageBuffer solarize(const ImageBuffer& img, std::uint8_t threshold) {
    ImageBuffer out = img;
    simd::active().solarize_u8(img.bytes().data(), out.bytes().data(), out.bytes().size(), threshold);
    return out;
}

ImageBuffer invert(const ImageBuffer& img) {
    ImageBuffer out = img;
    simd::active().invert_u8(img.bytes().data(), out.bytes().data(), out.bytes().size());
    return out;
}

ImageBuffer grayscale(const ImageBuffer& img) {
    return map_pixels(img, [](Rgb p) {
        const std::uint8_t y = round_clip(luma601(p));
        return Rgb{y, y, y};
    });
}

ImageBuffer posterize(const ImageBuffer& img, int bits) {
    if (bits < 1 || bits > 8) throw std::invalid_argument("posterize: bits must be in [1, 8]");
    const auto mask = static_cast<std::uint8_t>(0xFF << (8 - bits));
    ImageBuffer out = img;
    simd::active().and_u8(img.bytes().data(), out.bytes().data(), out.bytes().size(), mask);
    return out;
}

KMeansFit kmeans_fit(const std::vector<Rgb>& points, int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (points.empty()) throw std::invalid_argument("kmeans: no points");
    DetRng rng(seed);
    KMeansFit fit;
    auto& cent = fit.centroids;
    const Rgb first = points[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(points.size()) - 1))];
    cent.push_back({double(first.r), double(first.g), double(first.b)});

    std::vector<double> d2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) d2[i] = dist2(cent[0], points[i]);
    while (cent.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (double d : d2) total += d;
        if (total <= 0.0) break;  // every point already coincides with a centroid
        const double target = rng.uniform(0.0, total);
        double run = 0.0;
        std::size_t pick = points.size() - 1;
        for (std::size_t i = 0; i < points.size(); ++i) {
            run += d2[i];
            if (run > target && d2[i] > 0.0) {
                pick = i;
                break;
            }
        }
        while (d2[pick] == 0.0) --pick;  // float slack at the very end of the scan
        const Rgb p = points[pick];
        cent.push_back({double(p.r), double(p.g), double(p.b)});
        for (std::size_t i = 0; i < points.size(); ++i) d2[i] = std::min(d2[i], dist2(cent.back(), points[i]));
    }

    std::vector<std::array<double, 3>> sums(cent.size());
    std::vector<std::size_t> counts(cent.size());
    for (int it = 0; it < kLloydIterations; ++it) {
        std::fill(sums.begin(), sums.end(), std::array<double, 3>{0, 0, 0});
        std::fill(counts.begin(), counts.end(), 0);
        double sse = 0.0;
        for (const Rgb& p : points) {
            double d = 0.0;
            const std::size_t c = nearest(cent, p, &d);
            sse += d;
            sums[c][0] += p.r;
            sums[c][1] += p.g;
            sums[c][2] += p.b;
            ++counts[c];
        }
        fit.sse_history.push_back(sse);
        for (std::size_t c = 0; c < cent.size(); ++c)
            if (counts[c] > 0)  // empty clusters keep their centroid
                for (int j = 0; j < 3; ++j) cent[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
    return fit;
}

ImageBuffer quantize_colors(const ImageBuffer& img, int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("quantize_colors: k must be >= 1");
    std::unordered_set<std::uint32_t> distinct;
    for (std::uint32_t y = 0; y < img.height() && distinct.size() <= static_cast<std::size_t>(k); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x) distinct.insert(pack(img.at(x, y)));
    if (distinct.size() <= static_cast<std::size_t>(k)) return img;  // already a Lloyd fixed point

    std::vector<Rgb> sample;
    const std::size_t n = img.pixel_count();
    auto pixel = [&](std::size_t i) {
        return img.at(static_cast<std::uint32_t>(i % img.width()), static_cast<std::uint32_t>(i / img.width()));
    };
    if (n <= kKMeansSampleLimit) {
        sample.reserve(n);
        for (std::size_t i = 0; i < n; ++i) sample.push_back(pixel(i));
    } else {
        DetRng pick(derive_seed(seed, {std::string("sample")}));
        sample.reserve(kKMeansSampleLimit);
        for (std::size_t i = 0; i < kKMeansSampleLimit; ++i)
            sample.push_back(pixel(static_cast<std::size_t>(pick.uniform_int(0, static_cast<std::int64_t>(n) - 1))));
    }
    auto fit = kmeans_fit(sample, k, derive_seed(seed, {std::string("kmeans")}));
    for (auto& c : fit.centroids)
        for (double& v : c) v = round_clip(v);

    std::unordered_map<std::uint32_t, Rgb> memo;
    return map_pixels(img, [&](Rgb p) {
        auto [it, inserted] = memo.try_emplace(pack(p));
        if (inserted) {
            const auto& c = fit.centroids[nearest(fit.centroids, p)];
            it->second = Rgb{static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
                             static_cast<std::uint8_t>(c[2])};
        }
        return it->second;
    });
}

ImageBuffer hsl_as_rgb(const ImageBuffer& img) {
    return map_pixels(img, [](Rgb p) {
        const HslPixel q = rgb_to_hsl(p);
        return Rgb{round_clip(q.h * 255.0 / 360.0), round_clip(q.s), round_clip(q.l)};
    });
}

}  // namespace xprobe
