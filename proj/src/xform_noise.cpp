#include "xprobe/xform_noise.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "xprobe/codec.hpp"
#include "xprobe/rng.hpp"

namespace xprobe {
namespace {

DetRng child_rng(std::uint64_t seed, const char* op) { return DetRng(derive_seed(seed, {std::string(op)})); }

constexpr int kBayer2[2][2] = {{0, 2}, {3, 1}};

}  // namespace

DitherLevels::DitherLevels(int bits) : bits_(bits) {
    if (bits < 1 || bits > 8) throw std::invalid_argument("dither bits must be in [1, 8]");
    const int n = 1 << bits;
    levels_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) levels_.push_back(round_clip(i * 255.0 / (n - 1)));
}

int DitherLevels::quantize(double v) const {
    int best = levels_.front();
    double bd = std::abs(v - best);
    for (int level : levels_) {
        const double d = std::abs(v - level);
        if (d < bd) {  // strict: equal distance keeps the lower level
            bd = d;
            best = level;
        }
    }
    return best;
}

ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
    if (sigma == 0.0) return img;
    DetRng rng = child_rng(seed, "gaussian_noise");
    ImageBuffer out = img;
    for (auto& v : out.bytes()) v = round_clip(v + 255.0 * sigma * rng.gaussian());
    return out;
}

ImageBuffer impulse_noise(const ImageBuffer& img, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("impulse_noise: p must be in [0, 1]");
    DetRng rng = child_rng(seed, "impulse_noise");
    ImageBuffer out = img;
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x)
            if (rng.bernoulli(p)) out.set(x, y, rng.bernoulli(0.5) ? Rgb{255, 255, 255} : Rgb{0, 0, 0});
    return out;
}

ImageBuffer random_dither(const ImageBuffer& img, std::uint64_t seed) {
    DetRng rng = child_rng(seed, "random_dither");
    ImageBuffer out = img;
    for (auto& v : out.bytes()) v = v > rng.uniform_int(0, 254) ? 255 : 0;
    return out;
}

ImageBuffer ordered_dither(const ImageBuffer& img) {
    ImageBuffer out = img;
    auto bytes = out.bytes();
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x) {
            const double t = (kBayer2[y % 2][x % 2] + 0.5) * 255.0 / 4.0;
            std::uint8_t* p = bytes.data() + (std::size_t{y} * img.width() + x) * 3;
            for (int c = 0; c < 3; ++c) p[c] = p[c] > t ? 255 : 0;
        }
    return out;
}

ImageBuffer fs_dither(const ImageBuffer& img, int bits) {
    const DitherLevels levels(bits);
    const std::uint32_t w = img.width(), h = img.height();
    ImageBuffer out = img;
    std::vector<double> acc(std::size_t{w} * h);
    for (int c = 0; c < 3; ++c) {
        for (std::uint32_t y = 0; y < h; ++y)
            for (std::uint32_t x = 0; x < w; ++x) acc[std::size_t{y} * w + x] = img.channel(x, y, c);
        for (std::uint32_t y = 0; y < h; ++y) {
            for (std::uint32_t x = 0; x < w; ++x) {
                const double a = clip_level(acc[std::size_t{y} * w + x]);
                const int q = levels.quantize(a);
                out.bytes()[(std::size_t{y} * w + x) * 3 + static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(q);
                const double e = a - q;
                if (x + 1 < w) acc[std::size_t{y} * w + x + 1] += e * (7.0 / 16.0);
                if (y + 1 < h) {
                    const std::size_t below = std::size_t{y + 1} * w + x;
                    if (x > 0) acc[below - 1] += e * (3.0 / 16.0);
                    acc[below] += e * (5.0 / 16.0);
                    if (x + 1 < w) acc[below + 1] += e * (1.0 / 16.0);
                }
            }
        }
    }
    return out;
}

ImageBuffer jpeg_recompress(const ImageBuffer& img, int quality) {
    if (quality < 1 || quality > 100) throw std::invalid_argument("jpeg_recompress: quality must be in [1, 100]");
    ImageBuffer out = decode_jpeg(encode_jpeg(img, quality));
    if (out.width() != img.width() || out.height() != img.height())
        throw std::runtime_error("jpeg_recompress: codec changed image dimensions");
    return out;
}

}  // namespace xprobe
