#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles/dither_oracle.hpp"
#include "xprobe/xform_noise.hpp"

using namespace xprobe;

namespace {

oracle::Grid channel_grid(const ImageBuffer& img, int c) {
    oracle::Grid g(img.height(), std::vector<int>(img.width()));
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x) g[y][x] = img.channel(x, y, c);
    return g;
}

double channel_mean(const ImageBuffer& img, int c) {
    double s = 0;
    for (std::uint32_t y = 0; y < img.height(); ++y)
        for (std::uint32_t x = 0; x < img.width(); ++x) s += img.channel(x, y, c);
    return s / static_cast<double>(img.pixel_count());
}

double mean_abs_laplacian(const ImageBuffer& img) {
    double s = 0;
    for (std::uint32_t y = 1; y + 1 < img.height(); ++y)
        for (std::uint32_t x = 1; x + 1 < img.width(); ++x)
            for (int c = 0; c < 3; ++c)
                s += std::abs(4 * img.channel(x, y, c) - img.channel(x - 1, y, c) - img.channel(x + 1, y, c) -
                              img.channel(x, y - 1, c) - img.channel(x, y + 1, c));
    return s;
}

}  // namespace

TEST_CASE("dither levels") {
    CHECK(DitherLevels(1).levels() == std::vector<int>{0, 255});
    CHECK(DitherLevels(2).levels() == std::vector<int>{0, 85, 170, 255});
    for (int b = 1; b <= 8; ++b) CHECK(DitherLevels(b).levels() == oracle::levels(b));
    CHECK(DitherLevels(1).quantize(127.5) == 0);  // tie goes low
    CHECK(DitherLevels(1).quantize(127.6) == 255);
    CHECK_THROWS_AS(DitherLevels(0), std::invalid_argument);
    CHECK_THROWS_AS(DitherLevels(9), std::invalid_argument);
}

TEST_CASE("gaussian noise") {
    const ImageBuffer img = fixture::photo(3);
    CHECK(gaussian_noise(img, 0.0, 5) == img);
    CHECK(gaussian_noise(img, 0.15, 5) == gaussian_noise(img, 0.15, 5));
    CHECK_FALSE(gaussian_noise(img, 0.15, 5) == gaussian_noise(img, 0.15, 6));
    CHECK_THROWS_AS((void)gaussian_noise(img, -0.1, 5), std::invalid_argument);

    const ImageBuffer out = gaussian_noise(fixture::constant(224, 224, 128), 0.15, 42);
    double s = 0, s2 = 0;
    for (auto v : out.bytes()) {
        s += v;
        s2 += static_cast<double>(v) * v;
    }
    const double n = static_cast<double>(out.bytes().size());
    const double mean = s / n;
    CHECK(std::abs(mean - 128) <= 1.0);
    CHECK(std::abs(std::sqrt(s2 / n - mean * mean) - 38.25) <= 3.0);

    std::size_t clipped = 0;
    const ImageBuffer wild = gaussian_noise(fixture::constant(64, 64, 250), 1000.0, 1);
    for (auto v : wild.bytes()) clipped += v == 0 || v == 255;
    CHECK(clipped > wild.bytes().size() * 99 / 100);
}

TEST_CASE("impulse noise") {
    const ImageBuffer gray = fixture::constant(100, 100, 128);
    CHECK(impulse_noise(gray, 0.0, 1) == gray);
    for (auto v : impulse_noise(gray, 1.0, 1).bytes()) REQUIRE((v == 0 || v == 255));
    const ImageBuffer out = impulse_noise(gray, 0.2, 7);
    int changed = 0, white = 0;
    for (std::uint32_t y = 0; y < 100; ++y)
        for (std::uint32_t x = 0; x < 100; ++x) {
            const Rgb p = out.at(x, y);
            if (p == Rgb{128, 128, 128}) continue;
            REQUIRE((p == Rgb{0, 0, 0} || p == Rgb{255, 255, 255}));
            ++changed;
            white += p.r == 255;
        }
    // binomial(10000, 0.2): sigma = 40
    CHECK(std::abs(changed - 2000) <= 160);
    CHECK(std::abs(white - changed / 2) <= 4 * std::sqrt(changed / 4.0));
    CHECK_THROWS_AS((void)impulse_noise(gray, 1.5, 1), std::invalid_argument);
}

TEST_CASE("random dither") {
    CHECK(random_dither(fixture::constant(16, 16, 0), 3) == fixture::constant(16, 16, 0));
    CHECK(random_dither(fixture::constant(16, 16, 255), 3) == fixture::constant(16, 16, 255));
    const ImageBuffer out = random_dither(fixture::constant(224, 224, 128), 9);
    double white = 0;
    for (auto v : out.bytes()) white += v == 255;
    const double n = static_cast<double>(out.bytes().size());
    // t uniform on {0..254}: P(128 > t) = 128/255 ... counted by brute force
    int favourable = 0;
    for (int t = 0; t <= 254; ++t) favourable += 128 > t;
    const double p = favourable / 255.0;
    CHECK(std::abs(white / n - p) <= 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("ordered dither") {
    CHECK(ordered_dither(fixture::constant(6, 6, 255)) == fixture::constant(6, 6, 255));
    CHECK(ordered_dither(fixture::constant(6, 6, 0)) == fixture::constant(6, 6, 0));
    const ImageBuffer out = ordered_dither(fixture::constant(4, 4, 128));
    // M = [[0,2],[3,1]]: white where M is 0 or 1
    CHECK(out.at(0, 0).r == 255);
    CHECK(out.at(1, 0).r == 0);
    CHECK(out.at(0, 1).r == 0);
    CHECK(out.at(1, 1).r == 255);
    const ImageBuffer img = fixture::photo(12);
    CHECK(ordered_dither(ordered_dither(img)) == ordered_dither(img));
}

TEST_CASE("floyd-steinberg dither") {
    CHECK(fs_dither(fixture::constant(8, 8, 255), 1) == fixture::constant(8, 8, 255));
    CHECK(fs_dither(fixture::constant(8, 8, 0), 1) == fixture::constant(8, 8, 0));
    for (const auto& img : fixture::corpus20()) CHECK(fs_dither(img, 8) == img);

    SUBCASE("2x2 constant 128") {
        const ImageBuffer out = fs_dither(fixture::constant(2, 2, 128), 1);
        const auto expect = oracle::floyd_steinberg({{128, 128}, {128, 128}}, 1);
        for (std::uint32_t y = 0; y < 2; ++y)
            for (std::uint32_t x = 0; x < 2; ++x) CHECK(out.at(x, y).g == expect[y][x]);
        // by hand: 128 -> 255 (e = -127); right gets 128 - 55.5625 -> 0, ...
        CHECK(out.at(0, 0).g == 255);
        CHECK(out.at(1, 0).g == 0);
    }
    SUBCASE("mean preservation") {
        const ImageBuffer img = fixture::photo(77, 64);
        for (int bits : {1, 2, 3}) {
            const ImageBuffer out = fs_dither(img, bits);
            const double step = 255.0 / ((1 << bits) - 1);
            for (int c = 0; c < 3; ++c) CHECK(std::abs(channel_mean(out, c) - channel_mean(img, c)) <= 2 * step);
            const auto lv = DitherLevels(bits).levels();
            for (auto v : out.bytes()) REQUIRE(std::find(lv.begin(), lv.end(), v) != lv.end());
        }
    }
    CHECK_THROWS_AS((void)fs_dither(fixture::constant(2, 2, 0), 0), std::invalid_argument);
}

TEST_CASE("dithering matches brute-force oracles on 100 seeded 8x8 images") {
    int mismatches = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const ImageBuffer img = fixture::noise_image(8, 8, 500 + i);
        const int bits = 1 + static_cast<int>(i % 3);
        const ImageBuffer fs = fs_dither(img, bits), od = ordered_dither(img), rd = random_dither(img, i);
        for (int c = 0; c < 3; ++c) {
            const auto g = channel_grid(img, c);
            mismatches += channel_grid(fs, c) != oracle::floyd_steinberg(g, bits);
            mismatches += channel_grid(od, c) != oracle::ordered(g);
            mismatches += channel_grid(rd, c) != oracle::random(g, i, c);
        }
    }
    CHECK(mismatches == 0);
}

TEST_CASE("jpeg recompress") {
    const ImageBuffer noisy = gaussian_noise(fixture::constant(64, 48, 128), 0.15, 3);
    for (int q : {10, 12, 15}) {
        const ImageBuffer out = jpeg_recompress(noisy, q);
        CHECK(out.width() == 64);
        CHECK(out.height() == 48);
        CHECK(out == jpeg_recompress(noisy, q));
        CHECK(mean_abs_laplacian(out) < mean_abs_laplacian(noisy));
    }
    CHECK_THROWS_AS((void)jpeg_recompress(noisy, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)jpeg_recompress(noisy, 101), std::invalid_argument);
}
