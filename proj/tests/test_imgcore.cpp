#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "fixtures.hpp"
#include "xprobe/codec.hpp"
#include "xprobe/color.hpp"
#include "xprobe/resample.hpp"
#include "xprobe/rng.hpp"

using namespace xprobe;

TEST_CASE("round_clip rounds half up and clips") {
    CHECK(round_clip(127.5) == 128);
    CHECK(round_clip(0.49) == 0);
    CHECK(round_clip(-3.0) == 0);
    CHECK(round_clip(254.5) == 255);
    CHECK(round_clip(1e9) == 255);
    CHECK(round_clip(std::nan("")) == 0);
}

TEST_CASE("image buffer basics") {
    ImageBuffer img(3, 2, Rgb{1, 2, 3});
    CHECK(img.bytes().size() == 18);
    img.set(2, 1, {9, 8, 7});
    CHECK(img.at(2, 1) == Rgb{9, 8, 7});
    CHECK(img.channel(2, 1, 1) == 8);
    CHECK_THROWS_AS(ImageBuffer(2, 2, std::vector<std::uint8_t>(11)), std::invalid_argument);
}

// ---- HSL ----

TEST_CASE("rgb_to_hsl reference values") {
    // Standard formulas: l = (max+min)/2; s = (max-min)/(1-|2l-1|) on [0,1].
    const HslPixel red = rgb_to_hsl({255, 0, 0});
    CHECK(red.h == 0.0);
    CHECK(red.s_level() == 255);
    CHECK(red.l == doctest::Approx(127.5));
    CHECK(red.l_level() == 128);

    const HslPixel black = rgb_to_hsl({0, 0, 0});
    CHECK(black.h == 0.0);
    CHECK(black.s_level() == 0);
    CHECK(black.l_level() == 0);

    const HslPixel gray = rgb_to_hsl({128, 128, 128});
    CHECK(gray.s_level() == 0);
    CHECK(gray.l_level() == 128);

    const HslPixel green = rgb_to_hsl({0, 255, 0});
    CHECK(green.h == doctest::Approx(120.0));
    const HslPixel blue = rgb_to_hsl({0, 0, 255});
    CHECK(blue.h == doctest::Approx(240.0));
}

TEST_CASE("hsl_to_rgb reference values") {
    CHECK(hsl_to_rgb({0, 0, 77}) == Rgb{77, 77, 77});
    CHECK(hsl_to_rgb(rgb_to_hsl({13, 201, 96})) == Rgb{13, 201, 96});
    // Pure green sits at l = 127.5 on the level scale; l = 128 is a hair
    // lighter and lands on (1, 255, 1).
    CHECK(hsl_to_rgb({120, 255, 127.5}) == Rgb{0, 255, 0});
    CHECK(hsl_to_rgb({120, 255, 128}) == Rgb{1, 255, 1});
}

TEST_CASE("hsl round trip is exact over all 2^24 colors") {
    std::uint64_t failures = 0;
    for (int r = 0; r < 256; ++r)
        for (int g = 0; g < 256; ++g)
            for (int b = 0; b < 256; ++b) {
                const Rgb p{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
                const HslPixel q = rgb_to_hsl(p);
                failures += !(hsl_to_rgb(q) == p) || q.h < 0.0 || q.h >= 360.0 || q.s < 0 || q.s > 255 || q.l < 0 ||
                            q.l > 255;
            }
    CHECK(failures == 0);
}

TEST_CASE("wrap_degrees is a mathematical modulo") {
    CHECK(wrap_degrees(364.0) == doctest::Approx(4.0));
    CHECK(wrap_degrees(-324.0) == doctest::Approx(36.0));
    CHECK(wrap_degrees(-360.0) == 0.0);
    CHECK(wrap_degrees(359.5) == 359.5);
}

// ---- resize / convolution ----

TEST_CASE("resize") {
    const ImageBuffer img = fixture::noise_image(7, 5, 1);
    for (auto mode : {ResizeMode::nearest, ResizeMode::bilinear, ResizeMode::area})
        CHECK(resize(img, 7, 5, mode) == img);

    SUBCASE("checkerboard area-averages to 128") {
        ImageBuffer cb(4, 4);
        for (std::uint32_t y = 0; y < 4; ++y)
            for (std::uint32_t x = 0; x < 4; ++x) {
                const std::uint8_t v = (x + y) % 2 ? 255 : 0;
                cb.set(x, y, {v, v, v});
            }
        CHECK(resize(cb, 2, 2, ResizeMode::area) == fixture::constant(2, 2, 128));
    }
    SUBCASE("nearest upscale replicates") {
        const ImageBuffer small = fixture::noise_image(2, 2, 3);
        const ImageBuffer big = resize(small, 4, 4, ResizeMode::nearest);
        for (std::uint32_t y = 0; y < 4; ++y)
            for (std::uint32_t x = 0; x < 4; ++x) CHECK(big.at(x, y) == small.at(x / 2, y / 2));
    }
    SUBCASE("area with integer factor is an exact box mean") {
        const ImageBuffer src = fixture::noise_image(9, 6, 4);
        const ImageBuffer out = resize(src, 3, 2, ResizeMode::area);
        for (std::uint32_t y = 0; y < 2; ++y)
            for (std::uint32_t x = 0; x < 3; ++x)
                for (int c = 0; c < 3; ++c) {
                    int sum = 0;
                    for (std::uint32_t dy = 0; dy < 3; ++dy)
                        for (std::uint32_t dx = 0; dx < 3; ++dx) sum += src.channel(3 * x + dx, 3 * y + dy, c);
                    CHECK(out.channel(x, y, c) == (2 * sum + 9) / 18);  // round half up of sum/9
                }
    }
    CHECK(resize(img, 11, 3, ResizeMode::bilinear).width() == 11);
    CHECK_THROWS_AS((void)resize(img, 0, 3, ResizeMode::area), std::invalid_argument);
}

TEST_CASE("convolve2d") {
    const ImageBuffer img = fixture::noise_image(6, 5, 9);
    CHECK(convolve2d(img, Kernel2d{}) == img);

    Kernel2d box{3, 3, std::vector<double>(9, 1.0 / 9.0)};
    CHECK(convolve2d(fixture::constant(5, 5, 77), box) == fixture::constant(5, 5, 77));

    ImageBuffer impulse(7, 7);
    impulse.set(3, 3, {255, 255, 255});
    const ImageBuffer out = convolve2d(impulse, box);
    for (std::uint32_t y = 0; y < 7; ++y)
        for (std::uint32_t x = 0; x < 7; ++x) {
            const bool inside = x >= 2 && x <= 4 && y >= 2 && y <= 4;
            CHECK(out.at(x, y).r == (inside ? 28 : 0));
        }
    CHECK_THROWS_AS((void)convolve2d(img, Kernel2d{2, 1, {0.5, 0.5}}), std::invalid_argument);
}

TEST_CASE("separable convolution matches the equivalent 2-D kernel on a constant border-free case") {
    const std::vector<float> k{0.25f, 0.5f, 0.25f};
    Kernel2d k2{3, 3, {}};
    for (float a : k)
        for (float b : k) k2.weights.push_back(static_cast<double>(a) * b);
    ImageBuffer impulse(9, 9);
    impulse.set(4, 4, {255, 0, 128});
    CHECK(convolve_separable(impulse, k) == convolve2d(impulse, k2));
}

// ---- RNG ----

namespace {

struct Golden {
    std::vector<std::pair<std::pair<std::uint64_t, std::vector<SeedTag>>, std::uint64_t>> derive;
    std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> xoshiro;
};

Golden read_golden() {
    std::ifstream in(std::string(XPROBE_GOLDEN_DIR) + "/rng.txt");
    REQUIRE(in);
    Golden g;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind, word;
        std::uint64_t seed = 0;
        ls >> kind >> seed;
        std::vector<std::string> rest;
        while (ls >> word) rest.push_back(word);
        const auto arrow = std::find(rest.begin(), rest.end(), "->");
        if (kind == "derive") {
            std::vector<SeedTag> tags;
            for (auto it = rest.begin(); it != arrow; ++it) {
                if (it->starts_with("s:")) tags.emplace_back(it->substr(2));
                else tags.emplace_back(static_cast<std::int64_t>(std::stoll(it->substr(2))));
            }
            g.derive.push_back({{seed, tags}, std::stoull(*(arrow + 1), nullptr, 16)});
        } else {
            std::vector<std::uint64_t> vals;
            for (auto it = arrow + 1; it != rest.end(); ++it) vals.push_back(std::stoull(*it, nullptr, 16));
            g.xoshiro.push_back({seed, vals});
        }
    }
    return g;
}

}  // namespace

TEST_CASE("seed derivation and generator match the golden file") {
    const Golden g = read_golden();
    REQUIRE(g.derive.size() >= 5);
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
    CHECK(derive_seed(0, {}) == 0xE220A8397B1DCDAFULL);
    for (const auto& [in, expected] : g.derive) CHECK(derive_seed(in.first, in.second) == expected);
    for (const auto& [seed, vals] : g.xoshiro) {
        DetRng rng(seed);
        for (auto v : vals) CHECK(rng.next_u64() == v);
    }
}

TEST_CASE("derive_seed has no collisions over 10^6 single tags") {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(1'100'000);
    for (std::int64_t i = 0; i < 500'000; ++i) {
        seen.insert(derive_seed(99, {i}));
        seen.insert(derive_seed(99, {std::to_string(i)}));
    }
    CHECK(seen.size() == 1'000'000);
    CHECK(derive_seed(5, {std::string("a"), std::int64_t{1}}) != derive_seed(5, {std::int64_t{1}, std::string("a")}));
    CHECK(derive_seed(5, {std::string("ab")}) != derive_seed(5, {std::string("a"), std::string("b")}));
}

TEST_CASE("DetRng") {
    DetRng a(17), b(17);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_double() == b.next_double());

    DetRng r(1);
    CHECK(r.uniform(5, 5) == 5);
    CHECK_THROWS_AS(r.uniform(2, 1), std::invalid_argument);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform(-2, 3);
        REQUIRE(u >= -2);
        REQUIRE(u < 3);
        const auto k = r.uniform_int(-3, 3);
        REQUIRE(k >= -3);
        REQUIRE(k <= 3);
    }

    SUBCASE("gaussian moments") {
        DetRng g(2024);
        double sum = 0, sum2 = 0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) {
            const double z = g.gaussian();
            sum += z;
            sum2 += z * z;
        }
        const double mean = sum / n;
        CHECK(std::abs(mean) < 0.01);
        CHECK(std::abs(sum2 / n - mean * mean - 1.0) < 0.01);
    }
    SUBCASE("box-muller pair order") {
        DetRng u(77), g(77);
        const double u1 = u.next_double(), u2 = u.next_double();
        const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
        const double z0 = g.gaussian(), z1 = g.gaussian();
        CHECK(z0 == doctest::Approx(radius * std::cos(2 * M_PI * u2)).epsilon(1e-12));
        CHECK(z1 == doctest::Approx(radius * std::sin(2 * M_PI * u2)).epsilon(1e-12));
    }
}

// ---- codec ----

TEST_CASE("png round trip and sha256") {
    const ImageBuffer img = fixture::noise_image(13, 7, 5);
    CHECK(decode_png(encode_png(img)) == img);
    CHECK(encode_png(img) == encode_png(img));
    CHECK(sha256_hex(std::string_view("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

    const auto dir = fixture::temp_dir("codec");
    write_png(img, dir / "a" / "b.png");
    CHECK(read_image(dir / "a" / "b.png") == img);
    write_text_atomic(dir / "t.txt", "not an image");
    CHECK_THROWS_AS((void)read_image(dir / "t.txt"), std::runtime_error);
    CHECK_THROWS_AS((void)read_image(dir / "missing.png"), std::runtime_error);
}
