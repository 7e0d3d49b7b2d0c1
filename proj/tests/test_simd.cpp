#include <doctest.h>

#include <bit>
#include <cstring>
#include <limits>

#include "fixtures.hpp"
#include "xprobe/probe.hpp"
#include "xprobe/simd.hpp"
#include "xprobe/xform_geom.hpp"

using namespace xprobe;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed, double lo = -300.0, double hi = 300.0) {
    DetRng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
    return v;
}

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
    DetRng rng(seed);
    std::vector<std::uint8_t> v(n);
    for (auto& x : v) x = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return v;
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

// Restores the default table when a test case forces another.
struct ForceGuard {
    simd::Isa saved = simd::active().isa;
    ~ForceGuard() { simd::force(saved); }
};

}  // namespace

TEST_CASE("scalar table is always available and listed first") {
    REQUIRE(simd::table(simd::Isa::scalar) != nullptr);
    CHECK(simd::available().front() == simd::Isa::scalar);
    CHECK(simd::name(simd::Isa::avx2) == "avx2");
    MESSAGE("active kernels: " << simd::active().name);
}

TEST_CASE("every vector table is bit-identical to scalar") {
    const simd::KernelTable& ref = *simd::table(simd::Isa::scalar);
    for (simd::Isa isa : simd::available()) {
        const simd::KernelTable& k = *simd::table(isa);
        CAPTURE(k.name);
        for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 31u, 32u, 33u, 64u, 67u, 257u}) {
            CAPTURE(n);
            const auto x = random_floats(n, 10 + n), y0 = random_floats(n, 20 + n);

            auto ya = y0, yb = y0;
            ref.axpy_f32(0.37f, x.data(), ya.data(), n);
            k.axpy_f32(0.37f, x.data(), yb.data(), n);
            CHECK(same_bits(ya, yb));

            ya = y0, yb = y0;
            ref.add_f32(x.data(), ya.data(), n);
            k.add_f32(x.data(), yb.data(), n);
            CHECK(same_bits(ya, yb));

            CHECK(std::bit_cast<std::uint32_t>(ref.dot_f32(x.data(), y0.data(), n)) ==
                  std::bit_cast<std::uint32_t>(k.dot_f32(x.data(), y0.data(), n)));

            // Includes exact .5 cases, negatives, overflow and NaN.
            auto f = random_floats(n, 30 + n, -40.0, 300.0);
            for (std::size_t i = 0; i < n; i += 5) f[i] = static_cast<float>(static_cast<int>(f[i])) + 0.5f;
            if (n > 2) f[2] = std::numeric_limits<float>::quiet_NaN();
            std::vector<std::uint8_t> ua(n), ub(n);
            ref.round_clip_f32_u8(f.data(), ua.data(), n);
            k.round_clip_f32_u8(f.data(), ub.data(), n);
            CHECK(ua == ub);

            const auto bytes = random_bytes(n, 40 + n);
            ref.invert_u8(bytes.data(), ua.data(), n);
            k.invert_u8(bytes.data(), ub.data(), n);
            CHECK(ua == ub);
            for (std::uint8_t t : {0, 127, 192, 255}) {
                ref.solarize_u8(bytes.data(), ua.data(), n, t);
                k.solarize_u8(bytes.data(), ub.data(), n, t);
                CHECK(ua == ub);
            }
            ref.and_u8(bytes.data(), ua.data(), n, 0xC0);
            k.and_u8(bytes.data(), ub.data(), n, 0xC0);
            CHECK(ua == ub);

            ya = x, yb = x;
            ref.relu_f32(ya.data(), n);
            k.relu_f32(yb.data(), n);
            CHECK(same_bits(ya, yb));

            ya = y0, yb = y0;
            ref.relu_backward_f32(x.data(), ya.data(), n);
            k.relu_backward_f32(x.data(), yb.data(), n);
            CHECK(same_bits(ya, yb));

            auto wa = random_floats(n, 50 + n, -1, 1), wb = wa;
            auto ma = random_floats(n, 60 + n, -0.1, 0.1), mb = ma;
            auto va = random_floats(n, 70 + n, 0, 0.01), vb = va;
            const auto g = random_floats(n, 80 + n, -1, 1);
            ref.adam_f32(wa.data(), ma.data(), va.data(), g.data(), n, 1e-3f, 0.9f, 0.999f, 0.19f, 0.002f, 1e-8f);
            k.adam_f32(wb.data(), mb.data(), vb.data(), g.data(), n, 1e-3f, 0.9f, 0.999f, 0.19f, 0.002f, 1e-8f);
            CHECK(same_bits(wa, wb));
            CHECK(same_bits(ma, mb));
            CHECK(same_bits(va, vb));
        }
    }
}

TEST_CASE("pipelines agree across forced kernel tables") {
    ForceGuard guard;
    const ImageBuffer img = fixture::photo(5, 64);

    ProbeConfig cfg;
    cfg.input_dim = 12;
    cfg.hidden_width = 24;
    cfg.n_transform_classes = 3;
    cfg.n_semantic_classes = 2;
    cfg.batch_size = 16;
    cfg.total_examples_seen = 16 * 20;
    TrainSet ts;
    ts.data.x = {64, 12, random_floats(64 * 12, 3, -1, 1)};
    for (int i = 0; i < 64; ++i) {
        ts.data.t.push_back(i % 3);
        ts.data.y.push_back(i % 2);
    }

    REQUIRE(simd::force(simd::Isa::scalar));
    const ImageBuffer blur_ref = gaussian_blur(img, 2.5);
    const TrainResult train_ref = train(cfg, ts);
    for (simd::Isa isa : simd::available()) {
        CAPTURE(simd::name(isa));
        REQUIRE(simd::force(isa));
        CHECK(gaussian_blur(img, 2.5) == blur_ref);
        const TrainResult res = train(cfg, ts);
        for (std::size_t i = 0; i < res.model.params.size(); ++i)
            CHECK(same_bits(res.model.params[i].data, train_ref.model.params[i].data));
    }
}
