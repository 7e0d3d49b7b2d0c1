#include <cmath>

#include "kernels_impl.hpp"

namespace xprobe::simd::detail {
namespace {

void axpy_f32(float a, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_f32(const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
}

float dot_f32(const float* a, const float* b, std::size_t n) {
    float lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    const std::size_t body = n - n % 8;
    for (std::size_t i = 0; i < body; i += 8)
        for (std::size_t k = 0; k < 8; ++k) lane[k] += a[i + k] * b[i + k];
    float acc = combine_lanes(lane);
    for (std::size_t i = body; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void round_clip_f32_u8(const float* src, std::uint8_t* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        float r = std::floor(src[i] + 0.5f);
        r = r > 0.0f ? r : 0.0f;
        r = r < 255.0f ? r : 255.0f;
        dst[i] = static_cast<std::uint8_t>(r);
    }
}

void invert_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<std::uint8_t>(255 - src[i]);
}

void solarize_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n, std::uint8_t threshold) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] = src[i] > threshold ? static_cast<std::uint8_t>(255 - src[i]) : src[i];
}

void and_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n, std::uint8_t mask) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<std::uint8_t>(src[i] & mask);
}

void relu_f32(float* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_f32(const float* act, float* g, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) g[i] = act[i] > 0.0f ? g[i] : 0.0f;
}

void adam_f32(float* w, float* m, float* v, const float* g, std::size_t n, float lr, float beta1,
              float beta2, float bc1, float bc2, float eps) {
    const float one_m_b1 = 1.0f - beta1;
    const float one_m_b2 = 1.0f - beta2;
    for (std::size_t i = 0; i < n; ++i) {
        const float gi = g[i];
        const float mi = beta1 * m[i] + one_m_b1 * gi;
        const float vi = beta2 * v[i] + one_m_b2 * (gi * gi);
        m[i] = mi;
        v[i] = vi;
        const float mhat = mi / bc1;
        const float vhat = vi / bc2;
        w[i] = w[i] - lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace

const KernelTable kScalarTable{
    Isa::scalar,       "scalar", axpy_f32,         add_f32,           dot_f32,  round_clip_f32_u8,
    invert_u8,         solarize_u8, and_u8,        relu_f32,          relu_backward_f32, adam_f32,
};

}  // namespace xprobe::simd::detail
