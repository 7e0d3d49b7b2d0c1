// AArch64 NEON variants. Same contract as the scalar reference: no fused
// multiply-add, identical per-element operation order.
#include <arm_neon.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace xprobe::simd::detail {
namespace {

void axpy_f32(float a, const float* x, float* y, std::size_t n) {
    const float32x4_t va = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), vmulq_f32(va, vld1q_f32(x + i))));
    for (; i < n; ++i) y[i] += a * x[i];
}

void add_f32(const float* x, float* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vaddq_f32(vld1q_f32(y + i), vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

float dot_f32(const float* a, const float* b, std::size_t n) {
    float32x4_t lo = vdupq_n_f32(0.0f);
    float32x4_t hi = vdupq_n_f32(0.0f);
    const std::size_t body = n - n % 8;
    for (std::size_t i = 0; i < body; i += 8) {
        lo = vaddq_f32(lo, vmulq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
        hi = vaddq_f32(hi, vmulq_f32(vld1q_f32(a + i + 4), vld1q_f32(b + i + 4)));
    }
    float lane[8];
    vst1q_f32(lane, lo);
    vst1q_f32(lane + 4, hi);
    float r = combine_lanes(lane);
    for (std::size_t i = body; i < n; ++i) r += a[i] * b[i];
    return r;
}

void round_clip_f32_u8(const float* src, std::uint8_t* dst, std::size_t n) {
    const float32x4_t half = vdupq_n_f32(0.5f);
    const float32x4_t zero = vdupq_n_f32(0.0f);
    const float32x4_t top = vdupq_n_f32(255.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        float32x4_t r0 = vrndmq_f32(vaddq_f32(vld1q_f32(src + i), half));
        float32x4_t r1 = vrndmq_f32(vaddq_f32(vld1q_f32(src + i + 4), half));
        // bsl keeps NaN handling identical to the scalar comparisons
        r0 = vbslq_f32(vcgtq_f32(r0, zero), r0, zero);
        r1 = vbslq_f32(vcgtq_f32(r1, zero), r1, zero);
        r0 = vbslq_f32(vcltq_f32(r0, top), r0, top);
        r1 = vbslq_f32(vcltq_f32(r1, top), r1, top);
        const uint16x8_t w = vcombine_u16(vmovn_u32(vcvtq_u32_f32(r0)), vmovn_u32(vcvtq_u32_f32(r1)));
        vst1_u8(dst + i, vmovn_u16(w));
    }
    for (; i < n; ++i) {
        float r = std::floor(src[i] + 0.5f);
        r = r > 0.0f ? r : 0.0f;
        r = r < 255.0f ? r : 255.0f;
        dst[i] = static_cast<std::uint8_t>(r);
    }
}

void invert_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n) {
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) vst1q_u8(dst + i, vmvnq_u8(vld1q_u8(src + i)));
    for (; i < n; ++i) dst[i] = static_cast<std::uint8_t>(255 - src[i]);
}

void solarize_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n, std::uint8_t threshold) {
    const uint8x16_t t = vdupq_n_u8(threshold);
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        const uint8x16_t v = vld1q_u8(src + i);
        vst1q_u8(dst + i, vbslq_u8(vcgtq_u8(v, t), vmvnq_u8(v), v));
    }
    for (; i < n; ++i) dst[i] = src[i] > threshold ? static_cast<std::uint8_t>(255 - src[i]) : src[i];
}

void and_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n, std::uint8_t mask) {
    const uint8x16_t vm = vdupq_n_u8(mask);
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) vst1q_u8(dst + i, vandq_u8(vld1q_u8(src + i), vm));
    for (; i < n; ++i) dst[i] = static_cast<std::uint8_t>(src[i] & mask);
}

void relu_f32(float* x, std::size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t v = vld1q_f32(x + i);
        vst1q_f32(x + i, vbslq_f32(vcgtq_f32(v, zero), v, zero));
    }
    for (; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_f32(const float* act, float* g, std::size_t n) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vst1q_f32(g + i, vbslq_f32(vcgtq_f32(vld1q_f32(act + i), zero), vld1q_f32(g + i), zero));
    for (; i < n; ++i) g[i] = act[i] > 0.0f ? g[i] : 0.0f;
}

void adam_f32(float* w, float* m, float* v, const float* g, std::size_t n, float lr, float beta1,
              float beta2, float bc1, float bc2, float eps) {
    const float one_m_b1 = 1.0f - beta1;
    const float one_m_b2 = 1.0f - beta2;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t gi = vld1q_f32(g + i);
        const float32x4_t mi =
            vaddq_f32(vmulq_f32(vdupq_n_f32(beta1), vld1q_f32(m + i)), vmulq_f32(vdupq_n_f32(one_m_b1), gi));
        const float32x4_t vi = vaddq_f32(vmulq_f32(vdupq_n_f32(beta2), vld1q_f32(v + i)),
                                         vmulq_f32(vdupq_n_f32(one_m_b2), vmulq_f32(gi, gi)));
        vst1q_f32(m + i, mi);
        vst1q_f32(v + i, vi);
        const float32x4_t mhat = vdivq_f32(mi, vdupq_n_f32(bc1));
        const float32x4_t vhat = vdivq_f32(vi, vdupq_n_f32(bc2));
        const float32x4_t step =
            vmulq_f32(vdupq_n_f32(lr), vdivq_f32(mhat, vaddq_f32(vsqrtq_f32(vhat), vdupq_n_f32(eps))));
        vst1q_f32(w + i, vsubq_f32(vld1q_f32(w + i), step));
    }
    for (; i < n; ++i) {
        const float gi = g[i];
        const float mi = beta1 * m[i] + one_m_b1 * gi;
        const float vi = beta2 * v[i] + one_m_b2 * (gi * gi);
        m[i] = mi;
        v[i] = vi;
        w[i] = w[i] - lr * ((mi / bc1) / (std::sqrt(vi / bc2) + eps));
    }
}

}  // namespace

const KernelTable kNeonTable{
    Isa::neon,   "neon",      axpy_f32, add_f32,  dot_f32,           round_clip_f32_u8,
    invert_u8,   solarize_u8, and_u8,   relu_f32, relu_backward_f32, adam_f32,
};

}  // namespace xprobe::simd::detail
