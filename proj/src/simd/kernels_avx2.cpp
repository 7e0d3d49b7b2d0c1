// Compiled with -mavx2 (no FMA); only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace xprobe::simd::detail {
namespace {

void axpy_f32(float a, const float* x, float* y, std::size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void add_f32(const float* x, float* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

float dot_f32(const float* a, const float* b, std::size_t n) {
    __m256 acc = _mm256_setzero_ps();
    const std::size_t body = n - n % 8;
    for (std::size_t i = 0; i < body; i += 8)
        acc = _mm256_add_ps(acc, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    alignas(32) float lane[8];
    _mm256_store_ps(lane, acc);
    float r = combine_lanes(lane);
    for (std::size_t i = body; i < n; ++i) r += a[i] * b[i];
    return r;
}

void round_clip_f32_u8(const float* src, std::uint8_t* dst, std::size_t n) {
    const __m256 half = _mm256_set1_ps(0.5f);
    const __m256 zero = _mm256_setzero_ps();
    const __m256 top = _mm256_set1_ps(255.0f);
    const __m256i gather = _mm256_setr_epi32(0, 4, 1, 5, 2, 6, 3, 7);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 r = _mm256_floor_ps(_mm256_add_ps(_mm256_loadu_ps(src + i), half));
        r = _mm256_max_ps(r, zero);
        r = _mm256_min_ps(r, top);
        const __m256i v32 = _mm256_cvtps_epi32(r);
        const __m256i v16 = _mm256_packus_epi32(v32, v32);
        const __m256i v8 = _mm256_packus_epi16(v16, v16);
        const __m256i packed = _mm256_permutevar8x32_epi32(v8, gather);
        _mm_storel_epi64(reinterpret_cast<__m128i*>(dst + i), _mm256_castsi256_si128(packed));
    }
    for (; i < n; ++i) {
        float r = std::floor(src[i] + 0.5f);
        r = r > 0.0f ? r : 0.0f;
        r = r < 255.0f ? r : 255.0f;
        dst[i] = static_cast<std::uint8_t>(r);
    }
}

void invert_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n) {
    const __m256i ones = _mm256_set1_epi8(static_cast<char>(0xFF));
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(v, ones));
    }
    for (; i < n; ++i) dst[i] = static_cast<std::uint8_t>(255 - src[i]);
}

void solarize_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n, std::uint8_t threshold) {
    std::size_t i = 0;
    if (threshold < 255) {
        const __m256i above = _mm256_set1_epi8(static_cast<char>(threshold + 1));
        const __m256i ones = _mm256_set1_epi8(static_cast<char>(0xFF));
        for (; i + 32 <= n; i += 32) {
            const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
            const __m256i mask = _mm256_cmpeq_epi8(_mm256_max_epu8(v, above), v);
            const __m256i out = _mm256_blendv_epi8(v, _mm256_xor_si256(v, ones), mask);
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), out);
        }
    }
    for (; i < n; ++i) dst[i] = src[i] > threshold ? static_cast<std::uint8_t>(255 - src[i]) : src[i];
}

void and_u8(const std::uint8_t* src, std::uint8_t* dst, std::size_t n, std::uint8_t mask) {
    const __m256i vm = _mm256_set1_epi8(static_cast<char>(mask));
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_and_si256(v, vm));
    }
    for (; i < n; ++i) dst[i] = static_cast<std::uint8_t>(src[i] & mask);
}

void relu_f32(float* x, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    for (; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_f32(const float* act, float* g, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(act + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(g + i, _mm256_and_ps(_mm256_loadu_ps(g + i), mask));
    }
    for (; i < n; ++i) g[i] = act[i] > 0.0f ? g[i] : 0.0f;
}

void adam_f32(float* w, float* m, float* v, const float* g, std::size_t n, float lr, float beta1,
              float beta2, float bc1, float bc2, float eps) {
    const float one_m_b1 = 1.0f - beta1;
    const float one_m_b2 = 1.0f - beta2;
    const __m256 vb1 = _mm256_set1_ps(beta1), vb2 = _mm256_set1_ps(beta2);
    const __m256 vc1 = _mm256_set1_ps(one_m_b1), vc2 = _mm256_set1_ps(one_m_b2);
    const __m256 vbc1 = _mm256_set1_ps(bc1), vbc2 = _mm256_set1_ps(bc2);
    const __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gi = _mm256_loadu_ps(g + i);
        const __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(vc1, gi));
        const __m256 vi = _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)),
                                        _mm256_mul_ps(vc2, _mm256_mul_ps(gi, gi)));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        const __m256 mhat = _mm256_div_ps(mi, vbc1);
        const __m256 vhat = _mm256_div_ps(vi, vbc2);
        const __m256 step = _mm256_mul_ps(vlr, _mm256_div_ps(mhat, _mm256_add_ps(_mm256_sqrt_ps(vhat), veps)));
        _mm256_storeu_ps(w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), step));
    }
    for (; i < n; ++i) {
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

const KernelTable kAvx2Table{
    Isa::avx2,   "avx2",      axpy_f32, add_f32,  dot_f32,           round_clip_f32_u8,
    invert_u8,   solarize_u8, and_u8,   relu_f32, relu_backward_f32, adam_f32,
};

}  // namespace xprobe::simd::detail
