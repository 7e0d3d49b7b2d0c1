#pragma once

// Runtime-dispatched numeric kernels.
//
// Every variant must produce results bit-identical to the scalar reference:
// elementwise kernels use the same operation sequence per element, and dot_f32
// reduces in a fixed 8-lane striped order (lane i accumulates elements
// i, i+8, i+16, ...; lanes are combined pairwise as ((0+4)+(2+6))+((1+5)+(3+7));
// the tail is added sequentially afterwards).

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace xprobe::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
    Isa isa;
    const char* name;

    /// y[i] += a * x[i]
    void (*axpy_f32)(float a, const float* x, float* y, std::size_t n);
    /// y[i] += x[i]
    void (*add_f32)(const float* x, float* y, std::size_t n);
    float (*dot_f32)(const float* a, const float* b, std::size_t n);
    /// dst[i] = round_clip(src[i]) (floor(x + 0.5) clipped to [0,255])
    void (*round_clip_f32_u8)(const float* src, std::uint8_t* dst, std::size_t n);
    void (*invert_u8)(const std::uint8_t* src, std::uint8_t* dst, std::size_t n);
    /// dst = src > threshold ? 255 - src : src
    void (*solarize_u8)(const std::uint8_t* src, std::uint8_t* dst, std::size_t n, std::uint8_t threshold);
    void (*and_u8)(const std::uint8_t* src, std::uint8_t* dst, std::size_t n, std::uint8_t mask);
    /// x[i] = max(x[i], 0)
    void (*relu_f32)(float* x, std::size_t n);
    /// g[i] = act[i] > 0 ? g[i] : 0
    void (*relu_backward_f32)(const float* act, float* g, std::size_t n);
    /// Adam update on one tensor. bc1 = 1 - beta1^t, bc2 = 1 - beta2^t.
    void (*adam_f32)(float* w, float* m, float* v, const float* g, std::size_t n,
                     float lr, float beta1, float beta2, float bc1, float bc2, float eps);
};

/// Kernel table for a specific ISA, or nullptr when this build/CPU lacks it.
const KernelTable* table(Isa isa);

/// The table selected at first use: XPROBE_SIMD=scalar|avx2|neon|auto
/// (default auto = best supported).
const KernelTable& active();

/// Overrides the active table (tests and benchmarks). Returns false when the
/// requested ISA is unavailable.
bool force(Isa isa);

std::vector<Isa> available();
std::string_view name(Isa isa);

}  // namespace xprobe::simd
