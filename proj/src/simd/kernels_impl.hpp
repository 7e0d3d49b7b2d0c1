#pragma once

#include "xprobe/simd.hpp"

namespace xprobe::simd::detail {

/// Pairwise lane reduction shared by every dot_f32 variant.
inline float combine_lanes(const float lane[8]) {
    const float a = lane[0] + lane[4];
    const float b = lane[2] + lane[6];
    const float c = lane[1] + lane[5];
    const float d = lane[3] + lane[7];
    return (a + b) + (c + d);
}

extern const KernelTable kScalarTable;
#if defined(XPROBE_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(XPROBE_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

}  // namespace xprobe::simd::detail
