#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"

namespace xprobe::simd {
namespace {

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(XPROBE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            __builtin_cpu_init();
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::neon:
#if defined(XPROBE_HAVE_NEON)
            return true;  // mandatory on AArch64
#else
            return false;
#endif
    }
    return false;
}

const KernelTable* pick_default() {
    const char* env = std::getenv("XPROBE_SIMD");
    const std::string want = env ? env : "auto";
    if (want == "scalar") return &detail::kScalarTable;
    if (want == "avx2" && table(Isa::avx2)) return table(Isa::avx2);
    if (want == "neon" && table(Isa::neon)) return table(Isa::neon);
    if (const auto* t = table(Isa::avx2)) return t;
    if (const auto* t = table(Isa::neon)) return t;
    return &detail::kScalarTable;
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> s{pick_default()};
    return s;
}

}  // namespace

const KernelTable* table(Isa isa) {
    if (!cpu_supports(isa)) return nullptr;
    switch (isa) {
        case Isa::scalar:
            return &detail::kScalarTable;
        case Isa::avx2:
#if defined(XPROBE_HAVE_AVX2)
            return &detail::kAvx2Table;
#else
            return nullptr;
#endif
        case Isa::neon:
#if defined(XPROBE_HAVE_NEON)
            return &detail::kNeonTable;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool force(Isa isa) {
    const KernelTable* t = table(isa);
    if (!t) return false;
    slot().store(t, std::memory_order_release);
    return true;
}

std::vector<Isa> available() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
        if (table(isa)) out.push_back(isa);
    return out;
}

std::string_view name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
        case Isa::neon:
            return "neon";
    }
    return "unknown";
}

}  // namespace xprobe::simd
