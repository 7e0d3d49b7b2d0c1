#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

namespace xprobe {

/// One splitmix64 step on `x` (state += golden gamma, then the finalizer).
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x);

using SeedTag = std::variant<std::string, std::int64_t>;

/// Mixes a master seed with an ordered tag list. Tags are serialized as
/// 0x01 + u32le length + bytes (strings) or 0x02 + i64le (integers), padded
/// with zeros to 8-byte words, and folded as h = splitmix64(h ^ word) starting
/// from h = splitmix64(master).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, const std::vector<SeedTag>& tags);

/// xoshiro256** seeded through splitmix64. Single owner; never share across
/// threads, derive child seeds instead.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 bits.
    double next_double();
    /// Uniform in [lo, hi); returns lo when lo == hi. Throws when lo > hi.
    double uniform(double lo, double hi);
    /// Uniform integer in [lo, hi] inclusive (unbiased).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    /// Standard normal via Box-Muller; the cos branch is returned first and
    /// the sin branch is cached for the next call.
    double gaussian();
    bool bernoulli(double p) { return next_double() < p; }

private:
    std::array<std::uint64_t, 4> s_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace xprobe
