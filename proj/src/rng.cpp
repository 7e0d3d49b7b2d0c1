#include "xprobe/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xprobe {

std::uint64_t splitmix64(std::uint64_t x) {
    std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, const std::vector<SeedTag>& tags) {
    std::vector<std::uint8_t> buf;
    for (const auto& tag : tags) {
        if (const auto* s = std::get_if<std::string>(&tag)) {
            buf.push_back(0x01);
            put_le(buf, s->size(), 4);
            buf.insert(buf.end(), s->begin(), s->end());
        } else {
            buf.push_back(0x02);
            put_le(buf, static_cast<std::uint64_t>(std::get<std::int64_t>(tag)), 8);
        }
    }
    while (buf.size() % 8 != 0) buf.push_back(0);
    std::uint64_t h = splitmix64(master);
    for (std::size_t i = 0; i < buf.size(); i += 8) {
        std::uint64_t word = 0;
        for (int k = 0; k < 8; ++k) word |= std::uint64_t{buf[i + static_cast<std::size_t>(k)]} << (8 * k);
        h = splitmix64(h ^ word);
    }
    return h;
}

DetRng::DetRng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) {
        word = splitmix64(x);
        x += 0x9E3779B97F4A7C15ULL;
    }
}

std::uint64_t DetRng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double DetRng::next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double DetRng::uniform(double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("rng_uniform: lo > hi");
    if (lo == hi) return lo;
    const double v = lo + (hi - lo) * next_double();
    return v < hi ? v : std::nextafter(hi, lo);
}

std::int64_t DetRng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
    // reject the lowest 2^64 mod range values so every residue is equally likely
    const std::uint64_t threshold = (0 - range) % range;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x < threshold);
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % range);
}

double DetRng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(theta);
    has_spare_ = true;
    return radius * std::cos(theta);
}

}  // namespace xprobe
