#pragma once

// Brute-force dithering references, written from the operation definitions
// without reusing any library code beyond the RNG. Each works on a single
// channel given as a row-major int grid.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "xprobe/rng.hpp"

namespace oracle {

using Grid = std::vector<std::vector<int>>;  // [y][x]

inline std::vector<int> levels(int bits) {
    const int n = 1 << bits;
    std::vector<int> out;
    // round-half-up of i*255/(n-1) in integer arithmetic
    for (int i = 0; i < n; ++i) out.push_back((2 * i * 255 + (n - 1)) / (2 * (n - 1)));
    return out;
}

inline int nearest(double v, const std::vector<int>& lv) {
    int best = 0;
    for (std::size_t i = 1; i < lv.size(); ++i)
        if (std::abs(v - lv[i]) < std::abs(v - lv[best])) best = static_cast<int>(i);
    return lv[static_cast<std::size_t>(best)];
}

/// Pull formulation: a pixel's value is its original plus the error shares of
/// the four already-visited neighbours, added in the order a raster push
/// would deliver them (up-left, up, up-right, left).
inline Grid floyd_steinberg(const Grid& in, int bits) {
    const auto lv = levels(bits);
    const int h = static_cast<int>(in.size()), w = static_cast<int>(in[0].size());
    Grid out(in.size(), std::vector<int>(in[0].size()));
    std::vector<std::vector<double>> err(in.size(), std::vector<double>(in[0].size(), 0.0));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = in[y][x];
            if (y > 0 && x > 0) v += err[y - 1][x - 1] * (1.0 / 16.0);
            if (y > 0) v += err[y - 1][x] * (5.0 / 16.0);
            if (y > 0 && x + 1 < w) v += err[y - 1][x + 1] * (3.0 / 16.0);
            if (x > 0) v += err[y][x - 1] * (7.0 / 16.0);
            v = v < 0 ? 0 : (v > 255 ? 255 : v);
            out[y][x] = nearest(v, lv);
            err[y][x] = v - out[y][x];
        }
    return out;
}

inline Grid ordered(const Grid& in) {
    static const int bayer[2][2] = {{0, 2}, {3, 1}};
    Grid out = in;
    for (std::size_t y = 0; y < in.size(); ++y)
        for (std::size_t x = 0; x < in[y].size(); ++x) {
            // v > (m + 0.5) * 255 / 4  <=>  8v > (2m + 1) * 255
            out[y][x] = 8 * in[y][x] > (2 * bayer[y % 2][x % 2] + 1) * 255 ? 255 : 0;
        }
    return out;
}

/// Thresholds come from the operation's child stream, one per channel value
/// in interleaved raster order; `channel` selects which one to keep.
inline Grid random(const Grid& in, std::uint64_t seed, int channel, int channels = 3) {
    xprobe::DetRng rng(xprobe::derive_seed(seed, {std::string("random_dither")}));
    Grid out = in;
    for (std::size_t y = 0; y < in.size(); ++y)
        for (std::size_t x = 0; x < in[y].size(); ++x)
            for (int c = 0; c < channels; ++c) {
                const auto t = rng.uniform_int(0, 254);
                if (c == channel) out[y][x] = in[y][x] > t ? 255 : 0;
            }
    return out;
}

}  // namespace oracle
