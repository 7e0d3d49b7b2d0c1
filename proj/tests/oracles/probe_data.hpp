#pragma once

#include <cstdint>

#include "xprobe/probe.hpp"

namespace oracle {

/// Gaussian blobs: class c is centered at `sep` along axis c (and axis
/// c + classes when it fits), unit-free noise of `sigma` elsewhere. Linearly
/// separable with margin for sep >> sigma.
inline xprobe::LabeledSet blobs(std::size_t n, std::uint32_t dim, int classes, double sep, double sigma,
                                std::uint64_t seed, int semantic_classes = 0) {
    xprobe::DetRng rng(seed);
    xprobe::LabeledSet s;
    s.x = {n, dim, std::vector<float>(n * dim)};
    for (std::size_t r = 0; r < n; ++r) {
        const int c = static_cast<int>(rng.uniform_int(0, classes - 1));
        s.t.push_back(c);
        float* row = s.x.row(r);
        for (std::uint32_t i = 0; i < dim; ++i) row[i] = static_cast<float>(sigma * rng.gaussian());
        row[c % dim] += static_cast<float>(sep);
        if (static_cast<std::uint32_t>(c + classes) < dim) row[c + classes] += static_cast<float>(sep);
        if (semantic_classes > 0) s.y.push_back(c % semantic_classes);
    }
    return s;
}

inline double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == truth[i];
    return pred.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(pred.size());
}

}  // namespace oracle
