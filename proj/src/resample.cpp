#include "xprobe/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xprobe/simd.hpp"

namespace xprobe {
namespace {

struct Tap {
    std::uint32_t index;
    std::uint64_t overlap;  // in units of 1/dst_len of a source pixel
};

// Exact footprint of destination cell `i` over the source axis, in integer
// units: destination cell i spans [i*src, (i+1)*src) and source cell j spans
// [j*dst, (j+1)*dst) on a common grid of length src*dst.
std::vector<std::vector<Tap>> area_taps(std::uint32_t src, std::uint32_t dst) {
    std::vector<std::vector<Tap>> taps(dst);
    for (std::uint32_t i = 0; i < dst; ++i) {
        const std::uint64_t lo = std::uint64_t{i} * src;
        const std::uint64_t hi = lo + src;
        for (std::uint64_t j = lo / dst; j * dst < hi && j < src; ++j) {
            const std::uint64_t a = std::max(lo, j * dst);
            const std::uint64_t b = std::min(hi, (j + 1) * dst);
            if (b > a) taps[i].push_back({static_cast<std::uint32_t>(j), b - a});
        }
    }
    return taps;
}

std::uint32_t nearest_index(std::uint32_t x, std::uint32_t src, std::uint32_t dst) {
    const std::uint64_t i = (2 * std::uint64_t{x} + 1) * src / (2 * std::uint64_t{dst});
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(i, src - 1));
}

struct LinearTap {
    std::uint32_t i0, i1;
    double t;
};

LinearTap linear_tap(std::uint32_t x, std::uint32_t src, std::uint32_t dst) {
    double f = (x + 0.5) * static_cast<double>(src) / dst - 0.5;
    f = std::clamp(f, 0.0, static_cast<double>(src - 1));
    const auto i0 = static_cast<std::uint32_t>(std::floor(f));
    const std::uint32_t i1 = std::min(i0 + 1, src - 1);
    return {i0, i1, f - i0};
}

ImageBuffer resize_area(const ImageBuffer& img, std::uint32_t w, std::uint32_t h) {
    const auto tx = area_taps(img.width(), w);
    const auto ty = area_taps(img.height(), h);
    const double norm = static_cast<double>(img.width()) * img.height();
    ImageBuffer out(w, h);
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            double acc[3] = {0, 0, 0};
            for (const Tap& a : ty[y])
                for (const Tap& b : tx[x]) {
                    const Rgb p = img.at(b.index, a.index);
                    const double wgt = static_cast<double>(a.overlap * b.overlap);
                    acc[0] += wgt * p.r;
                    acc[1] += wgt * p.g;
                    acc[2] += wgt * p.b;
                }
            out.set(x, y, {round_clip(acc[0] / norm), round_clip(acc[1] / norm), round_clip(acc[2] / norm)});
        }
    }
    return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, std::uint32_t w, std::uint32_t h) {
    std::vector<LinearTap> tx(w), ty(h);
    for (std::uint32_t x = 0; x < w; ++x) tx[x] = linear_tap(x, img.width(), w);
    for (std::uint32_t y = 0; y < h; ++y) ty[y] = linear_tap(y, img.height(), h);
    ImageBuffer out(w, h);
    for (std::uint32_t y = 0; y < h; ++y) {
        const LinearTap& a = ty[y];
        for (std::uint32_t x = 0; x < w; ++x) {
            const LinearTap& b = tx[x];
            const Rgb p00 = img.at(b.i0, a.i0), p10 = img.at(b.i1, a.i0);
            const Rgb p01 = img.at(b.i0, a.i1), p11 = img.at(b.i1, a.i1);
            auto mix = [&](double v00, double v10, double v01, double v11) {
                const double top = v00 + (v10 - v00) * b.t;
                const double bottom = v01 + (v11 - v01) * b.t;
                return round_clip(top + (bottom - top) * a.t);
            };
            out.set(x, y, {mix(p00.r, p10.r, p01.r, p11.r), mix(p00.g, p10.g, p01.g, p11.g),
                           mix(p00.b, p10.b, p01.b, p11.b)});
        }
    }
    return out;
}

ImageBuffer resize_nearest(const ImageBuffer& img, std::uint32_t w, std::uint32_t h) {
    ImageBuffer out(w, h);
    for (std::uint32_t y = 0; y < h; ++y) {
        const std::uint32_t sy = nearest_index(y, img.height(), h);
        for (std::uint32_t x = 0; x < w; ++x) out.set(x, y, img.at(nearest_index(x, img.width(), w), sy));
    }
    return out;
}

std::uint32_t clamp_index(std::int64_t i, std::uint32_t n) {
    return static_cast<std::uint32_t>(std::clamp<std::int64_t>(i, 0, n - 1));
}

// Row with `pad` replicated samples on each side.
void padded_row(std::span<const float> row, std::uint32_t pad, std::vector<float>& out) {
    const std::size_t n = row.size();
    out.resize(n + 2 * std::size_t{pad});
    std::fill_n(out.begin(), pad, row.front());
    std::copy(row.begin(), row.end(), out.begin() + pad);
    std::fill(out.begin() + pad + static_cast<std::ptrdiff_t>(n), out.end(), row.back());
}

}  // namespace

ImageBuffer resize(const ImageBuffer& img, std::uint32_t w, std::uint32_t h, ResizeMode mode) {
    if (w == 0 || h == 0) throw std::invalid_argument("resize: target dimensions must be >= 1");
    if (w == img.width() && h == img.height()) return img;
    switch (mode) {
        case ResizeMode::nearest:
            return resize_nearest(img, w, h);
        case ResizeMode::area:
            return resize_area(img, w, h);
        case ResizeMode::bilinear:
            break;
    }
    return resize_bilinear(img, w, h);
}

Plane resize_plane_area(const Plane& src, std::uint32_t w, std::uint32_t h) {
    const auto tx = area_taps(src.width, w);
    const auto ty = area_taps(src.height, h);
    const double norm = static_cast<double>(src.width) * src.height;
    Plane out{w, h, std::vector<float>(std::size_t{w} * h)};
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x) {
            double acc = 0.0;
            for (const Tap& a : ty[y])
                for (const Tap& b : tx[x]) acc += static_cast<double>(a.overlap * b.overlap) * src.at(b.index, a.index);
            out.values[std::size_t{y} * w + x] = static_cast<float>(acc / norm);
        }
    return out;
}

ImageBuffer convolve2d(const ImageBuffer& img, const Kernel2d& kernel) {
    if (kernel.width % 2 == 0 || kernel.height % 2 == 0)
        throw std::invalid_argument("convolve2d: kernel dimensions must be odd");
    if (kernel.weights.size() != std::size_t{kernel.width} * kernel.height)
        throw std::invalid_argument("convolve2d: kernel weight count does not match its dimensions");
    const auto& k = simd::active();
    const std::uint32_t rx = kernel.width / 2, ry = kernel.height / 2;
    const std::uint32_t w = img.width(), h = img.height();
    ImageBuffer out = img;
    std::vector<std::vector<float>> padded(h);
    for (int c = 0; c < 3; ++c) {
        const Plane src = extract_plane(img, c);
        for (std::uint32_t y = 0; y < h; ++y) padded_row(src.row(y), rx, padded[y]);
        Plane dst{w, h, std::vector<float>(src.values.size(), 0.0f)};
        for (std::uint32_t y = 0; y < h; ++y) {
            float* row = dst.row(y).data();
            for (std::uint32_t ky = 0; ky < kernel.height; ++ky) {
                const auto& srow = padded[clamp_index(std::int64_t{y} + ky - ry, h)];
                for (std::uint32_t kx = 0; kx < kernel.width; ++kx) {
                    const auto wgt = static_cast<float>(kernel.at(kx, ky));
                    if (wgt != 0.0f) k.axpy_f32(wgt, srow.data() + kx, row, w);
                }
            }
        }
        store_plane(dst, out, c);
    }
    return out;
}

void convolve_plane_separable(Plane& plane, const std::vector<float>& kernel) {
    if (kernel.size() % 2 == 0) throw std::invalid_argument("convolve_separable: kernel length must be odd");
    const auto& k = simd::active();
    const auto r = static_cast<std::uint32_t>(kernel.size() / 2);
    const std::uint32_t w = plane.width, h = plane.height;
    Plane tmp{w, h, std::vector<float>(plane.values.size(), 0.0f)};
    std::vector<float> pad;
    for (std::uint32_t y = 0; y < h; ++y) {
        padded_row(plane.row(y), r, pad);
        float* row = tmp.row(y).data();
        for (std::size_t i = 0; i < kernel.size(); ++i) k.axpy_f32(kernel[i], pad.data() + i, row, w);
    }
    std::fill(plane.values.begin(), plane.values.end(), 0.0f);
    for (std::uint32_t y = 0; y < h; ++y) {
        float* row = plane.row(y).data();
        for (std::size_t i = 0; i < kernel.size(); ++i)
            k.axpy_f32(kernel[i], tmp.row(clamp_index(std::int64_t{y} + static_cast<std::int64_t>(i) - r, h)).data(),
                       row, w);
    }
}

ImageBuffer convolve_separable(const ImageBuffer& img, const std::vector<float>& kernel) {
    ImageBuffer out = img;
    for (int c = 0; c < 3; ++c) {
        Plane p = extract_plane(img, c);
        convolve_plane_separable(p, kernel);
        store_plane(p, out, c);
    }
    return out;
}

}  // namespace xprobe
