#include "xprobe/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "xprobe/codec.hpp"
#include "xprobe/color.hpp"
#include "xprobe/resample.hpp"

namespace xprobe {
namespace {

constexpr char kMagic[4] = {'X', 'P', 'E', 'B'};
constexpr std::uint32_t kVersion = 1;

struct Moments {
    double sum = 0.0;
    double sq = 0.0;
    void add(double v) {
        sum += v;
        sq += v * v;
    }
    [[nodiscard]] double mean(double n) const { return sum / n; }
    [[nodiscard]] double stddev(double n) const {
        const double m = sum / n;
        return std::sqrt(std::max(0.0, sq / n - m * m));
    }
};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    template <class T>
    void le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float f) { le(std::bit_cast<std::uint32_t>(f)); }
    std::vector<std::uint8_t> out;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : buf(b) {}
    const std::uint8_t* take(std::size_t n) {
        if (buf.size() - pos < n) throw FormatError("embedding table truncated at byte " + std::to_string(pos));
        const std::uint8_t* p = buf.data() + pos;
        pos += n;
        return p;
    }
    template <class T>
    T le() {
        const std::uint8_t* p = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T{p[i]} << (8 * i));
        return v;
    }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    std::string str(std::size_t n) {
        const auto* p = take(n);
        return {reinterpret_cast<const char*>(p), n};
    }
    bool done() const { return pos == buf.size(); }

    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;
};

}  // namespace

std::vector<float> toy_embed(const ImageBuffer& img) {
    const std::uint32_t w = img.width(), h = img.height();
    const double n = static_cast<double>(img.pixel_count());
    std::vector<double> f(kToyEmbedDim, 0.0);

    Plane luma{w, h, std::vector<float>(img.pixel_count())};
    Moments ch[3], sat;
    double luma_hist[8] = {}, hue_hist[8] = {};
    double hue_count = 0.0, black = 0.0, white = 0.0;
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            const Rgb p = img.at(x, y);
            ch[0].add(p.r / 255.0);
            ch[1].add(p.g / 255.0);
            ch[2].add(p.b / 255.0);
            const double l = luma601(p);
            luma.values[std::size_t{y} * w + x] = static_cast<float>(l / 255.0);
            luma_hist[std::min(7, static_cast<int>(l / 32.0))] += 1.0;
            const HslPixel hsl = rgb_to_hsl(p);
            sat.add(hsl.s / 255.0);
            if (hsl.s > 25.0) {
                hue_hist[std::min(7, static_cast<int>(hsl.h / 45.0))] += 1.0;
                hue_count += 1.0;
            }
            if (p.r == 0 && p.g == 0 && p.b == 0) black += 1.0;
            if (p.r == 255 && p.g == 255 && p.b == 255) white += 1.0;
        }
    }
    for (int c = 0; c < 3; ++c) {
        f[c] = ch[c].mean(n);
        f[3 + c] = ch[c].stddev(n);
    }
    for (int i = 0; i < 8; ++i) {
        f[6 + i] = luma_hist[i] / n;
        f[14 + i] = hue_count > 0.0 ? hue_hist[i] / hue_count : 0.0;
    }
    f[22] = sat.mean(n);
    f[23] = sat.stddev(n);

    double dx = 0.0, dy = 0.0, lap = 0.0;
    auto L = [&](std::int64_t x, std::int64_t y) {
        x = std::clamp<std::int64_t>(x, 0, w - 1);
        y = std::clamp<std::int64_t>(y, 0, h - 1);
        return static_cast<double>(luma.values[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)]);
    };
    for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
            const double c = L(x, y);
            dx += std::abs(L(x + 1, y) - c);
            dy += std::abs(L(x, y + 1) - c);
            lap += std::abs(L(x - 1, y) + L(x + 1, y) + L(x, y - 1) + L(x, y + 1) - 4.0 * c);
        }
    f[24] = dx / n;
    f[25] = dy / n;
    f[26] = lap / n;
    f[27] = black / n;
    f[28] = white / n;

    const Plane grid = resize_plane_area(luma, 4, 4);
    for (std::size_t i = 0; i < 16; ++i) f[29 + i] = grid.values[i];

    std::vector<float> out(kToyEmbedDim);
    for (std::size_t i = 0; i < kToyEmbedDim; ++i) out[i] = static_cast<float>(f[i]);
    return out;
}

EmbeddingTable::EmbeddingTable(std::uint32_t dim, std::string provenance)
    : dim_(dim), provenance_(std::move(provenance)) {
    if (dim_ == 0) throw std::invalid_argument("embedding dim must be >= 1");
}

void EmbeddingTable::add(const std::string& id, std::vector<float> vec) {
    if (vec.size() != dim_)
        throw std::invalid_argument("embedding for '" + id + "' has " + std::to_string(vec.size()) + " values, expected " +
                                    std::to_string(dim_));
    if (!std::all_of(vec.begin(), vec.end(), [](float v) { return std::isfinite(v); }))
        throw std::invalid_argument("embedding for '" + id + "' has non-finite values");
    if (id.size() > 0xFFFF) throw std::invalid_argument("example id too long");
    if (!index_.emplace(id, rows_.size()).second) throw std::invalid_argument("duplicate example id '" + id + "'");
    ids_.push_back(id);
    rows_.push_back(std::move(vec));
}

const std::vector<float>& EmbeddingTable::at(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("no embedding for '" + id + "'");
    return rows_[it->second];
}

bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    if (a.dim_ != b.dim_ || a.provenance_ != b.provenance_ || a.ids_ != b.ids_) return false;
    for (std::size_t i = 0; i < a.rows_.size(); ++i)
        if (std::memcmp(a.rows_[i].data(), b.rows_[i].data(), a.dim_ * sizeof(float)) != 0) return false;
    return true;
}

void write_table(const EmbeddingTable& table, const std::filesystem::path& path) {
    if (table.size() == 0) throw std::invalid_argument("refusing to write an empty embedding table");
    Writer w;
    w.bytes(kMagic, 4);
    w.le<std::uint32_t>(kVersion);
    w.le<std::uint32_t>(table.dim());
    w.le<std::uint64_t>(table.size());
    for (const auto& id : table.ids()) {
        w.le<std::uint16_t>(static_cast<std::uint16_t>(id.size()));
        w.bytes(id.data(), id.size());
        for (float v : table.at(id)) w.f32(v);
    }
    w.le<std::uint32_t>(static_cast<std::uint32_t>(table.provenance().size()));
    w.bytes(table.provenance().data(), table.provenance().size());
    write_file_atomic(path, w.out);
}

EmbeddingTable read_table(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    Reader r(bytes);
    if (std::memcmp(r.take(4), kMagic, 4) != 0) throw FormatError(path.string() + ": bad magic (not an XPEB table)");
    if (const auto v = r.le<std::uint32_t>(); v != kVersion)
        throw FormatError(path.string() + ": unsupported version " + std::to_string(v));
    const auto dim = r.le<std::uint32_t>();
    const auto count = r.le<std::uint64_t>();
    if (dim == 0) throw FormatError(path.string() + ": zero dimension");
    std::vector<std::pair<std::string, std::vector<float>>> entries;
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string id = r.str(r.le<std::uint16_t>());
        std::vector<float> vec(dim);
        for (auto& v : vec) v = r.f32();
        entries.emplace_back(std::move(id), std::move(vec));
    }
    std::string provenance = r.str(r.le<std::uint32_t>());
    if (!r.done()) throw FormatError(path.string() + ": trailing bytes after provenance");
    EmbeddingTable table(dim, std::move(provenance));
    for (auto& [id, vec] : entries) {
        if (table.contains(id)) throw FormatError(path.string() + ": duplicate example id '" + id + "'");
        try {
            table.add(id, std::move(vec));
        } catch (const std::invalid_argument& e) {
            throw FormatError(path.string() + ": " + e.what());
        }
    }
    return table;
}

Matrix lookup(const EmbeddingTable& table, const std::vector<std::string>& ids) {
    std::vector<std::string> missing;
    for (const auto& id : ids)
        if (!table.contains(id)) missing.push_back(id);
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " example id(s) missing from embedding table:";
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
        if (missing.size() > 20) msg += " ...";
        throw std::out_of_range(msg);
    }
    Matrix m{ids.size(), table.dim(), std::vector<float>(ids.size() * table.dim())};
    for (std::size_t i = 0; i < ids.size(); ++i) std::copy_n(table.at(ids[i]).data(), table.dim(), m.row(i));
    return m;
}

}  // namespace xprobe
