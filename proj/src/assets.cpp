#include "xprobe/assets.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

#include "xprobe/codec.hpp"
#include "xprobe/rng.hpp"
#include "xprobe/synth.hpp"

namespace xprobe {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint32_t kIconSize = 64;
constexpr int kGlyphW = 5, kGlyphH = 7;
constexpr int kCellW = 6, kCellH = 9;
constexpr int kPageCols = 24, kPageRows = 8;

// Classic 5x7 capitals, one 5-bit row per entry (MSB = leftmost column).
constexpr std::uint8_t kFont[26][7] = {
    {14, 17, 17, 31, 17, 17, 17}, {30, 17, 17, 30, 17, 17, 30}, {14, 17, 16, 16, 16, 17, 14},
    {30, 17, 17, 17, 17, 17, 30}, {31, 16, 16, 30, 16, 16, 31}, {31, 16, 16, 30, 16, 16, 16},
    {14, 17, 16, 23, 17, 17, 15}, {17, 17, 17, 31, 17, 17, 17}, {14, 4, 4, 4, 4, 4, 14},
    {7, 2, 2, 2, 2, 18, 12},      {17, 18, 20, 24, 20, 18, 17}, {16, 16, 16, 16, 16, 16, 31},
    {17, 27, 21, 21, 17, 17, 17}, {17, 17, 25, 21, 19, 17, 17}, {14, 17, 17, 17, 17, 17, 14},
    {30, 17, 17, 30, 16, 16, 16}, {14, 17, 17, 17, 21, 18, 13}, {30, 17, 17, 30, 20, 18, 17},
    {15, 16, 16, 14, 1, 1, 30},   {31, 4, 4, 4, 4, 4, 4},       {17, 17, 17, 17, 17, 17, 14},
    {17, 17, 17, 17, 17, 10, 4},  {17, 17, 17, 21, 21, 21, 10}, {17, 17, 10, 4, 10, 17, 17},
    {17, 17, 10, 4, 4, 4, 4},     {31, 1, 2, 4, 8, 16, 31},
};

struct IconStyle {
    Rgb face;
    int eyes;   // 0 dots, 1 tall ovals, 2 happy arcs
    int mouth;  // 0 toothy grin, 1 smile arc, 2 open mouth, 3 wide grin, 4 flat
};

constexpr IconStyle kIconStyles[kIconCount] = {
    {{255, 204, 51}, 1, 0},  {{255, 170, 40}, 0, 1}, {{250, 220, 90}, 2, 2}, {{240, 190, 20}, 0, 3},
    {{255, 215, 120}, 1, 4}, {{255, 150, 60}, 2, 0}, {{230, 200, 70}, 1, 2}, {{255, 230, 0}, 0, 4},
    {{245, 175, 95}, 2, 3},  {{255, 195, 80}, 1, 1},
};

ImageBuffer make_icon(const IconStyle& st) {
    const Rgb outline{90, 60, 10}, dark{60, 30, 10}, white{255, 255, 255};
    ImageBuffer img(kIconSize, kIconSize, kIconKey);
    const double c = (kIconSize - 1) / 2.0;
    for (std::uint32_t y = 0; y < kIconSize; ++y) {
        for (std::uint32_t x = 0; x < kIconSize; ++x) {
            const double dx = x - c, dy = y - c;
            const double r = std::sqrt(dx * dx + dy * dy);
            if (r > 30.5) continue;
            Rgb px = r > 28.0 ? outline : st.face;
            // eyes at (+-10, -8)
            for (int side : {-1, 1}) {
                const double ex = dx - side * 10.0, ey = dy + 8.0;
                bool eye = false;
                switch (st.eyes) {
                    case 0: eye = ex * ex + ey * ey <= 9.0; break;
                    case 1: eye = (ex * ex) / 6.0 + (ey * ey) / 25.0 <= 1.0; break;
                    default: {
                        const double er = std::sqrt(ex * ex + (ey - 2) * (ey - 2));
                        eye = ey < 1.0 && er > 3.0 && er < 5.5;
                    }
                }
                if (eye) px = dark;
            }
            // mouth below center
            const double my = dy - 8.0;
            switch (st.mouth) {
                case 0:
                    if (my >= 0 && (dx * dx) / 256.0 + (my * my) / 144.0 <= 1.0) px = my < 4 ? white : dark;
                    break;
                case 1: {
                    const double mr = std::sqrt(dx * dx + (dy + 2) * (dy + 2));
                    if (dy > 4 && mr > 14 && mr < 17) px = dark;
                    break;
                }
                case 2:
                    if ((dx * dx) / 49.0 + ((my - 2) * (my - 2)) / 64.0 <= 1.0) px = dark;
                    break;
                case 3:
                    if (my >= -2 && (dx * dx) / 400.0 + ((my + 2) * (my + 2)) / 100.0 <= 1.0)
                        px = (std::fmod(std::abs(dx), 6.0) < 1.0 || my > 5) ? dark : white;
                    break;
                default:
                    if (std::abs(my - 3) < 1.5 && std::abs(dx) < 11) px = dark;
                    break;
            }
            img.set(x, y, px);
        }
    }
    return img;
}

ImageBuffer make_text_page(int index) {
    DetRng rng(derive_seed(0x7e47u, {std::string("text_page"), std::int64_t{index}}));
    const std::uint32_t w = kPageCols * kCellW, h = kPageRows * kCellH;
    ImageBuffer page(w, h, Rgb{0, 0, 0});
    for (int row = 0; row < kPageRows; ++row) {
        int col = 0;
        while (col < kPageCols) {
            const int word = static_cast<int>(rng.uniform_int(2, 7));
            for (int i = 0; i < word && col < kPageCols; ++i, ++col) {
                const auto letter = static_cast<std::size_t>(rng.uniform_int(0, 25));
                for (int gy = 0; gy < kGlyphH; ++gy)
                    for (int gx = 0; gx < kGlyphW; ++gx)
                        if (kFont[letter][gy] & (1 << (kGlyphW - 1 - gx)))
                            page.set(static_cast<std::uint32_t>(col * kCellW + gx),
                                     static_cast<std::uint32_t>(row * kCellH + gy), {255, 255, 255});
            }
            ++col;  // space
        }
    }
    return page;
}

std::string subdir(AssetKind kind) {
    switch (kind) {
        case AssetKind::icon: return "icons";
        case AssetKind::text_page: return "text";
        case AssetKind::distraction_image: return "distractions";
    }
    return "misc";
}

AssetKind kind_from_string(const std::string& s) {
    if (s == "icon") return AssetKind::icon;
    if (s == "text_page") return AssetKind::text_page;
    if (s == "distraction_image") return AssetKind::distraction_image;
    throw std::runtime_error("asset index: unknown kind '" + s + "'");
}

json index_json(const std::map<std::string, OverlayAsset>& assets) {
    json idx = json::array();
    for (const auto& [id, a] : assets)
        idx.push_back({{"id", id},
                       {"kind", to_string(a.kind)},
                       {"path", subdir(a.kind) + "/" + id + ".png"},
                       {"sha256", a.sha256}});
    return idx;
}

}  // namespace

std::string to_string(AssetKind kind) {
    switch (kind) {
        case AssetKind::icon: return "icon";
        case AssetKind::text_page: return "text_page";
        case AssetKind::distraction_image: return "distraction_image";
    }
    return "unknown";
}

std::string icon_id(int i) { return "icon_" + std::to_string(i); }
std::string text_page_id(int i) { return "text_" + std::to_string(i); }
std::string distraction_id(int i) { return "distraction_" + std::to_string(i); }

bool OverlayAsset::covered(std::uint32_t x, std::uint32_t y) const {
    const Rgb p = bitmap.at(x, y);
    if (kind == AssetKind::icon) return !(p == kIconKey);
    if (kind == AssetKind::text_page) return p.r >= 128;
    return true;
}

void AssetBundle::add(OverlayAsset asset) {
    if (asset.sha256.empty()) asset.sha256 = sha256_hex(encode_png(asset.bitmap));
    const std::string id = asset.id;
    if (!assets_.emplace(id, std::move(asset)).second) throw std::logic_error("duplicate asset id " + id);
}

const AssetBundle& AssetBundle::builtin() {
    static const AssetBundle bundle = [] {
        AssetBundle b;
        for (int i = 0; i < kIconCount; ++i)
            b.add({icon_id(i), AssetKind::icon, make_icon(kIconStyles[i]), {}});
        for (int i = 0; i < kTextPageCount; ++i)
            b.add({text_page_id(i), AssetKind::text_page, make_text_page(i), {}});
        for (int i = 0; i < kDistractionCount; ++i)
            b.add({distraction_id(i), AssetKind::distraction_image,
                   synth_photo(derive_seed(0xd157u, {std::int64_t{i}}), 160, 160, i % kSynthSceneKinds), {}});
        return b;
    }();
    return bundle;
}

AssetBundle AssetBundle::load(const fs::path& dir) {
    const auto bytes = read_file(dir / "index.json");
    const json idx = json::parse(bytes.begin(), bytes.end());
    AssetBundle b;
    for (const auto& e : idx) {
        const std::string id = e.at("id");
        const auto png = read_file(dir / e.at("path").get<std::string>());
        const std::string hash = sha256_hex(png);
        if (hash != e.at("sha256").get<std::string>())
            throw std::runtime_error("asset '" + id + "' hash mismatch (file modified?)");
        b.add({id, kind_from_string(e.at("kind")), decode_png(png), hash});
    }
    return b;
}

void AssetBundle::write(const fs::path& dir) const {
    for (const auto& [id, a] : assets_) write_png(a.bitmap, dir / subdir(a.kind) / (id + ".png"));
    write_text_atomic(dir / "index.json", index_json(assets_).dump(2) + "\n");
}

const OverlayAsset& AssetBundle::get(const std::string& id, AssetKind kind) const {
    const auto it = assets_.find(id);
    if (it == assets_.end() || it->second.kind != kind)
        throw std::invalid_argument("unknown " + to_string(kind) + " asset '" + id + "'");
    return it->second;
}

std::string AssetBundle::bundle_hash() const { return sha256_hex(index_json(assets_).dump()); }

}  // namespace xprobe
