#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xprobe/image.hpp"

namespace xprobe {

enum class AssetKind { icon, text_page, distraction_image };

[[nodiscard]] std::string to_string(AssetKind kind);

/// Bundled overlay asset. Icons use chroma key (255, 0, 255) for "not covered";
/// text pages are coverage masks (white = covered).
struct OverlayAsset {
    std::string id;
    AssetKind kind;
    ImageBuffer bitmap;
    std::string sha256;  // of the PNG encoding

    [[nodiscard]] bool covered(std::uint32_t x, std::uint32_t y) const;
};

inline constexpr Rgb kIconKey{255, 0, 255};
inline constexpr int kIconCount = 10;
inline constexpr int kTextPageCount = 10;
inline constexpr int kDistractionCount = 11;

class AssetBundle {
public:
    /// Procedurally generated icons (grinning-face variants), 5x7-font
    /// gibberish pages and synthetic distraction photos.
    static const AssetBundle& builtin();
    /// Loads `dir/index.json` and verifies each file's hash; throws on mismatch.
    static AssetBundle load(const std::filesystem::path& dir);

    /// Writes assets/{icons,text,distractions}/*.png plus index.json.
    void write(const std::filesystem::path& dir) const;

    [[nodiscard]] const OverlayAsset& get(const std::string& id, AssetKind kind) const;
    [[nodiscard]] const std::map<std::string, OverlayAsset>& all() const { return assets_; }
    /// Hash of the canonical index (ids, kinds, file hashes).
    [[nodiscard]] std::string bundle_hash() const;

private:
    void add(OverlayAsset asset);
    std::map<std::string, OverlayAsset> assets_;
};

[[nodiscard]] std::string icon_id(int i);
[[nodiscard]] std::string text_page_id(int i);
[[nodiscard]] std::string distraction_id(int i);

}  // namespace xprobe
