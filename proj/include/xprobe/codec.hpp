#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xprobe/image.hpp"

namespace xprobe {

[[nodiscard]] std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
[[nodiscard]] ImageBuffer decode_png(std::span<const std::uint8_t> bytes);

/// Baseline JPEG, 4:2:0 chroma, libjpeg quality scaling, integer DCT.
[[nodiscard]] std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality);
[[nodiscard]] ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes);

/// Decodes a PNG or JPEG file (by signature). Alpha is dropped, gray expanded.
[[nodiscard]] ImageBuffer read_image(const std::filesystem::path& path);
/// Writes a PNG atomically (temp file + rename).
void write_png(const ImageBuffer& img, const std::filesystem::path& path);

[[nodiscard]] std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes bytes to `path` via a sibling temp file renamed into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

/// Lower-case hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::span<const std::uint8_t> bytes);
[[nodiscard]] std::string sha256_hex(std::string_view text);

}  // namespace xprobe
