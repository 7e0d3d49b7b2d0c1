#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "xprobe/image.hpp"

namespace xprobe {

inline constexpr std::size_t kToyEmbedDim = 45;

/// Hand-built image features, fixed layout:
///   [0,3) channel means   [3,6) channel stds   [6,14) luma histogram
///   [14,22) hue histogram over pixels with s > 25   [22,24) saturation mean/std
///   [24,26) mean |dx|, |dy| of luma   [26] mean |Laplacian| of luma
///   [27] fraction pure black   [28] fraction pure white   [29,45) 4x4 luma grid
/// Intensities are scaled to [0, 1]; accumulation is f64 in a fixed order.
[[nodiscard]] std::vector<float> toy_embed(const ImageBuffer& img);

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// example_id -> fixed-length f32 vector.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::uint32_t dim = 1, std::string provenance = {});

    [[nodiscard]] std::uint32_t dim() const { return dim_; }
    [[nodiscard]] const std::string& provenance() const { return provenance_; }
    [[nodiscard]] std::size_t size() const { return rows_.size(); }
    [[nodiscard]] bool contains(const std::string& id) const { return index_.count(id) != 0; }
    /// Throws on wrong length, non-finite values or a duplicate id.
    void add(const std::string& id, std::vector<float> vec);
    [[nodiscard]] const std::vector<float>& at(const std::string& id) const;
    /// Ids in insertion order.
    [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }

    friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b);

private:
    std::uint32_t dim_;
    std::string provenance_;
    std::vector<std::string> ids_;
    std::vector<std::vector<float>> rows_;
    std::map<std::string, std::size_t> index_;
};

/// "XPEB" file, version 1, little-endian (see README).
void write_table(const EmbeddingTable& table, const std::filesystem::path& path);
[[nodiscard]] EmbeddingTable read_table(const std::filesystem::path& path);

/// Row-major matrix of `rows` x `cols` floats.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    [[nodiscard]] const float* row(std::size_t r) const { return data.data() + r * cols; }
    [[nodiscard]] float* row(std::size_t r) { return data.data() + r * cols; }
};

/// Rows in request order; throws listing every missing id.
[[nodiscard]] Matrix lookup(const EmbeddingTable& table, const std::vector<std::string>& ids);

}  // namespace xprobe
