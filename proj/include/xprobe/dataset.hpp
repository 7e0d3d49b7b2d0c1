#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xprobe/assets.hpp"
#include "xprobe/image.hpp"
#include "xprobe/taxonomy.hpp"

namespace xprobe {

struct SourceImage {
    std::string source_id;
    std::filesystem::path path;
    int semantic_label = -1;
};

/// Reads `source_id,path,semantic_label` rows (header required). Relative
/// paths resolve against the CSV's directory.
[[nodiscard]] std::vector<SourceImage> read_sources_csv(const std::filesystem::path& csv);
void write_sources_csv(const std::vector<SourceImage>& sources, const std::filesystem::path& csv);

/// Bilinear resize of the shorter side to `size`, then a centered size x size crop.
[[nodiscard]] ImageBuffer canonicalize(const ImageBuffer& img, std::uint32_t size);

enum class BuildMode { sampled, exhaustive };
[[nodiscard]] std::string to_string(BuildMode m);
[[nodiscard]] BuildMode build_mode_from_string(const std::string& s);

struct ExampleRecord {
    std::string example_id;
    std::string source_id;
    Split split = Split::train;
    Task task = Task::fine;
    int transform_label = 0;
    std::string class_name;
    std::string sub_transform;
    bool held_out = false;
    bool external = false;
    ParamList params;
    std::uint64_t seed = 0;
    /// Relative to the manifest's directory; empty while an external record
    /// awaits ingestion.
    std::optional<std::string> output_path;
    std::string content_hash;
    int semantic_label = -1;

    [[nodiscard]] bool pending() const { return !output_path.has_value(); }
};

struct ManifestHeader {
    Task task = Task::fine;
    Split split = Split::train;
    BuildMode mode = BuildMode::sampled;
    std::uint64_t master_seed = 0;
    std::uint32_t canonical_size = 224;
    std::string catalog_hash;
    std::string asset_bundle_hash;
    std::string tool_version;
    std::vector<std::string> labels;
};

struct Manifest {
    ManifestHeader header;
    std::vector<ExampleRecord> records;  // sorted by example_id
    /// Directory that output paths are relative to (not serialized).
    std::filesystem::path root;

    [[nodiscard]] std::size_t pending_count() const;
    [[nodiscard]] std::filesystem::path image_path(const ExampleRecord& r) const;
    /// Throws when any external record is still pending.
    void require_complete() const;
};

/// "{task}/{split}/{source_id}/{class_id}[/{sub_transform}]"
[[nodiscard]] std::string make_example_id(Task task, Split split, const std::string& source_id, int class_id,
                                          const std::string& sub_transform = {});
/// Default manifest file name inside an output directory.
[[nodiscard]] std::string manifest_file_name(Task task, Split split, BuildMode mode);

struct BuildOptions {
    Task task = Task::fine;
    Split split = Split::train;
    BuildMode mode = BuildMode::sampled;
    std::uint64_t master_seed = 0;
    std::uint32_t canonical_size = 224;
    unsigned jobs = 1;
    const AssetBundle* assets = nullptr;  // builtin() when null
};

/// Generates every example, writes PNGs under `out_dir` and the manifest to
/// `out_dir / manifest_file_name(...)`. Output is independent of `jobs`.
Manifest build_dataset(const std::vector<SourceImage>& sources, const BuildOptions& opts,
                       const std::filesystem::path& out_dir);

/// Applies a concrete instance. Identity returns the input unchanged.
[[nodiscard]] ImageBuffer apply_instance(const ImageBuffer& img, const TransformInstance& inst,
                                         const AssetBundle& assets = AssetBundle::builtin());

/// Recomputes one example image from the master seed and its example id.
/// Returns nullopt for external records.
[[nodiscard]] std::optional<ImageBuffer> regenerate_example(const ManifestHeader& header, const SourceImage& source,
                                                            const std::string& example_id,
                                                            const AssetBundle& assets = AssetBundle::builtin());

/// Resolves pending records of `sub_transform` from `dir/{source_id}.png`.
/// All-or-nothing: throws (leaving the manifest untouched) when any file is
/// missing or has the wrong dimensions.
Manifest ingest_external(const Manifest& manifest, const std::filesystem::path& dir, const std::string& sub_transform);

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
[[nodiscard]] Manifest read_manifest(const std::filesystem::path& path);

}  // namespace xprobe
