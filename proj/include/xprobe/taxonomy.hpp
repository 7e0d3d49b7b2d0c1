#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace xprobe {

enum class Task { fine, coarse };
enum class Split { train, test };

[[nodiscard]] std::string to_string(Task t);
[[nodiscard]] std::string to_string(Split s);
[[nodiscard]] Task task_from_string(const std::string& s);
[[nodiscard]] Split split_from_string(const std::string& s);

/// Operation identifiers understood by apply_instance.
enum class OpKind {
    identity,
    hue,
    saturation,
    lightness,
    gaussian_noise,
    impulse_noise,
    random_dither,
    ordered_dither,
    fs_dither,
    jpeg,
    gaussian_blur,
    motion_blur,
    pixelate,
    blurry_background,
    corner_crop,
    rotate,
    flip_vertical,
    transpose,
    line_shift,
    posterize,
    solarize,
    invert,
    grayscale,
    quantize_colors,
    hsl_as_rgb,
    grid_overlay,
    line_overlay,
    text_overlay,
    icon_overlay,
    image_overlay,
    fuse_background,
    halftone,
    external,
};

[[nodiscard]] std::string to_string(OpKind k);
[[nodiscard]] OpKind op_kind_from_string(const std::string& s);

using ParamValue = std::variant<std::int64_t, double, std::string>;

struct ParamSpec {
    enum class Dist { constant, uniform, uniform_int, choice, signed_uniform };

    std::string name;
    Dist dist = Dist::constant;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<ParamValue> values;  // constant: one value; choice: candidates

    static ParamSpec constant(std::string name, ParamValue v);
    static ParamSpec uniform(std::string name, double lo, double hi);
    static ParamSpec uniform_int(std::string name, std::int64_t lo, std::int64_t hi);
    static ParamSpec choice(std::string name, std::vector<ParamValue> values);
    /// Sign from a fair coin, magnitude uniform in [lo, hi].
    static ParamSpec signed_uniform(std::string name, double lo, double hi);

    /// True when `v` is a value this spec can produce.
    [[nodiscard]] bool contains(const ParamValue& v) const;
};

/// Parameters in declaration order.
using ParamList = std::vector<std::pair<std::string, ParamValue>>;

struct TransformClass {
    int class_id = 0;
    std::string class_name;
    std::string sub_transform;  // equals class_name in the fine task
    OpKind kind = OpKind::identity;
    std::vector<ParamSpec> params;
    bool held_out = false;
    bool external = false;
};

struct TransformInstance {
    OpKind kind = OpKind::identity;
    int class_id = 0;
    std::string class_name;
    std::string sub_transform;
    ParamList params;
    std::uint64_t seed = 0;

    [[nodiscard]] const ParamValue& param(const std::string& name) const;
    [[nodiscard]] double real(const std::string& name) const;
    [[nodiscard]] std::int64_t integer(const std::string& name) const;
    [[nodiscard]] const std::string& text(const std::string& name) const;
};

class TaxonomyCatalog {
public:
    TaxonomyCatalog(Task task, std::optional<Split> split, std::vector<std::string> labels,
                    std::vector<TransformClass> entries);

    [[nodiscard]] Task task() const { return task_; }
    [[nodiscard]] std::optional<Split> split() const { return split_; }
    /// Label names indexed by class id.
    [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
    [[nodiscard]] int label_count() const { return static_cast<int>(labels_.size()); }
    /// Fine: one entry per label. Coarse: one entry per sub-transformation.
    [[nodiscard]] const std::vector<TransformClass>& entries() const { return entries_; }
    [[nodiscard]] std::vector<const TransformClass*> entries_for_label(int class_id) const;
    [[nodiscard]] const TransformClass& find(const std::string& sub_transform) const;
    [[nodiscard]] std::size_t held_out_count() const;

    /// Human-readable JSON dump (sorted keys, declaration order for lists).
    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] std::string hash() const;

private:
    Task task_;
    std::optional<Split> split_;
    std::vector<std::string> labels_;
    std::vector<TransformClass> entries_;
};

inline constexpr int kFineClassCount = 31;
inline constexpr int kCoarseLabelCount = 10;

[[nodiscard]] const TaxonomyCatalog& fine_catalog();
[[nodiscard]] const TaxonomyCatalog& coarse_catalog(Split split);
[[nodiscard]] const TaxonomyCatalog& catalog_for(Task task, Split split);

/// Draws every ParamSpec in declaration order from a child RNG of `seed`.
/// Works for external classes too (their parameters configure the external
/// generator).
[[nodiscard]] ParamList sample_params(const TransformClass& cls, std::uint64_t seed);
/// sample_params plus the operation; throws for external classes.
[[nodiscard]] TransformInstance sample_instance(const TransformClass& cls, std::uint64_t seed);

}  // namespace xprobe
