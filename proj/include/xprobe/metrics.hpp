#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xprobe/dataset.hpp"

namespace xprobe {

struct PredictionRow {
    std::string example_id;
    int transform = -1;  // -1 = head absent
    int semantic = -1;
};

struct SubTransformStat {
    int category = 0;
    std::string sub_transform;
    bool held_out = false;
    std::uint64_t n = 0;
    std::uint64_t correct = 0;
    double accuracy = 0.0;

    friend bool operator==(const SubTransformStat&, const SubTransformStat&) = default;
};

struct MetricsReport {
    std::string task;
    std::vector<std::string> labels;
    std::uint64_t n_examples = 0;
    std::optional<double> transform_accuracy;
    std::optional<double> clean_semantic_accuracy;
    std::optional<double> obfuscated_semantic_accuracy;
    std::uint64_t n_clean = 0;
    std::uint64_t n_obfuscated = 0;
    std::vector<double> per_class_accuracy;      // by true label
    std::vector<std::uint64_t> per_class_count;  // by true label
    bool has_sub_transforms = false;
    std::vector<SubTransformStat> per_sub_transform;
    /// rows = true label, columns = predicted label
    std::vector<std::vector<std::uint64_t>> confusion;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Predictions must cover every manifest record exactly once. Semantic
/// metrics are computed when `semantic` predictions are present.
[[nodiscard]] MetricsReport evaluate(const std::vector<PredictionRow>& predictions, const Manifest& manifest);

[[nodiscard]] std::string confusion_to_csv(const MetricsReport& report);
[[nodiscard]] std::string report_to_json(const MetricsReport& report);
[[nodiscard]] MetricsReport report_from_json(const std::string& text);
[[nodiscard]] std::string per_class_csv(const MetricsReport& report);
/// One row per held-out sub-transformation, grouped by category: the
/// fraction of its examples assigned to their true category.
[[nodiscard]] std::string held_out_table(const MetricsReport& report);

/// Parses the CSV written by confusion_to_csv.
[[nodiscard]] std::vector<std::vector<std::uint64_t>> confusion_from_csv(const std::string& csv);

}  // namespace xprobe
