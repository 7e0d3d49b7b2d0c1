#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xprobe/embed.hpp"
#include "xprobe/rng.hpp"

namespace xprobe {

enum class Heads { transform_only, semantic_only, two_head };
[[nodiscard]] std::string to_string(Heads h);
[[nodiscard]] Heads heads_from_string(const std::string& s);

struct ProbeConfig {
    std::uint32_t input_dim = 0;
    std::uint32_t hidden_width = 2048;  // 0 = linear probe
    Heads heads = Heads::two_head;
    std::uint32_t n_transform_classes = 0;
    std::uint32_t n_semantic_classes = 0;
    double dropout_rate = 0.2;
    double learning_rate = 1e-3;
    std::uint32_t batch_size = 1024;
    std::uint64_t total_examples_seen = 2'000'000;
    std::uint64_t seed = 0;
    std::uint64_t eval_every = 0;  // steps between log rows; 0 = ten rows per run

    [[nodiscard]] bool has_hidden() const { return hidden_width > 0; }
    [[nodiscard]] bool has_transform() const { return heads != Heads::semantic_only; }
    [[nodiscard]] bool has_semantic() const { return heads != Heads::transform_only; }
    [[nodiscard]] std::uint64_t total_steps() const { return total_examples_seen / batch_size; }
    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;

    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] static ProbeConfig from_json(const std::string& text);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

struct Tensor {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;

    [[nodiscard]] float* row(std::size_t r) { return data.data() + r * cols; }
    [[nodiscard]] const float* row(std::size_t r) const { return data.data() + r * cols; }
};

/// Parameters in fixed order: w1, b1 (MLP only), wt, bt (transform head),
/// ws, bs (semantic head). Weight matrices are fan_in x fan_out.
struct ProbeModel {
    ProbeConfig cfg;
    std::vector<Tensor> params;

    [[nodiscard]] const Tensor& get(const std::string& name) const;
    [[nodiscard]] Tensor& get(const std::string& name);
    [[nodiscard]] bool has(const std::string& name) const;
};

/// Same shapes and order as ProbeModel::params.
using Gradients = std::vector<Tensor>;

/// w1 ~ U(+-sqrt(6 / (fan_in + fan_out))); biases and heads zero.
[[nodiscard]] ProbeModel init_model(const ProbeConfig& cfg);

struct ForwardPass {
    Matrix activations;  // post-ReLU, pre-dropout (the input itself for a linear probe)
    Matrix features;     // what the heads see (activations after dropout)
    Matrix transform_logits;
    Matrix semantic_logits;
};

/// `dropout_rng` enables train mode (inverted dropout); nullptr = eval mode.
[[nodiscard]] ForwardPass forward(const ProbeModel& model, const Matrix& x, DetRng* dropout_rng);

struct LossAndGrads {
    double loss = 0.0;
    Gradients grads;
};

/// Mean cross entropy per head, summed over heads (unweighted). Label vectors
/// for absent heads are ignored and may be empty.
[[nodiscard]] LossAndGrads loss_and_grads(const ProbeModel& model, const Matrix& x, const std::vector<int>& t,
                                          const std::vector<int>& y, DetRng* dropout_rng);

struct AdamState {
    std::vector<std::vector<float>> m;
    std::vector<std::vector<float>> v;
    std::uint64_t step = 0;
};

[[nodiscard]] AdamState init_adam(const ProbeModel& model);
/// lr(step) = base_lr * (1 - step / total_steps), no warm-up.
[[nodiscard]] double learning_rate_at(double base_lr, std::uint64_t step, std::uint64_t total_steps);
void adam_step(ProbeModel& model, AdamState& state, const Gradients& grads, double base_lr, std::uint64_t step,
               std::uint64_t total_steps);

struct LabeledSet {
    Matrix x;
    std::vector<int> t;  // transform labels
    std::vector<int> y;  // semantic labels (may be empty)
};

/// Training data. Kept a distinct type from EvalSet so evaluation data can
/// never be passed where training data is expected.
struct TrainSet {
    LabeledSet data;
};
struct EvalSet {
    LabeledSet data;
};

struct LogRow {
    std::uint64_t step = 0;
    double lr = 0.0;
    double loss = 0.0;
    double transform_accuracy = -1.0;  // -1 = not evaluated
    double semantic_accuracy = -1.0;
};

struct TrainResult {
    ProbeModel model;
    std::vector<LogRow> log;
};

[[nodiscard]] TrainResult train(const ProbeConfig& cfg, const TrainSet& train_set, const EvalSet* eval_set = nullptr);
[[nodiscard]] std::string log_to_csv(const std::vector<LogRow>& log);

struct Predictions {
    std::vector<int> transform;
    std::vector<int> semantic;
};

/// Argmax per head; ties go to the lowest class index.
[[nodiscard]] Predictions predict(const ProbeModel& model, const Matrix& x);
[[nodiscard]] int argmax_lowest(const float* v, std::size_t n);

void save_model(const ProbeModel& model, const std::filesystem::path& path);
[[nodiscard]] ProbeModel load_model(const std::filesystem::path& path);

}  // namespace xprobe
