#include "xprobe/probe.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "xprobe/codec.hpp"
#include "xprobe/simd.hpp"

namespace xprobe {
namespace {

constexpr char kMagic[4] = {'X', 'P', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

Tensor zeros(std::string name, std::size_t rows, std::size_t cols) {
    return {std::move(name), rows, cols, std::vector<float>(rows * cols, 0.0f)};
}

// logits = b + sum_k f[k] * W[k, :], skipping zero features.
void head_forward(const Tensor& w, const Tensor& b, const Matrix& f, Matrix& out) {
    const auto& k = simd::active();
    out = {f.rows, w.cols, std::vector<float>(f.rows * w.cols)};
    for (std::size_t r = 0; r < f.rows; ++r) {
        float* o = out.row(r);
        std::copy_n(b.data.data(), w.cols, o);
        const float* fr = f.row(r);
        for (std::size_t i = 0; i < f.cols; ++i)
            if (fr[i] != 0.0f) k.axpy_f32(fr[i], w.row(i), o, w.cols);
    }
}

// Mean softmax cross entropy; writes dlogits = (softmax - onehot) / n.
double softmax_xent(const Matrix& logits, const std::vector<int>& labels, Matrix& dlogits) {
    const std::size_t c = logits.cols;
    dlogits = {logits.rows, c, std::vector<float>(logits.rows * c)};
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    std::vector<double> e(c);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        const int label = labels[r];
        if (label < 0 || static_cast<std::size_t>(label) >= c)
            throw std::invalid_argument("label " + std::to_string(label) + " out of range [0, " + std::to_string(c) + ")");
        const float* z = logits.row(r);
        const double mx = *std::max_element(z, z + c);
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            e[j] = std::exp(z[j] - mx);
            sum += e[j];
        }
        total += std::log(sum) + mx - z[label];
        float* d = dlogits.row(r);
        for (std::size_t j = 0; j < c; ++j)
            d[j] = static_cast<float>((e[j] / sum - (static_cast<int>(j) == label ? 1.0 : 0.0)) * inv_n);
    }
    return total * inv_n;
}

// Accumulates head gradients and adds dL/dfeatures into `dfeat`.
void head_backward(const Tensor& w, const Matrix& f, const Matrix& dlogits, Tensor& dw, Tensor& db, Matrix& dfeat) {
    const auto& k = simd::active();
    for (std::size_t r = 0; r < f.rows; ++r) {
        const float* d = dlogits.row(r);
        const float* fr = f.row(r);
        k.add_f32(d, db.data.data(), w.cols);
        float* df = dfeat.row(r);
        for (std::size_t i = 0; i < f.cols; ++i) {
            if (fr[i] != 0.0f) k.axpy_f32(fr[i], d, dw.row(i), w.cols);
            df[i] += k.dot_f32(w.row(i), d, w.cols);
        }
    }
}

std::size_t index_of(const std::vector<Tensor>& ts, const std::string& name) {
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts[i].name == name) return i;
    throw std::invalid_argument("model has no tensor '" + name + "'");
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == truth[i];
    return pred.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(pred.size());
}

void check_set(const LabeledSet& s, const ProbeConfig& cfg, const char* what) {
    if (s.x.rows == 0) throw std::invalid_argument(std::string(what) + " set is empty");
    if (s.x.cols != cfg.input_dim)
        throw std::invalid_argument(std::string(what) + " embeddings have dim " + std::to_string(s.x.cols) +
                                    ", model expects " + std::to_string(cfg.input_dim));
    if (cfg.has_transform() && s.t.size() != s.x.rows)
        throw std::invalid_argument(std::string(what) + " set lacks transform labels");
    if (cfg.has_semantic() && s.y.size() != s.x.rows)
        throw std::invalid_argument(std::string(what) + " set lacks semantic labels");
}

}  // namespace

std::string to_string(Heads h) {
    switch (h) {
        case Heads::transform_only: return "transform_only";
        case Heads::semantic_only: return "semantic_only";
        case Heads::two_head: return "two_head";
    }
    return "two_head";
}

Heads heads_from_string(const std::string& s) {
    for (Heads h : {Heads::transform_only, Heads::semantic_only, Heads::two_head})
        if (to_string(h) == s) return h;
    throw std::invalid_argument("unknown heads '" + s + "' (transform_only, semantic_only, two_head)");
}

void ProbeConfig::validate() const {
    if (input_dim == 0) throw std::invalid_argument("probe: input_dim must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("probe: dropout must be in [0, 1)");
    if (hidden_width == 0 && dropout_rate != 0.0) throw std::invalid_argument("probe: a linear probe takes no dropout");
    if (has_transform() && n_transform_classes == 0) throw std::invalid_argument("probe: transform head needs classes");
    if (has_semantic() && n_semantic_classes == 0) throw std::invalid_argument("probe: semantic head needs classes");
    if (batch_size == 0) throw std::invalid_argument("probe: batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("probe: learning rate must be positive");
}

std::string ProbeConfig::to_json() const {
    const nlohmann::json j{{"input_dim", input_dim},
                           {"hidden_width", hidden_width},
                           {"heads", to_string(heads)},
                           {"n_transform_classes", n_transform_classes},
                           {"n_semantic_classes", n_semantic_classes},
                           {"dropout_rate", dropout_rate},
                           {"learning_rate", learning_rate},
                           {"lr_schedule", "linear_decay"},
                           {"warmup_steps", 0},
                           {"loss", "sum_unweighted_cross_entropy"},
                           {"optimizer", {{"name", "adam"}, {"beta1", kAdamBeta1}, {"beta2", kAdamBeta2}, {"eps", kAdamEps}}},
                           {"batch_size", batch_size},
                           {"total_examples_seen", total_examples_seen},
                           {"seed", seed},
                           {"eval_every", eval_every}};
    return j.dump(2);
}

ProbeConfig ProbeConfig::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ProbeConfig c;
    c.input_dim = j.at("input_dim");
    c.hidden_width = j.at("hidden_width");
    c.heads = heads_from_string(j.at("heads"));
    c.n_transform_classes = j.at("n_transform_classes");
    c.n_semantic_classes = j.at("n_semantic_classes");
    c.dropout_rate = j.at("dropout_rate");
    c.learning_rate = j.at("learning_rate");
    c.batch_size = j.at("batch_size");
    c.total_examples_seen = j.at("total_examples_seen");
    c.seed = j.at("seed");
    c.eval_every = j.value("eval_every", std::uint64_t{0});
    return c;
}

const Tensor& ProbeModel::get(const std::string& name) const { return params[index_of(params, name)]; }
Tensor& ProbeModel::get(const std::string& name) { return params[index_of(params, name)]; }
bool ProbeModel::has(const std::string& name) const {
    return std::any_of(params.begin(), params.end(), [&](const Tensor& t) { return t.name == name; });
}

ProbeModel init_model(const ProbeConfig& cfg) {
    cfg.validate();
    ProbeModel m{cfg, {}};
    const std::size_t feat = cfg.has_hidden() ? cfg.hidden_width : cfg.input_dim;
    if (cfg.has_hidden()) {
        Tensor w1 = zeros("w1", cfg.input_dim, cfg.hidden_width);
        const double limit = std::sqrt(6.0 / (cfg.input_dim + cfg.hidden_width));
        DetRng rng(derive_seed(cfg.seed, {std::string("init")}));
        for (float& v : w1.data) v = static_cast<float>(rng.uniform(-limit, limit));
        m.params.push_back(std::move(w1));
        m.params.push_back(zeros("b1", 1, cfg.hidden_width));
    }
    if (cfg.has_transform()) {
        m.params.push_back(zeros("wt", feat, cfg.n_transform_classes));
        m.params.push_back(zeros("bt", 1, cfg.n_transform_classes));
    }
    if (cfg.has_semantic()) {
        m.params.push_back(zeros("ws", feat, cfg.n_semantic_classes));
        m.params.push_back(zeros("bs", 1, cfg.n_semantic_classes));
    }
    return m;
}

ForwardPass forward(const ProbeModel& model, const Matrix& x, DetRng* dropout_rng) {
    const ProbeConfig& cfg = model.cfg;
    if (x.cols != cfg.input_dim)
        throw std::invalid_argument("forward: input has " + std::to_string(x.cols) + " columns, expected " +
                                    std::to_string(cfg.input_dim));
    const auto& k = simd::active();
    ForwardPass fp;
    if (cfg.has_hidden()) {
        const Tensor& w1 = model.get("w1");
        const Tensor& b1 = model.get("b1");
        const std::size_t hid = cfg.hidden_width;
        fp.activations = {x.rows, hid, std::vector<float>(x.rows * hid)};
        for (std::size_t r = 0; r < x.rows; ++r) {
            float* h = fp.activations.row(r);
            std::copy_n(b1.data.data(), hid, h);
            const float* xr = x.row(r);
            for (std::size_t i = 0; i < x.cols; ++i)
                if (xr[i] != 0.0f) k.axpy_f32(xr[i], w1.row(i), h, hid);
            k.relu_f32(h, hid);
        }
        fp.features = fp.activations;
        if (dropout_rng && cfg.dropout_rate > 0.0) {
            const auto keep_scale = static_cast<float>(1.0 / (1.0 - cfg.dropout_rate));
            for (float& v : fp.features.data) v = dropout_rng->bernoulli(cfg.dropout_rate) ? 0.0f : v * keep_scale;
        }
    } else {
        fp.activations = x;
        fp.features = x;
    }
    if (cfg.has_transform()) head_forward(model.get("wt"), model.get("bt"), fp.features, fp.transform_logits);
    if (cfg.has_semantic()) head_forward(model.get("ws"), model.get("bs"), fp.features, fp.semantic_logits);
    return fp;
}

LossAndGrads loss_and_grads(const ProbeModel& model, const Matrix& x, const std::vector<int>& t,
                            const std::vector<int>& y, DetRng* dropout_rng) {
    const ProbeConfig& cfg = model.cfg;
    if (cfg.has_transform() && t.size() != x.rows) throw std::invalid_argument("loss: transform labels missing");
    if (cfg.has_semantic() && y.size() != x.rows) throw std::invalid_argument("loss: semantic labels missing");
    const ForwardPass fp = forward(model, x, dropout_rng);
    LossAndGrads out;
    for (const Tensor& p : model.params) out.grads.push_back(zeros(p.name, p.rows, p.cols));
    auto grad = [&](const char* name) -> Tensor& { return out.grads[index_of(out.grads, name)]; };

    Matrix dfeat{fp.features.rows, fp.features.cols, std::vector<float>(fp.features.data.size(), 0.0f)};
    Matrix dlogits;
    if (cfg.has_transform()) {
        out.loss += softmax_xent(fp.transform_logits, t, dlogits);
        head_backward(model.get("wt"), fp.features, dlogits, grad("wt"), grad("bt"), dfeat);
    }
    if (cfg.has_semantic()) {
        out.loss += softmax_xent(fp.semantic_logits, y, dlogits);
        head_backward(model.get("ws"), fp.features, dlogits, grad("ws"), grad("bs"), dfeat);
    }
    if (!cfg.has_hidden()) return out;

    // Back through dropout (the kept scale is recovered from features/activations)
    // and the ReLU, then into the first layer.
    const auto& k = simd::active();
    Tensor& dw1 = grad("w1");
    Tensor& db1 = grad("b1");
    const std::size_t hid = cfg.hidden_width;
    const bool dropped = dropout_rng && cfg.dropout_rate > 0.0;
    const auto keep_scale = static_cast<float>(1.0 / (1.0 - cfg.dropout_rate));
    for (std::size_t r = 0; r < x.rows; ++r) {
        float* d = dfeat.row(r);
        if (dropped) {
            const float* f = fp.features.row(r);
            for (std::size_t j = 0; j < hid; ++j) d[j] = f[j] != 0.0f ? d[j] * keep_scale : 0.0f;
        }
        k.relu_backward_f32(fp.activations.row(r), d, hid);
        k.add_f32(d, db1.data.data(), hid);
        const float* xr = x.row(r);
        for (std::size_t i = 0; i < x.cols; ++i)
            if (xr[i] != 0.0f) k.axpy_f32(xr[i], d, dw1.row(i), hid);
    }
    return out;
}

AdamState init_adam(const ProbeModel& model) {
    AdamState s;
    for (const Tensor& p : model.params) {
        s.m.emplace_back(p.data.size(), 0.0f);
        s.v.emplace_back(p.data.size(), 0.0f);
    }
    return s;
}

double learning_rate_at(double base_lr, std::uint64_t step, std::uint64_t total_steps) {
    if (total_steps == 0 || step >= total_steps) throw std::invalid_argument("learning rate: step out of range");
    return base_lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

void adam_step(ProbeModel& model, AdamState& state, const Gradients& grads, double base_lr, std::uint64_t step,
               std::uint64_t total_steps) {
    if (grads.size() != model.params.size()) throw std::invalid_argument("adam: gradient/parameter mismatch");
    const auto lr = static_cast<float>(learning_rate_at(base_lr, step, total_steps));
    state.step += 1;
    const auto t = static_cast<double>(state.step);
    const auto bc1 = static_cast<float>(1.0 - std::pow(kAdamBeta1, t));
    const auto bc2 = static_cast<float>(1.0 - std::pow(kAdamBeta2, t));
    const auto& k = simd::active();
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        Tensor& p = model.params[i];
        if (grads[i].data.size() != p.data.size()) throw std::invalid_argument("adam: shape mismatch for " + p.name);
        k.adam_f32(p.data.data(), state.m[i].data(), state.v[i].data(), grads[i].data.data(), p.data.size(), lr,
                   static_cast<float>(kAdamBeta1), static_cast<float>(kAdamBeta2), bc1, bc2,
                   static_cast<float>(kAdamEps));
    }
}

TrainResult train(const ProbeConfig& cfg, const TrainSet& train_set, const EvalSet* eval_set) {
    cfg.validate();
    const LabeledSet& data = train_set.data;
    check_set(data, cfg, "training");
    if (eval_set) check_set(eval_set->data, cfg, "evaluation");
    if (cfg.total_examples_seen < cfg.batch_size)
        throw std::invalid_argument("probe: budget of " + std::to_string(cfg.total_examples_seen) +
                                    " examples is smaller than one batch");
    const std::uint64_t total = cfg.total_steps();
    const std::uint64_t every = cfg.eval_every ? cfg.eval_every : std::max<std::uint64_t>(1, total / 10);

    TrainResult res{init_model(cfg), {}};
    AdamState adam = init_adam(res.model);
    DetRng batch_rng(derive_seed(cfg.seed, {std::string("batches")}));
    DetRng dropout_rng(derive_seed(cfg.seed, {std::string("dropout")}));
    const std::size_t dim = data.x.cols;
    Matrix xb{cfg.batch_size, dim, std::vector<float>(std::size_t{cfg.batch_size} * dim)};
    std::vector<int> tb(cfg.has_transform() ? cfg.batch_size : 0), yb(cfg.has_semantic() ? cfg.batch_size : 0);

    for (std::uint64_t step = 0; step < total; ++step) {
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            const auto i = static_cast<std::size_t>(batch_rng.uniform_int(0, static_cast<std::int64_t>(data.x.rows) - 1));
            std::copy_n(data.x.row(i), dim, xb.row(b));
            if (!tb.empty()) tb[b] = data.t[i];
            if (!yb.empty()) yb[b] = data.y[i];
        }
        const LossAndGrads lg = loss_and_grads(res.model, xb, tb, yb, &dropout_rng);
        const double lr = learning_rate_at(cfg.learning_rate, step, total);
        adam_step(res.model, adam, lg.grads, cfg.learning_rate, step, total);
        if ((step + 1) % every == 0 || step + 1 == total) {
            LogRow row{step + 1, lr, lg.loss, -1.0, -1.0};
            if (eval_set) {
                const Predictions p = predict(res.model, eval_set->data.x);
                if (cfg.has_transform()) row.transform_accuracy = accuracy(p.transform, eval_set->data.t);
                if (cfg.has_semantic()) row.semantic_accuracy = accuracy(p.semantic, eval_set->data.y);
            }
            res.log.push_back(row);
        }
    }
    return res;
}

std::string log_to_csv(const std::vector<LogRow>& log) {
    std::ostringstream os;
    os.precision(17);
    os << "step,lr,loss,transform_accuracy,semantic_accuracy\n";
    auto acc = [](double v) { return v < 0.0 ? std::string() : std::to_string(v); };
    for (const auto& r : log) os << r.step << ',' << r.lr << ',' << r.loss << ',' << acc(r.transform_accuracy) << ','
                                 << acc(r.semantic_accuracy) << '\n';
    return os.str();
}

int argmax_lowest(const float* v, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return static_cast<int>(best);
}

Predictions predict(const ProbeModel& model, const Matrix& x) {
    const ForwardPass fp = forward(model, x, nullptr);
    Predictions p;
    for (std::size_t r = 0; r < x.rows; ++r) {
        if (model.cfg.has_transform())
            p.transform.push_back(argmax_lowest(fp.transform_logits.row(r), fp.transform_logits.cols));
        if (model.cfg.has_semantic())
            p.semantic.push_back(argmax_lowest(fp.semantic_logits.row(r), fp.semantic_logits.cols));
    }
    return p;
}

void save_model(const ProbeModel& model, const std::filesystem::path& path) {
    std::vector<std::uint8_t> out;
    auto put = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    };
    auto le = [&](std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put(kMagic, 4);
    le(kVersion, 4);
    const std::string cfg = model.cfg.to_json();
    le(cfg.size(), 4);
    put(cfg.data(), cfg.size());
    le(model.params.size(), 4);
    for (const Tensor& t : model.params) {
        le(t.name.size(), 2);
        put(t.name.data(), t.name.size());
        le(t.rows, 4);
        le(t.cols, 4);
        for (float v : t.data) le(std::bit_cast<std::uint32_t>(v), 4);
    }
    write_file_atomic(path, out);
}

ProbeModel load_model(const std::filesystem::path& path) {
    const auto buf = read_file(path);
    std::size_t pos = 0;
    auto take = [&](std::size_t n) {
        if (buf.size() - pos < n) throw std::runtime_error(path.string() + ": truncated model checkpoint");
        const std::uint8_t* p = buf.data() + pos;
        pos += n;
        return p;
    };
    auto le = [&](int bytes) {
        const std::uint8_t* p = take(static_cast<std::size_t>(bytes));
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v |= std::uint64_t{p[i]} << (8 * i);
        return v;
    };
    if (std::memcmp(take(4), kMagic, 4) != 0) throw std::runtime_error(path.string() + ": not an XPPM checkpoint");
    if (le(4) != kVersion) throw std::runtime_error(path.string() + ": unsupported checkpoint version");
    const auto cfg_len = static_cast<std::size_t>(le(4));
    const auto* cfg_bytes = take(cfg_len);
    ProbeModel m{ProbeConfig::from_json(std::string(reinterpret_cast<const char*>(cfg_bytes), cfg_len)), {}};
    const ProbeModel shape = init_model(m.cfg);
    const auto count = le(4);
    if (count != shape.params.size()) throw std::runtime_error(path.string() + ": tensor count does not match config");
    for (std::uint64_t i = 0; i < count; ++i) {
        Tensor t;
        const auto name_len = static_cast<std::size_t>(le(2));
        t.name.assign(reinterpret_cast<const char*>(take(name_len)), name_len);
        t.rows = le(4);
        t.cols = le(4);
        const Tensor& want = shape.params[i];
        if (t.name != want.name || t.rows != want.rows || t.cols != want.cols)
            throw std::runtime_error(path.string() + ": tensor '" + t.name + "' does not match config");
        t.data.resize(t.rows * t.cols);
        for (float& v : t.data) v = std::bit_cast<float>(static_cast<std::uint32_t>(le(4)));
        m.params.push_back(std::move(t));
    }
    if (pos != buf.size()) throw std::runtime_error(path.string() + ": trailing bytes in checkpoint");
    return m;
}

}  // namespace xprobe
