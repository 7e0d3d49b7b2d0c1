#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles/probe_data.hpp"
#include "oracles/probe_oracle.hpp"
#include "xprobe/codec.hpp"
#include "xprobe/probe.hpp"

using namespace xprobe;

namespace {

ProbeConfig small_cfg(Heads heads, std::uint32_t hidden, double dropout = 0.0) {
    ProbeConfig c;
    c.input_dim = 6;
    c.hidden_width = hidden;
    c.heads = heads;
    c.n_transform_classes = heads == Heads::semantic_only ? 0 : 4;
    c.n_semantic_classes = heads == Heads::transform_only ? 0 : 3;
    c.dropout_rate = dropout;
    c.batch_size = 8;
    c.total_examples_seen = 800;
    c.seed = 11;
    return c;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    DetRng rng(seed);
    Matrix m{rows, cols, std::vector<float>(rows * cols)};
    for (float& v : m.data) v = static_cast<float>(rng.gaussian());
    return m;
}

void randomize(ProbeModel& m, std::uint64_t seed) {
    DetRng rng(seed);
    for (auto& p : m.params)
        for (float& v : p.data) v = static_cast<float>(rng.uniform(-0.5, 0.5));
}

std::vector<int> labels(std::size_t n, int k, std::uint64_t seed) {
    DetRng rng(seed);
    std::vector<int> out(n);
    for (int& v : out) v = static_cast<int>(rng.uniform_int(0, k - 1));
    return out;
}

// Dropout multipliers implied by a forward pass with the same RNG state.
std::vector<std::vector<double>> mask_of(const ForwardPass& fp, double rate) {
    std::vector<std::vector<double>> mask(fp.features.rows, std::vector<double>(fp.features.cols));
    for (std::size_t r = 0; r < fp.features.rows; ++r)
        for (std::size_t j = 0; j < fp.features.cols; ++j)
            mask[r][j] = (fp.activations.row(r)[j] != 0.0f && fp.features.row(r)[j] == 0.0f) ? 0.0 : 1.0 / (1.0 - rate);
    return mask;
}

}  // namespace

TEST_CASE("config validation and json") {
    ProbeConfig c = small_cfg(Heads::two_head, 16, 0.2);
    CHECK_NOTHROW(c.validate());
    CHECK(ProbeConfig::from_json(c.to_json()).to_json() == c.to_json());
    auto bad = c;
    bad.dropout_rate = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.hidden_width = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = c;
    bad.n_semantic_classes = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK(heads_from_string(to_string(Heads::semantic_only)) == Heads::semantic_only);

    const ProbeConfig def;
    CHECK(def.hidden_width == 2048);
    CHECK(def.dropout_rate == 0.2);
    CHECK(def.learning_rate == 1e-3);
    CHECK(def.batch_size == 1024);
    CHECK(def.total_examples_seen == 2'000'000);
    CHECK(def.total_steps() == 1953);
}

TEST_CASE("initialization") {
    ProbeConfig c = small_cfg(Heads::two_head, 40);
    const ProbeModel m = init_model(c);
    REQUIRE(m.params.size() == 6);
    const char* order[] = {"w1", "b1", "wt", "bt", "ws", "bs"};
    for (int i = 0; i < 6; ++i) CHECK(m.params[static_cast<std::size_t>(i)].name == order[i]);
    const double limit = std::sqrt(6.0 / (6 + 40));
    float lo = 1, hi = -1;
    for (float v : m.get("w1").data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= -limit);
    CHECK(hi <= limit);
    CHECK(hi - lo > limit);
    for (const char* n : {"b1", "wt", "bt", "ws", "bs"})
        for (float v : m.get(n).data) REQUIRE(v == 0.0f);
    CHECK(m.get("wt").rows == 40);
    CHECK(init_model(small_cfg(Heads::transform_only, 0)).get("wt").rows == 6);
    CHECK_FALSE(init_model(small_cfg(Heads::transform_only, 0)).has("w1"));

    // Zero heads give uniform softmax: the loss is ln K per head.
    const Matrix x = random_matrix(5, 6, 1);
    const auto lg = loss_and_grads(m, x, labels(5, 4, 2), labels(5, 3, 3), nullptr);
    CHECK(lg.loss == doctest::Approx(std::log(4.0) + std::log(3.0)).epsilon(1e-6));
}

TEST_CASE("gradients match finite differences") {
    const Matrix x = random_matrix(7, 6, 5);
    const auto t = labels(7, 4, 6);
    const auto y = labels(7, 3, 7);
    for (Heads h : {Heads::transform_only, Heads::semantic_only, Heads::two_head})
        for (std::uint32_t hidden : {0u, 9u}) {
            CAPTURE(to_string(h));
            CAPTURE(hidden);
            ProbeModel m = init_model(small_cfg(h, hidden));
            randomize(m, 100 + hidden);
            const auto lg = loss_and_grads(m, x, t, y, nullptr);
            CHECK(lg.loss == doctest::Approx(oracle::probe_loss(m.cfg, oracle::F64Params(m), x, t, y)).epsilon(1e-5));
            CHECK(oracle::max_gradient_error(m, x, t, y, lg.grads) < 1e-4);
        }
}

TEST_CASE("gradients with dropout") {
    const Matrix x = random_matrix(6, 6, 8);
    const auto t = labels(6, 4, 9);
    const auto y = labels(6, 3, 10);
    ProbeModel m = init_model(small_cfg(Heads::two_head, 12, 0.3));
    randomize(m, 12);
    DetRng a(99), b(99);
    const ForwardPass fp = forward(m, x, &a);
    const auto mask = mask_of(fp, 0.3);
    const auto lg = loss_and_grads(m, x, t, y, &b);
    CHECK(lg.loss == doctest::Approx(oracle::probe_loss(m.cfg, oracle::F64Params(m), x, t, y, mask)).epsilon(1e-5));
    CHECK(oracle::max_gradient_error(m, x, t, y, lg.grads, mask) < 1e-4);

    // Eval mode ignores dropout.
    const ForwardPass e1 = forward(m, x, nullptr);
    CHECK(e1.features.data == e1.activations.data);
}

TEST_CASE("learning rate schedule and adam") {
    CHECK(learning_rate_at(1e-3, 0, 10) == 1e-3);
    CHECK(learning_rate_at(1e-3, 5, 10) == doctest::Approx(5e-4));
    CHECK(learning_rate_at(1e-3, 9, 10) == doctest::Approx(1e-4));
    CHECK_THROWS_AS((void)learning_rate_at(1e-3, 10, 10), std::invalid_argument);

    ProbeModel m = init_model(small_cfg(Heads::transform_only, 0));
    AdamState st = init_adam(m);
    Gradients g;
    DetRng rng(3);
    for (const auto& p : m.params) {
        Tensor t{p.name, p.rows, p.cols, std::vector<float>(p.data.size())};
        for (float& v : t.data) v = static_cast<float>(rng.uniform(-2, 2));
        g.push_back(t);
    }
    const ProbeModel before = m;
    adam_step(m, st, g, 0.01, 0, 4);
    // First bias-corrected step moves each weight by lr * g / (|g| + eps).
    for (std::size_t i = 0; i < m.params.size(); ++i)
        for (std::size_t j = 0; j < m.params[i].data.size(); ++j) {
            const double gj = g[i].data[j];
            const double want = before.params[i].data[j] - 0.01 * gj / (std::abs(gj) + kAdamEps);
            REQUIRE(m.params[i].data[j] == doctest::Approx(want).epsilon(1e-5));
        }
    CHECK(st.step == 1);

    // Second step against a double-precision replica.
    std::vector<std::vector<double>> mm, vv;
    for (const auto& t : g) {
        std::vector<double> a, b;
        for (float v : t.data) {
            a.push_back((1 - kAdamBeta1) * v);
            b.push_back((1 - kAdamBeta2) * double(v) * v);
        }
        mm.push_back(a);
        vv.push_back(b);
    }
    const ProbeModel mid = m;
    adam_step(m, st, g, 0.01, 1, 4);
    const double lr = 0.01 * 0.75;
    for (std::size_t i = 0; i < m.params.size(); ++i)
        for (std::size_t j = 0; j < m.params[i].data.size(); ++j) {
            const double gj = g[i].data[j];
            const double m2 = kAdamBeta1 * mm[i][j] + (1 - kAdamBeta1) * gj;
            const double v2 = kAdamBeta2 * vv[i][j] + (1 - kAdamBeta2) * gj * gj;
            const double mh = m2 / (1 - kAdamBeta1 * kAdamBeta1);
            const double vh = v2 / (1 - kAdamBeta2 * kAdamBeta2);
            const double want = mid.params[i].data[j] - lr * mh / (std::sqrt(vh) + kAdamEps);
            REQUIRE(m.params[i].data[j] == doctest::Approx(want).epsilon(1e-5));
        }
}

TEST_CASE("argmax ties go low") {
    const float a[] = {1, 3, 3, 2};
    CHECK(argmax_lowest(a, 4) == 1);
    const float z[] = {0, 0, 0};
    CHECK(argmax_lowest(z, 3) == 0);
}

TEST_CASE("training is deterministic and learns") {
    ProbeConfig c;
    c.input_dim = 20;
    c.hidden_width = 0;
    c.dropout_rate = 0.0;
    c.heads = Heads::two_head;
    c.n_transform_classes = 5;
    c.n_semantic_classes = 2;
    c.batch_size = 64;
    c.total_examples_seen = 64 * 300;
    c.learning_rate = 1e-2;
    c.seed = 4;
    c.eval_every = 100;
    TrainSet tr{oracle::blobs(2000, 20, 5, 3.0, 0.5, 1, 2)};
    EvalSet ev{oracle::blobs(500, 20, 5, 3.0, 0.5, 2, 2)};
    const TrainResult a = train(c, tr, &ev);
    const TrainResult b = train(c, tr, &ev);
    for (std::size_t i = 0; i < a.model.params.size(); ++i) REQUIRE(a.model.params[i].data == b.model.params[i].data);
    REQUIRE(a.log.size() == 3);
    CHECK(a.log.back().step == 300);
    CHECK(a.log.front().lr == doctest::Approx(1e-2 * (1 - 99.0 / 300)));
    CHECK(a.log.back().transform_accuracy > 0.98);
    CHECK(a.log.back().semantic_accuracy > 0.98);
    CHECK(log_to_csv(a.log).rfind("step,lr,loss,transform_accuracy,semantic_accuracy\n", 0) == 0);

    const Predictions p = predict(a.model, ev.data.x);
    CHECK(oracle::accuracy(p.transform, ev.data.t) == a.log.back().transform_accuracy);

    c.seed = 5;
    const TrainResult d = train(c, tr, &ev);
    CHECK(d.model.params[0].data != a.model.params[0].data);

    auto wrong = c;
    wrong.input_dim = 21;
    CHECK_THROWS_AS((void)train(wrong, tr), std::invalid_argument);
    auto tiny = c;
    tiny.total_examples_seen = 10;
    CHECK_THROWS_AS((void)train(tiny, tr), std::invalid_argument);
}

TEST_CASE("checkpoint round trip") {
    const auto dir = fixture::temp_dir("probe_ckpt");
    ProbeModel m = init_model(small_cfg(Heads::two_head, 10, 0.1));
    randomize(m, 77);
    save_model(m, dir / "m.xppm");
    const ProbeModel back = load_model(dir / "m.xppm");
    CHECK(back.cfg.to_json() == m.cfg.to_json());
    for (std::size_t i = 0; i < m.params.size(); ++i) CHECK(back.params[i].data == m.params[i].data);

    auto bytes = read_file(dir / "m.xppm");
    bytes.pop_back();
    write_file_atomic(dir / "t.xppm", bytes);
    CHECK_THROWS_AS((void)load_model(dir / "t.xppm"), std::runtime_error);
    bytes[0] = 'Q';
    write_file_atomic(dir / "q.xppm", bytes);
    CHECK_THROWS_AS((void)load_model(dir / "q.xppm"), std::runtime_error);
}
