#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "xprobe/metrics.hpp"
#include "xprobe/rng.hpp"

using namespace xprobe;

namespace {

// Coarse exhaustive-style manifest over the test catalog, images not needed.
Manifest coarse_manifest(int sources) {
    const auto& cat = coarse_catalog(Split::test);
    Manifest m;
    m.header.task = Task::coarse;
    m.header.split = Split::test;
    m.header.labels = cat.labels();
    for (int s = 0; s < sources; ++s)
        for (const auto& e : cat.entries()) {
            ExampleRecord r;
            r.source_id = "src_" + std::to_string(s);
            r.example_id = make_example_id(Task::coarse, Split::test, r.source_id, e.class_id, e.sub_transform);
            r.task = Task::coarse;
            r.split = Split::test;
            r.transform_label = e.class_id;
            r.class_name = e.class_name;
            r.sub_transform = e.sub_transform;
            r.held_out = e.held_out;
            r.semantic_label = s % 4;
            m.records.push_back(r);
        }
    return m;
}

std::vector<PredictionRow> noisy_predictions(const Manifest& m, std::uint64_t seed, bool semantic = true) {
    DetRng rng(seed);
    std::vector<PredictionRow> out;
    for (const auto& r : m.records) {
        PredictionRow p{r.example_id, r.transform_label, semantic ? r.semantic_label : -1};
        if (rng.bernoulli(0.4)) p.transform = static_cast<int>(rng.uniform_int(0, 9));
        if (semantic && rng.bernoulli(0.3)) p.semantic = static_cast<int>(rng.uniform_int(0, 3));
        out.push_back(p);
    }
    return out;
}

}  // namespace

TEST_CASE("hand-checked report") {
    Manifest m;
    m.header.task = Task::fine;
    m.header.labels = {"identity", "a", "b"};
    auto rec = [](std::string id, int t, int y) {
        ExampleRecord r;
        r.example_id = std::move(id);
        r.transform_label = t;
        r.semantic_label = y;
        return r;
    };
    m.records = {rec("e0", 0, 1), rec("e1", 0, 2), rec("e2", 1, 1), rec("e3", 2, 0), rec("e4", 2, 2)};
    const std::vector<PredictionRow> p = {
        {"e0", 0, 1}, {"e1", 1, 2}, {"e2", 1, 0}, {"e3", 2, 0}, {"e4", 0, 1},
    };
    const MetricsReport r = evaluate(p, m);
    CHECK(*r.transform_accuracy == doctest::Approx(3.0 / 5));
    CHECK(r.n_clean == 2);
    CHECK(r.n_obfuscated == 3);
    CHECK(*r.clean_semantic_accuracy == 1.0);
    CHECK(*r.obfuscated_semantic_accuracy == doctest::Approx(1.0 / 3));
    CHECK(r.per_class_accuracy == std::vector<double>{0.5, 1.0, 0.5});
    CHECK(r.per_class_count == std::vector<std::uint64_t>{2, 1, 2});
    CHECK(r.confusion == std::vector<std::vector<std::uint64_t>>{{1, 1, 0}, {0, 1, 0}, {1, 0, 1}});
    CHECK_FALSE(r.has_sub_transforms);
    CHECK_THROWS_AS((void)held_out_table(r), std::invalid_argument);
    CHECK(confusion_to_csv(r) == "true_label,identity,a,b\nidentity,1,1,0\na,0,1,0\nb,1,0,1\n");
    CHECK(per_class_csv(r).rfind("class_id,class_name,n,accuracy\n0,identity,2,0.5\n", 0) == 0);

    // Transform head only.
    std::vector<PredictionRow> t_only;
    for (const auto& q : p) t_only.push_back({q.example_id, q.transform, -1});
    const MetricsReport rt = evaluate(t_only, m);
    CHECK_FALSE(rt.clean_semantic_accuracy.has_value());
    CHECK(rt.transform_accuracy == r.transform_accuracy);

    // Semantic head only.
    std::vector<PredictionRow> s_only;
    for (const auto& q : p) s_only.push_back({q.example_id, -1, q.semantic});
    const MetricsReport rs = evaluate(s_only, m);
    CHECK_FALSE(rs.transform_accuracy.has_value());
    CHECK(rs.confusion.empty());
    CHECK_THROWS_AS((void)confusion_to_csv(rs), std::invalid_argument);
}

TEST_CASE("identities on a random coarse report") {
    const Manifest m = coarse_manifest(6);
    const auto preds = noisy_predictions(m, 17);
    const MetricsReport r = evaluate(preds, m);
    REQUIRE(r.transform_accuracy.has_value());

    std::uint64_t total = 0, trace = 0;
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        const auto row = std::accumulate(r.confusion[i].begin(), r.confusion[i].end(), std::uint64_t{0});
        CHECK(row == r.per_class_count[i]);
        CHECK(r.per_class_accuracy[i] == doctest::Approx(double(r.confusion[i][i]) / double(row)));
        total += row;
        trace += r.confusion[i][i];
    }
    CHECK(total == m.records.size());
    CHECK(*r.transform_accuracy == doctest::Approx(double(trace) / double(total)));

    // Class-count weighted per-class accuracy equals overall accuracy.
    double weighted = 0.0;
    for (std::size_t i = 0; i < r.confusion.size(); ++i) weighted += r.per_class_accuracy[i] * r.per_class_count[i];
    CHECK(weighted / double(total) == doctest::Approx(*r.transform_accuracy));

    // Clean and obfuscated partition the semantic examples.
    std::uint64_t sem_ok = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) sem_ok += preds[i].semantic == m.records[i].semantic_label;
    CHECK(r.n_clean + r.n_obfuscated == m.records.size());
    CHECK(r.n_clean == 6);
    CHECK(*r.clean_semantic_accuracy * r.n_clean + *r.obfuscated_semantic_accuracy * r.n_obfuscated ==
          doctest::Approx(double(sem_ok)));

    // Sub-transform stats aggregate to the per-class counts.
    std::map<int, std::uint64_t> n_by_cat, ok_by_cat;
    for (const auto& s : r.per_sub_transform) {
        n_by_cat[s.category] += s.n;
        ok_by_cat[s.category] += s.correct;
        CHECK(s.n == 6);
    }
    for (std::size_t c = 0; c < r.confusion.size(); ++c) {
        CHECK(n_by_cat[int(c)] == r.per_class_count[c]);
        CHECK(ok_by_cat[int(c)] == r.confusion[c][c]);
    }

    const std::string table = held_out_table(r);
    CHECK(std::count(table.begin(), table.end(), '\n') == 16);
    CHECK(table.find("style_transfer,deep_dream,6,") != std::string::npos);
    CHECK(table.find("gaussian_blur") == std::string::npos);
}

TEST_CASE("round trips") {
    const Manifest m = coarse_manifest(3);
    const MetricsReport r = evaluate(noisy_predictions(m, 5), m);
    CHECK(report_from_json(report_to_json(r)) == r);
    CHECK(report_to_json(report_from_json(report_to_json(r))) == report_to_json(r));
    CHECK(confusion_from_csv(confusion_to_csv(r)) == r.confusion);

    const MetricsReport rt = evaluate(noisy_predictions(m, 6, false), m);
    CHECK(report_from_json(report_to_json(rt)) == rt);
    CHECK_THROWS((void)confusion_from_csv("true_label,a\nx,1,2\n"));
}

TEST_CASE("invalid prediction sets") {
    const Manifest m = coarse_manifest(1);
    auto p = noisy_predictions(m, 1);
    auto dup = p;
    dup.back().example_id = dup.front().example_id;
    CHECK_THROWS_WITH_AS((void)evaluate(dup, m), doctest::Contains("duplicate"), std::invalid_argument);
    auto fewer = p;
    fewer.pop_back();
    CHECK_THROWS_AS((void)evaluate(fewer, m), std::invalid_argument);
    auto renamed = p;
    renamed[3].example_id = "elsewhere";
    CHECK_THROWS_WITH_AS((void)evaluate(renamed, m), doctest::Contains("no prediction"), std::invalid_argument);
    auto unknown = p;
    unknown[2].transform = 10;
    CHECK_THROWS_AS((void)evaluate(unknown, m), std::invalid_argument);
    auto mixed = p;
    mixed[4].semantic = -1;
    CHECK_THROWS_WITH_AS((void)evaluate(mixed, m), doctest::Contains("inconsistent"), std::invalid_argument);
    CHECK_THROWS_AS((void)evaluate({}, Manifest{}), std::invalid_argument);
}
