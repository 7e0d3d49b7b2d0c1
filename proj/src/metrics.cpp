#include "xprobe/metrics.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace xprobe {
using nlohmann::json;

namespace {

double ratio(std::uint64_t a, std::uint64_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

MetricsReport evaluate(const std::vector<PredictionRow>& predictions, const Manifest& manifest) {
    const auto& labels = manifest.header.labels;
    const int n_labels = static_cast<int>(labels.size());
    std::map<std::string, const PredictionRow*> by_id;
    for (const auto& p : predictions)
        if (!by_id.emplace(p.example_id, &p).second)
            throw std::invalid_argument("duplicate prediction for " + p.example_id);
    if (by_id.size() != manifest.records.size())
        throw std::invalid_argument("expected " + std::to_string(manifest.records.size()) + " predictions, got " +
                                    std::to_string(by_id.size()));
    if (predictions.empty()) throw std::invalid_argument("no predictions to evaluate");

    const bool has_t = predictions.front().transform >= 0;
    const bool has_s = predictions.front().semantic >= 0;
    MetricsReport rep;
    rep.task = to_string(manifest.header.task);
    rep.labels = labels;
    rep.n_examples = manifest.records.size();
    rep.has_sub_transforms = manifest.header.task == Task::coarse;
    rep.per_class_count.assign(static_cast<std::size_t>(n_labels), 0);
    if (has_t) rep.confusion.assign(static_cast<std::size_t>(n_labels), std::vector<std::uint64_t>(n_labels, 0));

    std::uint64_t clean_ok = 0, obf_ok = 0;
    std::map<std::pair<int, std::string>, SubTransformStat> subs;
    for (const auto& r : manifest.records) {
        const auto it = by_id.find(r.example_id);
        if (it == by_id.end()) throw std::invalid_argument("no prediction for " + r.example_id);
        const PredictionRow& p = *it->second;
        if (r.transform_label < 0 || r.transform_label >= n_labels)
            throw std::invalid_argument("unknown transform label in manifest for " + r.example_id);
        if ((p.transform >= 0) != has_t || (p.semantic >= 0) != has_s)
            throw std::invalid_argument("inconsistent prediction heads for " + r.example_id);
        if (has_t && p.transform >= n_labels)
            throw std::invalid_argument("prediction for " + r.example_id + " has unknown label " +
                                        std::to_string(p.transform));
        const auto t = static_cast<std::size_t>(r.transform_label);
        rep.per_class_count[t] += 1;
        if (has_t) rep.confusion[t][static_cast<std::size_t>(p.transform)] += 1;
        if (has_s) {
            if (r.semantic_label < 0) throw std::invalid_argument(r.example_id + " has no semantic label");
            const bool ok = p.semantic == r.semantic_label;
            if (r.transform_label == 0) {
                rep.n_clean += 1;
                clean_ok += ok;
            } else {
                rep.n_obfuscated += 1;
                obf_ok += ok;
            }
        }
        if (rep.has_sub_transforms && has_t) {
            auto& s = subs[{r.transform_label, r.sub_transform}];
            s.category = r.transform_label;
            s.sub_transform = r.sub_transform;
            s.held_out = r.held_out;
            s.n += 1;
            s.correct += p.transform == r.transform_label;
        }
    }
    if (has_t) {
        std::uint64_t trace = 0;
        rep.per_class_accuracy.assign(static_cast<std::size_t>(n_labels), 0.0);
        for (std::size_t c = 0; c < rep.confusion.size(); ++c) {
            trace += rep.confusion[c][c];
            rep.per_class_accuracy[c] = ratio(rep.confusion[c][c], rep.per_class_count[c]);
        }
        rep.transform_accuracy = ratio(trace, rep.n_examples);
    }
    if (has_s) {
        rep.clean_semantic_accuracy = ratio(clean_ok, rep.n_clean);
        rep.obfuscated_semantic_accuracy = ratio(obf_ok, rep.n_obfuscated);
    }
    for (auto& [key, s] : subs) {
        s.accuracy = ratio(s.correct, s.n);
        rep.per_sub_transform.push_back(s);
    }
    return rep;
}

std::string confusion_to_csv(const MetricsReport& report) {
    if (report.confusion.empty()) throw std::invalid_argument("report has no transform predictions");
    std::string out = "true_label";
    for (const auto& l : report.labels) out += "," + l;
    out += "\n";
    for (std::size_t r = 0; r < report.confusion.size(); ++r) {
        out += report.labels[r];
        for (auto v : report.confusion[r]) out += "," + std::to_string(v);
        out += "\n";
    }
    return out;
}

std::vector<std::vector<std::uint64_t>> confusion_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line.rfind("true_label,", 0) != 0)
        throw std::invalid_argument("confusion CSV: missing true_label header");
    const auto n = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    std::vector<std::vector<std::uint64_t>> m;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // label
        std::vector<std::uint64_t> counts;
        while (std::getline(row, cell, ',')) {
            if (cell.empty() || cell.find_first_not_of("0123456789") != std::string::npos)
                throw std::invalid_argument("confusion CSV: bad count '" + cell + "'");
            counts.push_back(std::stoull(cell));
        }
        if (counts.size() != n)
            throw std::invalid_argument("confusion CSV: row " + std::to_string(m.size() + 1) + " has " +
                                        std::to_string(counts.size()) + " counts, expected " + std::to_string(n));
        m.push_back(std::move(counts));
    }
    if (m.size() != n) throw std::invalid_argument("confusion CSV: expected " + std::to_string(n) + " rows");
    return m;
}

std::string report_to_json(const MetricsReport& report) {
    json subs = json::array();
    for (const auto& s : report.per_sub_transform)
        subs.push_back({{"category", s.category},
                        {"category_name", report.labels.at(static_cast<std::size_t>(s.category))},
                        {"sub_transform", s.sub_transform},
                        {"held_out", s.held_out},
                        {"n", s.n},
                        {"correct", s.correct},
                        {"accuracy", s.accuracy}});
    const json j{{"task", report.task},
                 {"labels", report.labels},
                 {"n_examples", report.n_examples},
                 {"transform_accuracy", optional_json(report.transform_accuracy)},
                 {"clean_semantic_accuracy", optional_json(report.clean_semantic_accuracy)},
                 {"obfuscated_semantic_accuracy", optional_json(report.obfuscated_semantic_accuracy)},
                 {"n_clean", report.n_clean},
                 {"n_obfuscated", report.n_obfuscated},
                 {"per_class_accuracy", report.per_class_accuracy},
                 {"per_class_count", report.per_class_count},
                 {"has_sub_transforms", report.has_sub_transforms},
                 {"per_sub_transform", subs},
                 {"confusion", report.confusion}};
    return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    MetricsReport r;
    r.task = j.at("task");
    r.labels = j.at("labels").get<std::vector<std::string>>();
    r.n_examples = j.at("n_examples");
    r.transform_accuracy = optional_from(j.at("transform_accuracy"));
    r.clean_semantic_accuracy = optional_from(j.at("clean_semantic_accuracy"));
    r.obfuscated_semantic_accuracy = optional_from(j.at("obfuscated_semantic_accuracy"));
    r.n_clean = j.at("n_clean");
    r.n_obfuscated = j.at("n_obfuscated");
    r.per_class_accuracy = j.at("per_class_accuracy").get<std::vector<double>>();
    r.per_class_count = j.at("per_class_count").get<std::vector<std::uint64_t>>();
    r.has_sub_transforms = j.at("has_sub_transforms");
    for (const auto& s : j.at("per_sub_transform"))
        r.per_sub_transform.push_back(
            {s.at("category"), s.at("sub_transform"), s.at("held_out"), s.at("n"), s.at("correct"), s.at("accuracy")});
    r.confusion = j.at("confusion").get<std::vector<std::vector<std::uint64_t>>>();
    return r;
}

std::string per_class_csv(const MetricsReport& report) {
    std::string out = "class_id,class_name,n,accuracy\n";
    for (std::size_t c = 0; c < report.labels.size(); ++c) {
        out += std::to_string(c) + "," + report.labels[c] + "," + std::to_string(report.per_class_count[c]) + ",";
        out += c < report.per_class_accuracy.size() ? fmt(report.per_class_accuracy[c]) : std::string();
        out += "\n";
    }
    return out;
}

std::string held_out_table(const MetricsReport& report) {
    if (!report.has_sub_transforms)
        throw std::invalid_argument("held-out table needs a coarse-task report with sub-transformation detail");
    std::string out = "category,sub_transform,n,accuracy\n";
    for (const auto& s : report.per_sub_transform) {
        if (!s.held_out) continue;
        out += report.labels.at(static_cast<std::size_t>(s.category)) + "," + s.sub_transform + "," +
               std::to_string(s.n) + "," + fmt(s.accuracy) + "\n";
    }
    return out;
}

}  // namespace xprobe
