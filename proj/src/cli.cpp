#include "xprobe/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "parallel.hpp"
#include "xprobe/codec.hpp"
#include "xprobe/dataset.hpp"
#include "xprobe/embed.hpp"
#include "xprobe/metrics.hpp"
#include "xprobe/probe.hpp"
#include "xprobe/synth.hpp"
#include "xprobe/taxonomy.hpp"

namespace xprobe::cli {
namespace {
namespace fs = std::filesystem;
using nlohmann::json;

// Raised for failures that should exit 1 under a named stage.
struct StageError : std::runtime_error {
    StageError(std::string stage, const std::string& what) : std::runtime_error(what), stage(std::move(stage)) {}
    std::string stage;
};

template <class F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

unsigned resolve_jobs(unsigned flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("XPROBE_JOBS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw std::invalid_argument(std::string("XPROBE_JOBS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void echo_config(const fs::path& path, const std::string& command, json fields) {
    fields["command"] = command;
    fields["tool_version"] =
#ifdef XPROBE_VERSION
        XPROBE_VERSION;
#else
        "dev";
#endif
    write_text_atomic(path, fields.dump(2) + "\n");
}

Manifest load_manifest(const fs::path& path, bool skip_pending) {
    Manifest m = stage("read manifest", [&] { return read_manifest(path); });
    if (!skip_pending) {
        stage("check manifest", [&] {
            m.require_complete();
            return 0;
        });
        return m;
    }
    std::erase_if(m.records, [](const ExampleRecord& r) { return r.pending(); });
    return m;
}

std::vector<std::string> ids_of(const Manifest& m) {
    std::vector<std::string> ids;
    ids.reserve(m.records.size());
    for (const auto& r : m.records) ids.push_back(r.example_id);
    return ids;
}

LabeledSet labeled_from(const Manifest& m, const EmbeddingTable& table, bool need_semantic) {
    LabeledSet s;
    s.x = lookup(table, ids_of(m));
    for (const auto& r : m.records) {
        s.t.push_back(r.transform_label);
        if (need_semantic) {
            if (r.semantic_label < 0) throw std::invalid_argument(r.example_id + " has no semantic label");
            s.y.push_back(r.semantic_label);
        }
    }
    return s;
}

// ---- subcommands ----

struct GenerateArgs {
    std::string sources, task, split, mode = "sampled", out, assets;
    std::uint64_t seed = 0;
    std::uint32_t size = 224;
    unsigned jobs = 0;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    const auto sources = stage("read sources", [&] { return read_sources_csv(a.sources); });
    std::optional<AssetBundle> bundle;
    if (!a.assets.empty()) bundle = stage("load assets", [&] { return AssetBundle::load(a.assets); });
    BuildOptions opts;
    opts.task = task_from_string(a.task);
    opts.split = split_from_string(a.split);
    opts.mode = build_mode_from_string(a.mode);
    opts.master_seed = a.seed;
    opts.canonical_size = a.size;
    opts.jobs = resolve_jobs(a.jobs);
    opts.assets = bundle ? &*bundle : nullptr;
    const Manifest m = stage("generate", [&] { return build_dataset(sources, opts, a.out); });
    const fs::path manifest_path = fs::path(a.out) / manifest_file_name(opts.task, opts.split, opts.mode);
    // jobs is left out of the echo: it never changes the output.
    echo_config(manifest_path.string() + ".config.json", "generate",
                {{"sources", a.sources},
                 {"task", a.task},
                 {"split", a.split},
                 {"mode", a.mode},
                 {"seed", a.seed},
                 {"size", a.size},
                 {"out", a.out},
                 {"assets", a.assets.empty() ? json(nullptr) : json(a.assets)},
                 {"asset_bundle_hash", m.header.asset_bundle_hash},
                 {"catalog_hash", m.header.catalog_hash}});
    out << "wrote " << m.records.size() << " records (" << m.pending_count() << " pending) to "
        << manifest_path.string() << "\n";
    return kExitOk;
}

struct IngestArgs {
    std::string manifest, dir, sub_transform;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
    const Manifest m = stage("read manifest", [&] { return read_manifest(a.manifest); });
    const std::size_t before = m.pending_count();
    const Manifest updated = stage("ingest", [&] { return ingest_external(m, a.dir, a.sub_transform); });
    stage("write manifest", [&] {
        write_manifest(updated, a.manifest);
        return 0;
    });
    echo_config(a.manifest + ".ingest_" + a.sub_transform + ".config.json", "ingest-styles",
                {{"manifest", a.manifest}, {"dir", a.dir}, {"sub_transform", a.sub_transform}});
    out << "ingested " << (before - updated.pending_count()) << " images for " << a.sub_transform << "; "
        << updated.pending_count() << " still pending\n";
    return kExitOk;
}

struct EmbedArgs {
    std::string manifest, provider = "toy", table, out;
    unsigned jobs = 0;
    bool skip_pending = false;
};

int cmd_embed(const EmbedArgs& a, std::ostream& out) {
    const Manifest m = load_manifest(a.manifest, a.skip_pending);
    EmbeddingTable result;
    if (a.provider == "toy") {
        std::vector<std::vector<float>> rows(m.records.size());
        stage("embed", [&] {
            detail::parallel_for(m.records.size(), resolve_jobs(a.jobs), [&](std::size_t i) {
                rows[i] = toy_embed(read_image(m.image_path(m.records[i])));
            });
            return 0;
        });
        result = EmbeddingTable(static_cast<std::uint32_t>(kToyEmbedDim), "toy_embed/1");
        for (std::size_t i = 0; i < rows.size(); ++i) result.add(m.records[i].example_id, std::move(rows[i]));
    } else {
        if (a.table.empty()) throw std::invalid_argument("--provider table requires --table");
        const EmbeddingTable src = stage("read table", [&] { return read_table(a.table); });
        const Matrix rows = stage("lookup", [&] { return lookup(src, ids_of(m)); });
        result = EmbeddingTable(src.dim(), src.provenance());
        for (std::size_t i = 0; i < rows.rows; ++i)
            result.add(m.records[i].example_id, std::vector<float>(rows.row(i), rows.row(i) + rows.cols));
    }
    stage("write table", [&] {
        write_table(result, a.out);
        return 0;
    });
    echo_config(a.out + ".config.json", "embed",
                {{"manifest", a.manifest},
                 {"provider", a.provider},
                 {"table", a.table.empty() ? json(nullptr) : json(a.table)},
                 {"out", a.out},
                 {"skip_pending", a.skip_pending},
                 {"dim", result.dim()},
                 {"rows", result.size()}});
    out << "wrote " << result.size() << " embeddings of dim " << result.dim() << " to " << a.out << "\n";
    return kExitOk;
}

struct TrainArgs {
    std::string train_manifest, train_table, val_manifest, val_table, heads = "two_head", out;
    std::uint32_t hidden = 2048, batch = 1024, semantic_classes = 0;
    double dropout = 0.2, lr = 1e-3;
    std::uint64_t budget = 2'000'000, seed = 0, eval_every = 0;
    bool skip_pending = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const Manifest m = load_manifest(a.train_manifest, a.skip_pending);
    if (m.header.split != Split::train)
        throw StageError("check manifest", a.train_manifest + " is a " + to_string(m.header.split) +
                                               "-split manifest; training only reads train-split data");
    ProbeConfig cfg;
    cfg.hidden_width = a.hidden;
    cfg.heads = heads_from_string(a.heads);
    cfg.dropout_rate = a.hidden == 0 ? 0.0 : a.dropout;
    cfg.learning_rate = a.lr;
    cfg.batch_size = a.batch;
    cfg.total_examples_seen = a.budget;
    cfg.seed = a.seed;
    cfg.eval_every = a.eval_every;
    cfg.n_transform_classes = static_cast<std::uint32_t>(m.header.labels.size());
    const bool semantic = cfg.has_semantic();
    if (semantic) {
        int max_label = -1;
        for (const auto& r : m.records) max_label = std::max(max_label, r.semantic_label);
        cfg.n_semantic_classes = a.semantic_classes ? a.semantic_classes : static_cast<std::uint32_t>(max_label + 1);
    }
    const EmbeddingTable table = stage("read table", [&] { return read_table(a.train_table); });
    cfg.input_dim = table.dim();
    stage("check config", [&] {
        cfg.validate();
        return 0;
    });
    const TrainSet train_set{stage("lookup", [&] { return labeled_from(m, table, semantic); })};

    std::optional<EvalSet> val;
    if (!a.val_manifest.empty()) {
        if (a.val_table.empty()) throw std::invalid_argument("--val-manifest requires --val-table");
        const Manifest vm = load_manifest(a.val_manifest, a.skip_pending);
        if (vm.header.split != Split::train)
            throw StageError("check manifest", "validation data must come from a train-split manifest");
        const EmbeddingTable vt = stage("read table", [&] { return read_table(a.val_table); });
        val = EvalSet{stage("lookup", [&] { return labeled_from(vm, vt, semantic); })};
    }
    const TrainResult res = stage("train", [&] { return train(cfg, train_set, val ? &*val : nullptr); });
    stage("write model", [&] {
        save_model(res.model, a.out);
        write_text_atomic(a.out + ".log.csv", log_to_csv(res.log));
        return 0;
    });
    json echo = json::parse(cfg.to_json());
    echo["train_manifest"] = a.train_manifest;
    echo["train_table"] = a.train_table;
    echo["val_manifest"] = a.val_manifest.empty() ? json(nullptr) : json(a.val_manifest);
    echo["out"] = a.out;
    echo["skip_pending"] = a.skip_pending;
    echo_config(a.out + ".config.json", "train", echo);
    const LogRow& last = res.log.back();
    out << "trained " << cfg.total_steps() << " steps; final loss " << last.loss << "; model at " << a.out << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string model, test_manifest, test_table, out;
    bool semantic = false, skip_pending = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const ProbeModel model = stage("read model", [&] { return load_model(a.model); });
    if (a.semantic && !model.cfg.has_semantic())
        throw StageError("check model", "semantic metrics requested but " + a.model + " was trained with heads=" +
                                            to_string(model.cfg.heads) + " and has no semantic head");
    const Manifest m = load_manifest(a.test_manifest, a.skip_pending);
    if (model.cfg.has_transform() && model.cfg.n_transform_classes != m.header.labels.size())
        throw StageError("check model", "model predicts " + std::to_string(model.cfg.n_transform_classes) +
                                            " transformation classes but the manifest has " +
                                            std::to_string(m.header.labels.size()));
    const EmbeddingTable table = stage("read table", [&] { return read_table(a.test_table); });
    if (table.dim() != model.cfg.input_dim)
        throw StageError("check model", "embedding dim " + std::to_string(table.dim()) + " does not match model input " +
                                            std::to_string(model.cfg.input_dim));
    const Matrix x = stage("lookup", [&] { return lookup(table, ids_of(m)); });
    const Predictions p = predict(model, x);
    std::vector<PredictionRow> rows(m.records.size());
    std::string pred_csv = "example_id,transform_label,predicted_transform,semantic_label,predicted_semantic\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = m.records[i];
        rows[i].example_id = r.example_id;
        rows[i].transform = p.transform.empty() ? -1 : p.transform[i];
        rows[i].semantic = p.semantic.empty() ? -1 : p.semantic[i];
        pred_csv += r.example_id + "," + std::to_string(r.transform_label) + "," + std::to_string(rows[i].transform) +
                    "," + std::to_string(r.semantic_label) + "," + std::to_string(rows[i].semantic) + "\n";
    }
    const MetricsReport rep = stage("evaluate", [&] { return evaluate(rows, m); });
    const fs::path dir = a.out;
    stage("write report", [&] {
        write_text_atomic(dir / "report.json", report_to_json(rep));
        write_text_atomic(dir / "predictions.csv", pred_csv);
        if (!rep.confusion.empty()) write_text_atomic(dir / "confusion.csv", confusion_to_csv(rep));
        if (rep.has_sub_transforms && rep.transform_accuracy)
            write_text_atomic(dir / "held_out.csv", held_out_table(rep));
        return 0;
    });
    echo_config(dir / "eval_config.json", "eval",
                {{"model", a.model},
                 {"test_manifest", a.test_manifest},
                 {"test_table", a.test_table},
                 {"out", a.out},
                 {"semantic", a.semantic},
                 {"skip_pending", a.skip_pending}});
    if (rep.transform_accuracy) out << "transform accuracy " << *rep.transform_accuracy << "\n";
    if (rep.clean_semantic_accuracy)
        out << "semantic accuracy clean " << *rep.clean_semantic_accuracy << ", obfuscated "
            << *rep.obfuscated_semantic_accuracy << "\n";
    return kExitOk;
}

int cmd_report(const std::string& in, std::ostream& out) {
    const fs::path dir = in;
    const auto bytes = stage("read report", [&] { return read_file(dir / "report.json"); });
    const MetricsReport rep = stage("read report", [&] { return report_from_json(std::string(bytes.begin(), bytes.end())); });
    stage("write report", [&] {
        write_text_atomic(dir / "per_class.csv", per_class_csv(rep));
        if (rep.has_sub_transforms) write_text_atomic(dir / "held_out.csv", held_out_table(rep));
        return 0;
    });
    echo_config(dir / "report_config.json", "report", {{"in", in}});
    out << "wrote per_class.csv" << (rep.has_sub_transforms ? " and held_out.csv" : "") << " in " << in << "\n";
    return kExitOk;
}

struct SynthArgs {
    std::string out;
    std::uint32_t count = 50, size = 256;
    std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const fs::path dir = a.out;
    std::vector<SourceImage> sources(a.count);
    stage("synthesize", [&] {
        for (std::uint32_t i = 0; i < a.count; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "src_%05u", i);
            const int kind = static_cast<int>(i % kSynthSceneKinds);
            // Alternate landscape/portrait/square so canonicalization is exercised.
            const std::uint32_t w = a.size + (i % 3 == 1 ? a.size / 4 : 0);
            const std::uint32_t h = a.size + (i % 3 == 2 ? a.size / 4 : 0);
            const fs::path rel = fs::path("photos") / (std::string(id) + ".png");
            write_png(synth_photo(derive_seed(a.seed, {std::string("synth_sources"), std::int64_t{i}}), w, h, kind),
                      dir / rel);
            sources[i] = {id, dir / rel, kind};
        }
        write_sources_csv(sources, dir / "sources.csv");
        return 0;
    });
    echo_config(dir / "synth_sources_config.json", "synth-sources",
                {{"out", a.out}, {"count", a.count}, {"size", a.size}, {"seed", a.seed}});
    out << "wrote " << a.count << " source images and " << (dir / "sources.csv").string() << "\n";
    return kExitOk;
}

int cmd_catalog(const std::string& task, const std::string& split, const std::string& out_path, std::ostream& out) {
    const TaxonomyCatalog& cat = catalog_for(task_from_string(task), split_from_string(split));
    if (out_path.empty()) {
        out << cat.to_json() << "\n";
        return kExitOk;
    }
    write_text_atomic(out_path, cat.to_json() + "\n");
    echo_config(out_path + ".config.json", "catalog", {{"task", task}, {"split", split}, {"out", out_path}});
    return kExitOk;
}

int cmd_write_assets(const std::string& dir, std::ostream& out) {
    stage("write assets", [&] {
        AssetBundle::builtin().write(dir);
        return 0;
    });
    echo_config(fs::path(dir) / "write_assets_config.json", "write-assets",
                {{"out", dir}, {"asset_bundle_hash", AssetBundle::builtin().bundle_hash()}});
    out << "wrote asset bundle " << AssetBundle::builtin().bundle_hash() << " to " << dir << "\n";
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transformation-probe dataset and evaluation toolkit", "xprobe"};
    app.require_subcommand(1);
    const std::vector<std::string> tasks{"fine", "coarse"}, splits{"train", "test"};

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a transformed dataset and its manifest");
    g->add_option("--sources", gen.sources, "sources.csv (source_id,path,semantic_label)")->required();
    g->add_option("--task", gen.task)->required()->check(CLI::IsMember(tasks));
    g->add_option("--split", gen.split)->required()->check(CLI::IsMember(splits));
    g->add_option("--mode", gen.mode)->check(CLI::IsMember({"sampled", "exhaustive"}))->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--size", gen.size, "Canonical square size")->check(CLI::PositiveNumber)->capture_default_str();
    g->add_option("--out", gen.out)->required();
    g->add_option("--assets", gen.assets, "Asset bundle directory (default: built-in bundle)");
    g->add_option("--jobs", gen.jobs, "Worker threads (default: $XPROBE_JOBS, else all cores)");

    IngestArgs ing;
    auto* i = app.add_subcommand("ingest-styles", "Ingest externally produced images for a pending sub-transform");
    i->add_option("--manifest", ing.manifest)->required();
    i->add_option("--dir", ing.dir, "Directory holding {source_id}.png")->required();
    i->add_option("--sub-transform", ing.sub_transform)->required();

    EmbedArgs emb;
    auto* e = app.add_subcommand("embed", "Compute or import embeddings for a manifest");
    e->add_option("--manifest", emb.manifest)->required();
    e->add_option("--provider", emb.provider)->check(CLI::IsMember({"toy", "table"}))->capture_default_str();
    e->add_option("--table", emb.table, "Input table for --provider table");
    e->add_option("--out", emb.out)->required();
    e->add_option("--jobs", emb.jobs);
    e->add_flag("--skip-pending", emb.skip_pending, "Drop records still awaiting ingestion");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a probe on frozen embeddings");
    t->add_option("--train-manifest", tr.train_manifest)->required();
    t->add_option("--train-table", tr.train_table)->required();
    t->add_option("--val-manifest", tr.val_manifest, "Train-split manifest used only for logged accuracy");
    t->add_option("--val-table", tr.val_table);
    t->add_option("--heads", tr.heads)
        ->check(CLI::IsMember({"transform_only", "semantic_only", "two_head"}))
        ->capture_default_str();
    t->add_option("--hidden", tr.hidden, "Hidden width; 0 = linear probe")->capture_default_str();
    t->add_option("--dropout", tr.dropout)->check(CLI::Range(0.0, 0.999))->capture_default_str();
    t->add_option("--lr", tr.lr)->check(CLI::PositiveNumber)->capture_default_str();
    t->add_option("--batch", tr.batch)->check(CLI::PositiveNumber)->capture_default_str();
    t->add_option("--budget", tr.budget, "Total examples seen")->check(CLI::PositiveNumber)->capture_default_str();
    t->add_option("--seed", tr.seed)->capture_default_str();
    t->add_option("--eval-every", tr.eval_every, "Steps between log rows (0 = ten rows)");
    t->add_option("--semantic-classes", tr.semantic_classes, "Default: 1 + largest semantic label");
    t->add_option("--out", tr.out)->required();
    t->add_flag("--skip-pending", tr.skip_pending);

    EvalArgs ev;
    auto* v = app.add_subcommand("eval", "Evaluate a probe on a test manifest");
    v->add_option("--model", ev.model)->required();
    v->add_option("--test-manifest", ev.test_manifest)->required();
    v->add_option("--test-table", ev.test_table)->required();
    v->add_option("--out", ev.out)->required();
    v->add_flag("--semantic", ev.semantic, "Require semantic metrics");
    v->add_flag("--skip-pending", ev.skip_pending);

    std::string report_in;
    auto* r = app.add_subcommand("report", "Write per-class and held-out CSVs from report.json");
    r->add_option("--in", report_in)->required();

    SynthArgs syn;
    auto* s = app.add_subcommand("synth-sources", "Write a procedural source-photo fixture and sources.csv");
    s->add_option("--out", syn.out)->required();
    s->add_option("--count", syn.count)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--size", syn.size)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--seed", syn.seed)->capture_default_str();

    std::string cat_task, cat_split = "train", cat_out;
    auto* c = app.add_subcommand("catalog", "Print the transformation catalog as JSON");
    c->add_option("--task", cat_task)->required()->check(CLI::IsMember(tasks));
    c->add_option("--split", cat_split)->check(CLI::IsMember(splits))->capture_default_str();
    c->add_option("--out", cat_out);

    std::string assets_out;
    auto* w = app.add_subcommand("write-assets", "Export the built-in overlay asset bundle");
    w->add_option("--out", assets_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (g->parsed()) return cmd_generate(gen, out);
        if (i->parsed()) return cmd_ingest(ing, out);
        if (e->parsed()) return cmd_embed(emb, out);
        if (t->parsed()) return cmd_train(tr, out);
        if (v->parsed()) return cmd_eval(ev, out);
        if (r->parsed()) return cmd_report(report_in, out);
        if (s->parsed()) return cmd_synth(syn, out);
        if (c->parsed()) return cmd_catalog(cat_task, cat_split, cat_out, out);
        return cmd_write_assets(assets_out, out);
    } catch (const StageError& ex) {
        err << "xprobe " << name << ": " << ex.stage << " failed: " << ex.what() << "\n";
    } catch (const std::exception& ex) {
        err << "xprobe " << name << ": " << ex.what() << "\n";
    }
    return kExitRuntime;
}

}  // namespace xprobe::cli
