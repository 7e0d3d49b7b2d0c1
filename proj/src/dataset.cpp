#include "xprobe/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json_util.hpp"
#include "parallel.hpp"
#include "xprobe/codec.hpp"
#include "xprobe/resample.hpp"
#include "xprobe/rng.hpp"
#include "xprobe/xform_color.hpp"
#include "xprobe/xform_geom.hpp"
#include "xprobe/xform_noise.hpp"
#include "xprobe/xform_overlay.hpp"

#ifndef XPROBE_VERSION
#define XPROBE_VERSION "dev"
#endif

namespace xprobe {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Planned {
    const TransformClass* cls;
    std::uint64_t seed;
};

std::uint64_t class_seed(std::uint64_t master, Task task, Split split, const std::string& source_id, int class_id) {
    return derive_seed(master, {to_string(task), to_string(split), source_id, std::int64_t{class_id}});
}

Planned plan_example(const TaxonomyCatalog& cat, Task task, Split split, std::uint64_t master,
                     const std::string& source_id, int class_id, const std::string* sub) {
    const std::uint64_t cs = class_seed(master, task, split, source_id, class_id);
    if (task == Task::fine) {
        const auto entries = cat.entries_for_label(class_id);
        if (entries.size() != 1) throw std::invalid_argument("unknown fine class id " + std::to_string(class_id));
        return {entries.front(), cs};
    }
    const TransformClass* cls = nullptr;
    if (sub) {
        cls = &cat.find(*sub);
        if (cls->class_id != class_id)
            throw std::invalid_argument("sub-transformation '" + *sub + "' does not belong to class " +
                                        std::to_string(class_id));
    } else {
        const auto entries = cat.entries_for_label(class_id);
        if (entries.empty()) throw std::invalid_argument("unknown coarse class id " + std::to_string(class_id));
        DetRng rng(derive_seed(cs, {std::string("sub_transform")}));
        cls = entries[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(entries.size()) - 1))];
    }
    return {cls, derive_seed(cs, {cls->sub_transform})};
}

std::string record_path(const ExampleRecord& r, bool with_sub) {
    std::string p = to_string(r.task) + "/" + to_string(r.split) + "/" + std::to_string(r.transform_label) + "/";
    if (with_sub) p += r.sub_transform + "/";
    return p + r.source_id + ".png";
}

bool id_has_sub(const std::string& example_id) { return std::count(example_id.begin(), example_id.end(), '/') == 4; }

Rgb color_param(const TransformInstance& inst) {
    auto level = [&](const char* n) { return static_cast<std::uint8_t>(std::clamp<std::int64_t>(inst.integer(n), 0, 255)); };
    return {level("color_r"), level("color_g"), level("color_b")};
}

int int_param(const TransformInstance& inst, const char* name) { return static_cast<int>(inst.integer(name)); }

json record_to_json(const ExampleRecord& r) {
    return {{"example_id", r.example_id},
            {"source_id", r.source_id},
            {"split", to_string(r.split)},
            {"task", to_string(r.task)},
            {"transform_label", r.transform_label},
            {"class_name", r.class_name},
            {"sub_transform", r.sub_transform},
            {"held_out", r.held_out},
            {"external", r.external},
            {"params", detail::params_to_json(r.params)},
            {"seed", r.seed},
            {"output_path", r.output_path ? json(*r.output_path) : json(nullptr)},
            {"content_hash", r.content_hash},
            {"semantic_label", r.semantic_label}};
}

ExampleRecord record_from_json(const json& j) {
    ExampleRecord r;
    r.example_id = j.at("example_id");
    r.source_id = j.at("source_id");
    r.split = split_from_string(j.at("split"));
    r.task = task_from_string(j.at("task"));
    r.transform_label = j.at("transform_label");
    r.class_name = j.at("class_name");
    r.sub_transform = j.at("sub_transform");
    r.held_out = j.at("held_out");
    r.external = j.value("external", false);
    for (const auto& [k, v] : j.at("params").items()) r.params.emplace_back(k, detail::param_from_json(v));
    // JSON objects come back key-sorted; restore the catalog's declaration order.
    const auto& specs = catalog_for(r.task, r.split).find(r.sub_transform).params;
    auto rank = [&](const std::string& name) {
        return std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == name; }) -
               specs.begin();
    };
    std::stable_sort(r.params.begin(), r.params.end(),
                     [&](const auto& a, const auto& b) { return rank(a.first) < rank(b.first); });
    r.seed = j.at("seed");
    if (!j.at("output_path").is_null()) r.output_path = j.at("output_path").get<std::string>();
    r.content_hash = j.value("content_hash", "");
    r.semantic_label = j.value("semantic_label", -1);
    return r;
}

std::string png_hash_write(const ImageBuffer& img, const fs::path& path) {
    const auto png = encode_png(img);
    write_file_atomic(path, png);
    return sha256_hex(png);
}

}  // namespace

std::vector<SourceImage> read_sources_csv(const fs::path& csv) {
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot open source list " + csv.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(csv.string() + ": empty source list");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "source_id,path,semantic_label")
        throw std::runtime_error(csv.string() + ": expected header 'source_id,path,semantic_label'");
    std::vector<SourceImage> out;
    std::set<std::string> seen;
    for (int lineno = 2; std::getline(in, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        if (fields.size() != 3)
            throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
        SourceImage s{fields[0], fields[1], -1};
        if (s.source_id.empty() || s.source_id.find('/') != std::string::npos)
            throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": invalid source_id");
        if (!seen.insert(s.source_id).second)
            throw std::runtime_error(csv.string() + ": duplicate source_id '" + s.source_id + "'");
        if (s.path.is_relative()) s.path = csv.parent_path() / s.path;
        try {
            s.semantic_label = std::stoi(fields[2]);
        } catch (const std::exception&) {
            throw std::runtime_error(csv.string() + ":" + std::to_string(lineno) + ": bad semantic_label");
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_sources_csv(const std::vector<SourceImage>& sources, const fs::path& csv) {
    // Paths are stored relative to the CSV when possible so the corpus can move.
    const fs::path base = fs::absolute(csv).parent_path();
    std::string text = "source_id,path,semantic_label\n";
    for (const auto& s : sources) {
        const fs::path rel = fs::absolute(s.path).lexically_relative(base);
        const fs::path stored = rel.empty() || *rel.begin() == ".." ? s.path : rel;
        text += s.source_id + "," + stored.generic_string() + "," + std::to_string(s.semantic_label) + "\n";
    }
    write_text_atomic(csv, text);
}

ImageBuffer canonicalize(const ImageBuffer& img, std::uint32_t size) {
    if (size == 0) throw std::invalid_argument("canonical size must be >= 1");
    const std::uint32_t w = img.width(), h = img.height();
    std::uint32_t rw = size, rh = size;
    if (w < h)
        rh = static_cast<std::uint32_t>(std::max<std::uint64_t>(size, (std::uint64_t{h} * size + w / 2) / w));
    else
        rw = static_cast<std::uint32_t>(std::max<std::uint64_t>(size, (std::uint64_t{w} * size + h / 2) / h));
    const ImageBuffer scaled = resize(img, rw, rh, ResizeMode::bilinear);
    const std::uint32_t x0 = (rw - size) / 2, y0 = (rh - size) / 2;
    ImageBuffer out(size, size);
    for (std::uint32_t y = 0; y < size; ++y)
        for (std::uint32_t x = 0; x < size; ++x) out.set(x, y, scaled.at(x0 + x, y0 + y));
    return out;
}

std::string to_string(BuildMode m) { return m == BuildMode::sampled ? "sampled" : "exhaustive"; }

BuildMode build_mode_from_string(const std::string& s) {
    if (s == "sampled") return BuildMode::sampled;
    if (s == "exhaustive") return BuildMode::exhaustive;
    throw std::invalid_argument("unknown mode '" + s + "' (expected sampled or exhaustive)");
}

std::size_t Manifest::pending_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.pending(); }));
}

fs::path Manifest::image_path(const ExampleRecord& r) const {
    if (r.pending()) throw std::runtime_error("example " + r.example_id + " is pending external ingestion");
    return root / *r.output_path;
}

void Manifest::require_complete() const {
    std::set<std::string> subs;
    for (const auto& r : records)
        if (r.pending()) subs.insert(r.sub_transform);
    if (subs.empty()) return;
    std::string msg = std::to_string(pending_count()) + " record(s) await ingestion for:";
    for (const auto& s : subs) msg += " " + s;
    throw std::runtime_error(msg);
}

std::string make_example_id(Task task, Split split, const std::string& source_id, int class_id,
                            const std::string& sub_transform) {
    std::string id = to_string(task) + "/" + to_string(split) + "/" + source_id + "/" + std::to_string(class_id);
    if (!sub_transform.empty()) id += "/" + sub_transform;
    return id;
}

std::string manifest_file_name(Task task, Split split, BuildMode mode) {
    std::string name = "manifest_" + to_string(task) + "_" + to_string(split);
    if (mode == BuildMode::exhaustive) name += "_exhaustive";
    return name + ".jsonl";
}

ImageBuffer apply_instance(const ImageBuffer& img, const TransformInstance& inst, const AssetBundle& assets) {
    switch (inst.kind) {
        case OpKind::identity: return img;
        case OpKind::hue: return hsl_affine(img, HslChannel::hue, inst.real("scale"), inst.real("offset"));
        case OpKind::saturation:
            return hsl_affine(img, HslChannel::saturation, inst.real("scale"), inst.real("offset"));
        case OpKind::lightness: return hsl_affine(img, HslChannel::lightness, inst.real("scale"), inst.real("offset"));
        case OpKind::gaussian_noise: return gaussian_noise(img, inst.real("sigma"), inst.seed);
        case OpKind::impulse_noise: return impulse_noise(img, inst.real("p"), inst.seed);
        case OpKind::random_dither: return random_dither(img, inst.seed);
        case OpKind::ordered_dither: return ordered_dither(img);
        case OpKind::fs_dither: return fs_dither(img, int_param(inst, "bits"));
        case OpKind::jpeg: return jpeg_recompress(img, int_param(inst, "quality"));
        case OpKind::gaussian_blur: return gaussian_blur(img, inst.real("radius"));
        case OpKind::motion_blur: return motion_blur(img, int_param(inst, "length"), inst.real("angle"));
        case OpKind::pixelate: return pixelate(img, inst.real("factor"));
        case OpKind::blurry_background:
            return blurry_background(img, inst.real("sw"), inst.real("sh"), inst.real("radius"));
        case OpKind::corner_crop: return corner_crop(img);
        case OpKind::rotate: return rotate(img, inst.real("degrees"));
        case OpKind::flip_vertical: return flip_vertical(img);
        case OpKind::transpose:
            return transpose(img, inst.text("diagonal") == "major" ? Diagonal::major : Diagonal::minor);
        case OpKind::line_shift:
            return line_shift(img, inst.text("axis") == "rows" ? ShiftAxis::rows : ShiftAxis::columns,
                              inst.integer("distance"));
        case OpKind::posterize: return posterize(img, int_param(inst, "bits"));
        case OpKind::solarize:
            return solarize(img, static_cast<std::uint8_t>(std::clamp<std::int64_t>(inst.integer("threshold"), 0, 255)));
        case OpKind::invert: return invert(img);
        case OpKind::grayscale: return grayscale(img);
        case OpKind::quantize_colors: return quantize_colors(img, int_param(inst, "k"), inst.seed);
        case OpKind::hsl_as_rgb: return hsl_as_rgb(img);
        case OpKind::grid_overlay: return grid_overlay(img, color_param(inst));
        case OpKind::line_overlay:
            return line_overlay(img, int_param(inst, "width"), int_param(inst, "gap"), inst.real("angle"),
                                color_param(inst));
        case OpKind::text_overlay:
            return text_overlay(img, assets.get(inst.text("text"), AssetKind::text_page), color_param(inst));
        case OpKind::icon_overlay:
            return icon_overlay(img, assets.get(inst.text("icon"), AssetKind::icon), int_param(inst, "opacity"),
                                inst.real("ratio"));
        case OpKind::image_overlay:
            return image_overlay(img, assets.get(inst.text("image"), AssetKind::distraction_image), inst.real("frac"),
                                 int_param(inst, "opacity"), inst.seed);
        case OpKind::fuse_background:
            return fuse_background(img, assets.get(inst.text("image"), AssetKind::distraction_image),
                                   inst.real("frac"), int_param(inst, "opacity"));
        case OpKind::halftone:
            return halftone(img, waveform_from_string(inst.text("wave")), int_param(inst, "line_width"),
                            int_param(inst, "max_amp"));
        case OpKind::external: break;
    }
    throw std::invalid_argument("'" + inst.sub_transform + "' is an external transformation and cannot be applied");
}

Manifest build_dataset(const std::vector<SourceImage>& sources, const BuildOptions& opts, const fs::path& out_dir) {
    if (sources.empty()) throw std::invalid_argument("build: no source images");
    if (opts.task == Task::coarse && opts.mode == BuildMode::exhaustive && opts.split != Split::test)
        throw std::invalid_argument("build: exhaustive mode is only defined for the coarse test split");
    std::set<std::string> ids;
    for (const auto& s : sources)
        if (!ids.insert(s.source_id).second) throw std::invalid_argument("build: duplicate source_id " + s.source_id);

    const AssetBundle& assets = opts.assets ? *opts.assets : AssetBundle::builtin();
    const TaxonomyCatalog& cat = catalog_for(opts.task, opts.split);
    const bool exhaustive = opts.task == Task::coarse && opts.mode == BuildMode::exhaustive;

    Manifest m;
    m.root = out_dir;
    m.header = {opts.task,        opts.split,   opts.mode,          opts.master_seed, opts.canonical_size,
                cat.hash(),       assets.bundle_hash(), XPROBE_VERSION, cat.labels()};

    struct Item {
        std::size_t source;
        int class_id;
        const TransformClass* sub;  // set in exhaustive mode
    };
    std::vector<Item> items;
    for (std::size_t s = 0; s < sources.size(); ++s) {
        if (exhaustive) {
            for (const auto& e : cat.entries()) items.push_back({s, e.class_id, &e});
        } else {
            for (int c = 0; c < cat.label_count(); ++c) items.push_back({s, c, nullptr});
        }
    }

    std::vector<ImageBuffer> canon(sources.size());
    detail::parallel_for(sources.size(), opts.jobs, [&](std::size_t i) {
        if (!fs::exists(sources[i].path))
            throw std::runtime_error("source image not found: " + sources[i].path.string());
        canon[i] = canonicalize(read_image(sources[i].path), opts.canonical_size);
    });

    m.records.resize(items.size());
    detail::parallel_for(items.size(), opts.jobs, [&](std::size_t i) {
        const Item& it = items[i];
        const SourceImage& src = sources[it.source];
        const Planned p = plan_example(cat, opts.task, opts.split, opts.master_seed, src.source_id, it.class_id,
                                       it.sub ? &it.sub->sub_transform : nullptr);
        ExampleRecord& r = m.records[i];
        r.example_id = make_example_id(opts.task, opts.split, src.source_id, it.class_id,
                                       exhaustive ? p.cls->sub_transform : std::string());
        r.source_id = src.source_id;
        r.split = opts.split;
        r.task = opts.task;
        r.transform_label = it.class_id;
        r.class_name = p.cls->class_name;
        r.sub_transform = p.cls->sub_transform;
        r.held_out = p.cls->held_out;
        r.external = p.cls->external;
        r.seed = p.seed;
        r.semantic_label = src.semantic_label;
        r.params = sample_params(*p.cls, p.seed);
        if (r.external) return;
        const TransformInstance inst = sample_instance(*p.cls, p.seed);
        const std::string rel = record_path(r, exhaustive);
        r.content_hash = png_hash_write(apply_instance(canon[it.source], inst, assets), out_dir / rel);
        r.output_path = rel;
    });
    std::sort(m.records.begin(), m.records.end(),
              [](const auto& a, const auto& b) { return a.example_id < b.example_id; });
    write_manifest(m, out_dir / manifest_file_name(opts.task, opts.split, opts.mode));
    return m;
}

std::optional<ImageBuffer> regenerate_example(const ManifestHeader& header, const SourceImage& source,
                                              const std::string& example_id, const AssetBundle& assets) {
    std::vector<std::string> parts;
    std::stringstream ss(example_id);
    for (std::string p; std::getline(ss, p, '/');) parts.push_back(p);
    if (parts.size() != 4 && parts.size() != 5) throw std::invalid_argument("malformed example id '" + example_id + "'");
    const Task task = task_from_string(parts[0]);
    const Split split = split_from_string(parts[1]);
    if (task != header.task || split != header.split || parts[2] != source.source_id)
        throw std::invalid_argument("example id '" + example_id + "' does not match the header or source");
    const int class_id = std::stoi(parts[3]);
    const TaxonomyCatalog& cat = catalog_for(task, split);
    const Planned p = plan_example(cat, task, split, header.master_seed, source.source_id, class_id,
                                   parts.size() == 5 ? &parts[4] : nullptr);
    if (p.cls->external) return std::nullopt;
    return apply_instance(canonicalize(read_image(source.path), header.canonical_size), sample_instance(*p.cls, p.seed),
                          assets);
}

Manifest ingest_external(const Manifest& manifest, const fs::path& dir, const std::string& sub_transform) {
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < manifest.records.size(); ++i)
        if (manifest.records[i].external && manifest.records[i].sub_transform == sub_transform) targets.push_back(i);
    if (targets.empty()) throw std::invalid_argument("manifest has no external records for '" + sub_transform + "'");

    // Validate everything before touching the output tree.
    std::vector<std::string> missing;
    std::vector<std::pair<std::size_t, std::vector<std::uint8_t>>> staged;
    const std::uint32_t size = manifest.header.canonical_size;
    for (std::size_t i : targets) {
        const ExampleRecord& r = manifest.records[i];
        const fs::path file = dir / (r.source_id + ".png");
        if (!fs::exists(file)) {
            missing.push_back(r.source_id);
            continue;
        }
        const ImageBuffer img = read_image(file);
        if (img.width() != size || img.height() != size)
            throw std::runtime_error(file.string() + ": expected " + std::to_string(size) + "x" + std::to_string(size) +
                                     ", got " + std::to_string(img.width()) + "x" + std::to_string(img.height()));
        auto png = encode_png(img);
        if (!r.pending() && sha256_hex(png) != r.content_hash)
            throw std::runtime_error(r.example_id + " was already ingested with different content");
        staged.emplace_back(i, std::move(png));
    }
    if (!missing.empty()) {
        std::string msg = "missing stylized images for '" + sub_transform + "':";
        for (const auto& id : missing) msg += " " + id;
        throw std::runtime_error(msg);
    }

    Manifest out = manifest;
    for (auto& [i, png] : staged) {
        ExampleRecord& r = out.records[i];
        if (!r.pending()) continue;
        const std::string rel = record_path(r, id_has_sub(r.example_id));
        write_file_atomic(out.root / rel, png);
        r.output_path = rel;
        r.content_hash = sha256_hex(png);
    }
    return out;
}

void write_manifest(const Manifest& manifest, const fs::path& path) {
    const ManifestHeader& h = manifest.header;
    json header{{"type", "header"},
                {"task", to_string(h.task)},
                {"split", to_string(h.split)},
                {"mode", to_string(h.mode)},
                {"master_seed", h.master_seed},
                {"canonical_size", h.canonical_size},
                {"catalog_hash", h.catalog_hash},
                {"asset_bundle_hash", h.asset_bundle_hash},
                {"tool_version", h.tool_version},
                {"labels", h.labels},
                {"record_count", manifest.records.size()}};
    std::string text = header.dump() + "\n";
    for (const auto& r : manifest.records) text += record_to_json(r).dump() + "\n";
    write_text_atomic(path, text);
}

Manifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());
    Manifest m;
    m.root = path.parent_path();
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty manifest");
    try {
        const json h = json::parse(line);
        if (h.value("type", "") != "header") throw std::runtime_error("first line is not a header");
        m.header.task = task_from_string(h.at("task"));
        m.header.split = split_from_string(h.at("split"));
        m.header.mode = build_mode_from_string(h.at("mode"));
        m.header.master_seed = h.at("master_seed");
        m.header.canonical_size = h.at("canonical_size");
        m.header.catalog_hash = h.at("catalog_hash");
        m.header.asset_bundle_hash = h.at("asset_bundle_hash");
        m.header.tool_version = h.at("tool_version");
        m.header.labels = h.at("labels").get<std::vector<std::string>>();
        for (int lineno = 2; std::getline(in, line); ++lineno) {
            if (line.empty()) continue;
            m.records.push_back(record_from_json(json::parse(line)));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": malformed manifest: " + e.what());
    }
    return m;
}

}  // namespace xprobe
