#include "xprobe/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json_util.hpp"
#include "xprobe/assets.hpp"
#include "xprobe/codec.hpp"
#include "xprobe/rng.hpp"

namespace xprobe {
namespace {

using P = ParamSpec;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr const char* kOpNames[] = {
    "identity",      "hue",          "saturation",   "lightness",       "gaussian_noise",    "impulse_noise",
    "random_dither", "ordered_dither", "fs_dither",  "jpeg",            "gaussian_blur",     "motion_blur",
    "pixelate",      "blurry_background", "corner_crop", "rotate",      "flip_vertical",     "transpose",
    "line_shift",    "posterize",    "solarize",     "invert",          "grayscale",         "quantize_colors",
    "hsl_as_rgb",    "grid_overlay", "line_overlay", "text_overlay",    "icon_overlay",      "image_overlay",
    "fuse_background", "halftone",   "external",
};
static_assert(std::size(kOpNames) == static_cast<std::size_t>(OpKind::external) + 1);

std::vector<ParamSpec> fixed_color(int r, int g, int b) {
    return {P::constant("color_r", std::int64_t{r}), P::constant("color_g", std::int64_t{g}),
            P::constant("color_b", std::int64_t{b})};
}

std::vector<ParamSpec> random_color() {
    return {P::uniform_int("color_r", 0, 255), P::uniform_int("color_g", 0, 255), P::uniform_int("color_b", 0, 255)};
}

std::vector<ParamSpec> join(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<ParamValue> asset_ids(std::string (*id)(int), int first, int count) {
    std::vector<ParamValue> out;
    for (int i = first; i < first + count; ++i) out.emplace_back(id(i));
    return out;
}

TransformClass make(int id, std::string name, OpKind kind, std::vector<ParamSpec> params = {}) {
    TransformClass c;
    c.class_id = id;
    c.sub_transform = name;
    c.class_name = std::move(name);
    c.kind = kind;
    c.params = std::move(params);
    return c;
}

TransformClass style(int id, const std::string& name, std::vector<ParamSpec> extra = {}) {
    TransformClass c = make(id, name, OpKind::external, join({P::constant("style", name)}, extra));
    c.external = true;
    return c;
}

const std::vector<std::string> kFineStyles = {"ghiasi_starry_night", "ghiasi_taligas", "ghiasi_bonfire",
                                              "ghiasi_pasta"};
const std::vector<std::string> kTrainStyles = {"ghiasi_starry_night", "ghiasi_taligas", "ghiasi_the_scream",
                                               "ghiasi_great_wave",   "johnson_stained_glass", "johnson_udnie"};
const std::vector<std::string> kHeldOutStyles = {"ghiasi_landscape_black_figure", "ghiasi_violon",
                                                 "ghiasi_bonfire",                "ghiasi_pasta",
                                                 "johnson_starry_night",          "johnson_candy"};

TaxonomyCatalog build_fine() {
    std::vector<TransformClass> c;
    int id = 0;
    auto add = [&](std::string name, OpKind kind, std::vector<ParamSpec> params = {}) {
        c.push_back(make(id++, std::move(name), kind, std::move(params)));
    };
    add("identity", OpKind::identity);
    add("hue_scale_shift_1", OpKind::hue, {P::constant("scale", -32.0), P::constant("offset", -4.0)});
    add("hue_scale_shift_2", OpKind::hue, {P::constant("scale", 1.0), P::constant("offset", 64.0)});
    add("saturate", OpKind::saturation, {P::constant("scale", 5.0), P::constant("offset", -4.0)});
    add("desaturate", OpKind::saturation, {P::constant("scale", 0.25), P::constant("offset", 32.0)});
    add("brighten", OpKind::lightness, {P::constant("scale", 1.0), P::constant("offset", 96.0)});
    add("darken", OpKind::lightness, {P::constant("scale", 1.0), P::uniform("offset", -128.0, -64.0)});
    add("gaussian_noise_low", OpKind::gaussian_noise, {P::constant("sigma", 0.05)});
    add("gaussian_noise_medium", OpKind::gaussian_noise, {P::constant("sigma", 0.15)});
    add("gaussian_blur_low", OpKind::gaussian_blur, {P::uniform("radius", 3.0, 5.0)});
    add("gaussian_blur_high", OpKind::gaussian_blur, {P::uniform("radius", 7.0, 9.0)});
    add("motion_blur_low", OpKind::motion_blur, {P::constant("length", std::int64_t{5}), P::uniform("angle", 0.0, kTwoPi)});
    add("motion_blur_medium", OpKind::motion_blur,
        {P::constant("length", std::int64_t{10}), P::uniform("angle", 0.0, kTwoPi)});
    add("corner_crop", OpKind::corner_crop);
    add("rotation", OpKind::rotate, {P::uniform("degrees", 90.0, 270.0)});
    add("jpeg_compression", OpKind::jpeg, {P::uniform_int("quality", 10, 15)});
    add("fs_dithering", OpKind::fs_dither, {P::constant("bits", std::int64_t{1})});
    add("posterize", OpKind::posterize, {P::constant("bits", std::int64_t{2})});
    add("pixelate", OpKind::pixelate, {P::constant("factor", 0.15)});
    add("solarize", OpKind::solarize, {P::constant("threshold", std::int64_t{192})});
    add("grayscale", OpKind::grayscale);
    add("vertical_line_shift", OpKind::line_shift,
        {P::constant("axis", std::string("columns")), P::constant("distance", std::int64_t{3})});
    add("grid_overlay", OpKind::grid_overlay, fixed_color(204, 255, 127));
    add("line_overlay", OpKind::line_overlay,
        join({P::constant("width", std::int64_t{4}), P::constant("gap", std::int64_t{20}), P::constant("angle", 0.0)},
             fixed_color(101, 0, 0)));
    add("icon_overlay", OpKind::icon_overlay,
        {P::constant("icon", icon_id(0)), P::constant("opacity", std::int64_t{32}), P::constant("ratio", 10.0)});
    add("text_overlay", OpKind::text_overlay, join({P::constant("text", text_page_id(0))}, fixed_color(25, 25, 25)));
    add("line_halftoning", OpKind::halftone,
        {P::constant("wave", std::string("sine")), P::constant("line_width", std::int64_t{1}),
         P::constant("max_amp", std::int64_t{5})});
    for (const auto& s : kFineStyles) {
        TransformClass t = style(id++, s);
        t.class_name = t.sub_transform = "style_" + s.substr(s.find('_') + 1);
        c.push_back(std::move(t));
    }
    std::vector<std::string> labels;
    for (const auto& e : c) labels.push_back(e.class_name);
    return TaxonomyCatalog(Task::fine, std::nullopt, std::move(labels), std::move(c));
}

enum Coarse {
    kIdentity,
    kIconOverlay,
    kLineHalftoning,
    kFiltering,
    kNoise,
    kImageFusing,
    kQuantizing,
    kStaticOverlay,
    kStyleTransfer,
    kWarping
};

const std::vector<std::string> kCoarseLabels = {"identity",     "icon_overlay", "line_halftoning", "filtering",
                                                "noise",        "image_fusing", "quantizing",      "static_overlay",
                                                "style_transfer", "warping"};

TaxonomyCatalog build_coarse(Split split) {
    const bool test = split == Split::test;
    std::vector<TransformClass> c;
    auto add = [&](int label, std::string sub, OpKind kind, std::vector<ParamSpec> params = {}, bool held = false) {
        if (held && !test) return;
        TransformClass t = make(label, kCoarseLabels[static_cast<std::size_t>(label)], kind, std::move(params));
        t.sub_transform = std::move(sub);
        t.held_out = held;
        c.push_back(std::move(t));
    };
    auto pick = [&](double train_v, double test_v) { return test ? test_v : train_v; };
    auto pick_i = [&](std::int64_t train_v, std::int64_t test_v) { return test ? test_v : train_v; };

    add(kIdentity, "identity", OpKind::identity);

    add(kIconOverlay, "icon_overlay", OpKind::icon_overlay,
        {P::choice("icon", asset_ids(icon_id, 0, test ? 10 : 5)), P::uniform_int("opacity", 64, pick_i(128, 144)),
         P::uniform("ratio", pick(8, 5), pick(12, 15))});

    std::vector<ParamValue> waves = {std::string("sine"), std::string("triangle")};
    if (test) waves.insert(waves.end(), {std::string("sawtooth"), std::string("square")});
    add(kLineHalftoning, "line_halftoning", OpKind::halftone,
        {P::choice("wave", waves), P::uniform_int("line_width", 1, 2), P::uniform_int("max_amp", pick_i(5, 4), 7)});

    add(kFiltering, "gaussian_blur", OpKind::gaussian_blur, {P::uniform("radius", pick(3, 2), pick(6, 9))});
    add(kFiltering, "motion_blur", OpKind::motion_blur,
        {P::uniform_int("length", pick_i(18, 15), pick_i(27, 35)), P::uniform("angle", 0.0, kTwoPi)});
    add(kFiltering, "pixelate", OpKind::pixelate, {P::uniform("factor", pick(0.25, 0.125), 0.5)});
    add(kFiltering, "blurry_background", OpKind::blurry_background,
        {P::uniform("sw", pick(1.0, 0.7), pick(1.8, 2.0)), P::uniform("sh", pick(1.0, 0.7), pick(1.8, 2.0)),
         P::uniform("radius", 20.0, pick(40, 50))});
    add(kFiltering, "line_shift", OpKind::line_shift,
        {P::choice("axis", {std::string("rows"), std::string("columns")}), P::uniform_int("distance", 2, 8)}, true);

    add(kNoise, "gaussian_noise", OpKind::gaussian_noise, {P::uniform("sigma", 0.1, pick(0.5, 0.7))});
    add(kNoise, "impulse_noise", OpKind::impulse_noise, {P::uniform("p", pick(0.1, 0.05), pick(0.3, 0.4))});
    add(kNoise, "random_dither", OpKind::random_dither);
    add(kNoise, "ordered_dither", OpKind::ordered_dither);
    add(kNoise, "fs_dither", OpKind::fs_dither, {P::uniform_int("bits", 1, 2)}, true);

    const int n_distractions = test ? 11 : 5;
    add(kImageFusing, "image_overlay", OpKind::image_overlay,
        {P::choice("image", asset_ids(distraction_id, 0, n_distractions)),
         P::uniform("frac", pick(0.5, 0.4), pick(0.7, 0.8)), P::uniform_int("opacity", 64, 128)});
    add(kImageFusing, "fusing", OpKind::fuse_background,
        {P::choice("image", asset_ids(distraction_id, 0, n_distractions)),
         P::uniform("frac", pick(0.6, 0.4), pick(0.8, 0.9)), P::uniform_int("opacity", 128, 196)});

    add(kQuantizing, "quantize_colors", OpKind::quantize_colors, {P::uniform_int("k", pick_i(16, 8), pick_i(64, 128))});
    add(kQuantizing, "invert", OpKind::invert);
    add(kQuantizing, "solarize", OpKind::solarize, {P::uniform_int("threshold", pick_i(96, 64), pick_i(192, 224))});
    add(kQuantizing, "hsl_to_rgb", OpKind::hsl_as_rgb);
    add(kQuantizing, "grayscale", OpKind::grayscale, {}, true);
    add(kQuantizing, "hue_shift_1", OpKind::hue, {P::constant("scale", 1.0), P::uniform("offset", 60.0, 300.0)}, true);
    add(kQuantizing, "hue_shift_2", OpKind::hue, {P::signed_uniform("scale", 8.0, 32.0), P::uniform("offset", 0.0, 360.0)},
        true);

    add(kStaticOverlay, "line_overlay", OpKind::line_overlay,
        join({P::uniform_int("width", pick_i(5, 3), pick_i(7, 10)), P::uniform_int("gap", pick_i(18, 15), pick_i(24, 30)),
              P::uniform("angle", 0.0, std::numbers::pi)},
             random_color()));
    add(kStaticOverlay, "text_overlay", OpKind::text_overlay,
        join({P::choice("text", asset_ids(text_page_id, 0, test ? 10 : 5))}, random_color()));
    add(kStaticOverlay, "grid_overlay", OpKind::grid_overlay, random_color());

    auto add_style = [&](const std::string& name, bool held, std::vector<ParamSpec> extra = {}) {
        if (held && !test) return;
        TransformClass t = style(kStyleTransfer, name, std::move(extra));
        t.class_name = kCoarseLabels[kStyleTransfer];
        t.held_out = held;
        c.push_back(std::move(t));
    };
    for (const auto& s : kTrainStyles) add_style(s, false);
    for (const auto& s : kHeldOutStyles) add_style(s, true);
    add_style("deep_dream", true,
              {P::uniform_int("iterations", 7, 12), P::uniform("learning_rate", 0.05, 0.08),
               P::uniform_int("octaves", 6, 12), P::uniform("octave_scale", 1.5, 2.0)});

    add(kWarping, "rotation_90", OpKind::rotate, {P::constant("degrees", 90.0)});
    add(kWarping, "rotation_180", OpKind::rotate, {P::constant("degrees", 180.0)}, true);
    add(kWarping, "rotation_270", OpKind::rotate, {P::constant("degrees", 270.0)}, true);
    add(kWarping, "vertical_flip", OpKind::flip_vertical);
    add(kWarping, "transpose_minor", OpKind::transpose, {P::constant("diagonal", std::string("minor"))});
    add(kWarping, "transpose_major", OpKind::transpose, {P::constant("diagonal", std::string("major"))}, true);

    return TaxonomyCatalog(Task::coarse, split, kCoarseLabels, std::move(c));
}

const char* dist_name(ParamSpec::Dist d) {
    switch (d) {
        case ParamSpec::Dist::constant: return "constant";
        case ParamSpec::Dist::uniform: return "uniform";
        case ParamSpec::Dist::uniform_int: return "uniform_int";
        case ParamSpec::Dist::choice: return "choice";
        case ParamSpec::Dist::signed_uniform: return "signed_uniform";
    }
    return "constant";
}

double as_real(const ParamValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw std::invalid_argument("parameter is not numeric");
}

}  // namespace

std::string to_string(Task t) { return t == Task::fine ? "fine" : "coarse"; }
std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

Task task_from_string(const std::string& s) {
    if (s == "fine") return Task::fine;
    if (s == "coarse") return Task::coarse;
    throw std::invalid_argument("unknown task '" + s + "' (expected fine or coarse)");
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw std::invalid_argument("unknown split '" + s + "' (expected train or test)");
}

std::string to_string(OpKind k) { return kOpNames[static_cast<std::size_t>(k)]; }

OpKind op_kind_from_string(const std::string& s) {
    for (std::size_t i = 0; i < std::size(kOpNames); ++i)
        if (s == kOpNames[i]) return static_cast<OpKind>(i);
    throw std::invalid_argument("unknown transform kind '" + s + "'");
}

ParamSpec ParamSpec::constant(std::string name, ParamValue v) {
    return {std::move(name), Dist::constant, 0.0, 0.0, {std::move(v)}};
}
ParamSpec ParamSpec::uniform(std::string name, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("ParamSpec: lo > hi");
    return {std::move(name), Dist::uniform, lo, hi, {}};
}
ParamSpec ParamSpec::uniform_int(std::string name, std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("ParamSpec: lo > hi");
    return {std::move(name), Dist::uniform_int, static_cast<double>(lo), static_cast<double>(hi), {}};
}
ParamSpec ParamSpec::choice(std::string name, std::vector<ParamValue> values) {
    if (values.empty()) throw std::invalid_argument("ParamSpec: empty choice list");
    return {std::move(name), Dist::choice, 0.0, 0.0, std::move(values)};
}
ParamSpec ParamSpec::signed_uniform(std::string name, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("ParamSpec: lo > hi");
    return {std::move(name), Dist::signed_uniform, lo, hi, {}};
}

bool ParamSpec::contains(const ParamValue& v) const {
    switch (dist) {
        case Dist::constant:
            return v == values.front();
        case Dist::choice:
            return std::find(values.begin(), values.end(), v) != values.end();
        case Dist::uniform: {
            const auto* d = std::get_if<double>(&v);
            return d && *d >= lo && *d <= hi;
        }
        case Dist::uniform_int: {
            const auto* i = std::get_if<std::int64_t>(&v);
            return i && *i >= lo && *i <= hi;
        }
        case Dist::signed_uniform: {
            const auto* d = std::get_if<double>(&v);
            return d && std::abs(*d) >= lo && std::abs(*d) <= hi;
        }
    }
    return false;
}

const ParamValue& TransformInstance::param(const std::string& name) const {
    for (const auto& [n, v] : params)
        if (n == name) return v;
    throw std::invalid_argument("transform '" + sub_transform + "' has no parameter '" + name + "'");
}

double TransformInstance::real(const std::string& name) const { return as_real(param(name)); }

std::int64_t TransformInstance::integer(const std::string& name) const {
    const ParamValue& v = param(name);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw std::invalid_argument("parameter '" + name + "' is not an integer");
}

const std::string& TransformInstance::text(const std::string& name) const {
    const ParamValue& v = param(name);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw std::invalid_argument("parameter '" + name + "' is not a string");
}

TaxonomyCatalog::TaxonomyCatalog(Task task, std::optional<Split> split, std::vector<std::string> labels,
                                 std::vector<TransformClass> entries)
    : task_(task), split_(split), labels_(std::move(labels)), entries_(std::move(entries)) {
    if (labels_.empty() || labels_.front() != "identity") throw std::logic_error("catalog: label 0 must be identity");
    for (const auto& e : entries_) {
        if (e.class_id < 0 || e.class_id >= label_count()) throw std::logic_error("catalog: class id out of range");
        if (e.held_out && split_ != Split::test) throw std::logic_error("catalog: held-out entry outside test view");
        if (e.external != (e.kind == OpKind::external)) throw std::logic_error("catalog: external flag mismatch");
    }
}

std::vector<const TransformClass*> TaxonomyCatalog::entries_for_label(int class_id) const {
    std::vector<const TransformClass*> out;
    for (const auto& e : entries_)
        if (e.class_id == class_id) out.push_back(&e);
    return out;
}

const TransformClass& TaxonomyCatalog::find(const std::string& sub_transform) const {
    for (const auto& e : entries_)
        if (e.sub_transform == sub_transform) return e;
    throw std::invalid_argument("unknown sub-transformation '" + sub_transform + "'");
}

std::size_t TaxonomyCatalog::held_out_count() const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.held_out; }));
}

std::string TaxonomyCatalog::to_json() const {
    using nlohmann::json;
    json j;
    j["task"] = to_string(task_);
    j["split"] = split_ ? json(to_string(*split_)) : json(nullptr);
    j["labels"] = labels_;
    json entries = json::array();
    for (const auto& e : entries_) {
        json params = json::array();
        for (const auto& p : e.params) {
            json jp{{"name", p.name}, {"dist", dist_name(p.dist)}};
            if (p.dist == ParamSpec::Dist::uniform || p.dist == ParamSpec::Dist::signed_uniform) {
                jp["lo"] = p.lo;
                jp["hi"] = p.hi;
            } else if (p.dist == ParamSpec::Dist::uniform_int) {
                jp["lo"] = static_cast<std::int64_t>(p.lo);
                jp["hi"] = static_cast<std::int64_t>(p.hi);
            } else {
                json vals = json::array();
                for (const auto& v : p.values) vals.push_back(detail::param_to_json(v));
                jp["values"] = vals;
            }
            params.push_back(jp);
        }
        entries.push_back({{"class_id", e.class_id},
                           {"class_name", e.class_name},
                           {"sub_transform", e.sub_transform},
                           {"kind", to_string(e.kind)},
                           {"held_out", e.held_out},
                           {"external", e.external},
                           {"params", params}});
    }
    j["entries"] = entries;
    return j.dump(2) + "\n";
}

std::string TaxonomyCatalog::hash() const { return sha256_hex(to_json()); }

const TaxonomyCatalog& fine_catalog() {
    static const TaxonomyCatalog cat = build_fine();
    return cat;
}

const TaxonomyCatalog& coarse_catalog(Split split) {
    static const TaxonomyCatalog train = build_coarse(Split::train);
    static const TaxonomyCatalog test = build_coarse(Split::test);
    return split == Split::train ? train : test;
}

const TaxonomyCatalog& catalog_for(Task task, Split split) {
    return task == Task::fine ? fine_catalog() : coarse_catalog(split);
}

ParamList sample_params(const TransformClass& cls, std::uint64_t seed) {
    DetRng rng(derive_seed(seed, {std::string("params")}));
    ParamList out;
    for (const auto& p : cls.params) {
        switch (p.dist) {
            case ParamSpec::Dist::constant:
                out.emplace_back(p.name, p.values.front());
                break;
            case ParamSpec::Dist::uniform:
                out.emplace_back(p.name, rng.uniform(p.lo, p.hi));
                break;
            case ParamSpec::Dist::uniform_int:
                out.emplace_back(p.name, rng.uniform_int(static_cast<std::int64_t>(p.lo), static_cast<std::int64_t>(p.hi)));
                break;
            case ParamSpec::Dist::choice: {
                const auto i = rng.uniform_int(0, static_cast<std::int64_t>(p.values.size()) - 1);
                out.emplace_back(p.name, p.values[static_cast<std::size_t>(i)]);
                break;
            }
            case ParamSpec::Dist::signed_uniform: {
                const double sign = rng.bernoulli(0.5) ? -1.0 : 1.0;
                out.emplace_back(p.name, sign * rng.uniform(p.lo, p.hi));
                break;
            }
        }
    }
    return out;
}

TransformInstance sample_instance(const TransformClass& cls, std::uint64_t seed) {
    if (cls.external)
        throw std::invalid_argument("'" + cls.sub_transform + "' is produced externally; use ingest-styles");
    return {cls.kind, cls.class_id, cls.class_name, cls.sub_transform, sample_params(cls, seed), seed};
}

}  // namespace xprobe
