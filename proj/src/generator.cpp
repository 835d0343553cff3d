#include "nsbench/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "nsbench/error.hpp"
#include "nsbench/rng.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

namespace nsb {

using nlohmann::json;

namespace {

// standard CLEVR palette
const std::array<std::array<std::uint8_t, 3>, 8> kPalette = {{
    {87, 87, 87},   // gray
    {173, 35, 35},  // red
    {42, 75, 215},  // blue
    {29, 105, 20},  // green
    {129, 74, 25},  // brown
    {129, 38, 192}, // purple
    {41, 208, 208}, // cyan
    {255, 238, 51}, // yellow
}};

constexpr int kMaxPlacementAttempts = 1000;

} // namespace

const std::array<std::uint8_t, 3>& color_rgb(int color_index) {
    return kPalette[static_cast<std::size_t>(color_index)];
}

GenConfig GenConfig::defaults(SchemaId schema_id, std::uint64_t base_seed) {
    GenConfig cfg;
    cfg.schema_id = schema_id;
    cfg.base_seed = base_seed;
    if (schema_id == SchemaId::Clevr2d) {
        cfg.min_objects = 3;
        cfg.max_objects = 7;
        cfg.size_ranges = {{12.0, 18.0}, {24.0, 34.0}}; // small, large (px)
        cfg.margin = 2.0;
    } else {
        cfg.min_objects = 3;
        cfg.max_objects = 10;
        cfg.size_ranges = {{0.04, 0.06}, {0.08, 0.11}}; // normalized units
        cfg.margin = 0.02;
    }
    return cfg;
}

void GenConfig::validate() const {
    const auto& sch = AttributeSchema::by_id(schema_id);
    if (min_objects < 1 || min_objects > max_objects || max_objects > sch.k_max()) {
        throw Error("INVALID_CONFIG", "object count bounds out of range");
    }
    const int size_concept = sch.concept_index("size");
    if (static_cast<int>(size_ranges.size()) != sch.domain_size(size_concept)) {
        throw Error("INVALID_CONFIG", "size_ranges must cover the size domain");
    }
    if (size_ranges[1].min_radius <= size_ranges[0].max_radius) {
        throw Error("INVALID_CONFIG", "size ranges must be disjoint (large min > small max)");
    }
    for (const auto& r : size_ranges) {
        if (!(r.min_radius > 0.0) || !(r.max_radius >= r.min_radius)) {
            throw Error("INVALID_CONFIG", "bad size range");
        }
    }
}

namespace {

// Radius in generator units, re-derived deterministically from the per-object
// RNG substream so that scenes need not persist it.
double sample_radius(const GenConfig& cfg, int size_value, Rng& rng) {
    const auto& range = cfg.size_ranges[static_cast<std::size_t>(size_value)];
    return rng.uniform(range.min_radius, range.max_radius);
}

struct Placement {
    Position position; // normalized
    double radius = 0.0; // generator units
};

} // namespace

namespace {

Scene generate_scene_impl(const GenConfig& config, std::int64_t scene_index,
                          std::vector<double>* radii_out) {
    config.validate();
    const auto& sch = AttributeSchema::by_id(config.schema_id);
    Rng rng(hash_combine(config.base_seed, static_cast<std::uint64_t>(scene_index)));

    Scene scene;
    scene.schema_id = config.schema_id;
    scene.scene_id = scene_index;
    scene.rng_seed_used = hash_combine(config.base_seed, static_cast<std::uint64_t>(scene_index));

    const int n = rng.uniform_int(config.min_objects, config.max_objects);
    const int size_concept = sch.concept_index("size");
    const bool is_2d = config.schema_id == SchemaId::Clevr2d;
    const double w = static_cast<double>(config.canvas_width);
    const double h = static_cast<double>(config.canvas_height);

    std::vector<Placement> placed;
    for (int i = 0; i < n; ++i) {
        SceneObject obj;
        obj.id = i;
        obj.attributes.resize(sch.num_concepts());
        for (int c = 0; c < sch.num_concepts(); ++c) {
            obj.attributes[c] = static_cast<int>(rng.uniform_int(
                static_cast<std::uint64_t>(sch.domain_size(c))));
        }
        const double radius = sample_radius(config, obj.attributes[size_concept], rng);

        bool ok = false;
        for (int attempt = 0; attempt < kMaxPlacementAttempts && !ok; ++attempt) {
            Placement cand;
            cand.radius = radius;
            if (is_2d) {
                // keep the bounding circle inside the canvas
                const double px = rng.uniform(radius, w - radius);
                const double py = rng.uniform(radius, h - radius);
                cand.position = {px / w, py / h};
            } else {
                cand.position.resize(sch.position_dims());
                for (int d = 0; d < sch.position_dims(); ++d) {
                    cand.position[d] = rng.uniform(radius, 1.0 - radius);
                }
            }
            ok = true;
            for (const auto& other : placed) {
                double dist2 = 0.0;
                for (std::size_t d = 0; d < cand.position.size(); ++d) {
                    double delta = cand.position[d] - other.position[d];
                    if (is_2d) delta *= (d == 0 ? w : h); // pixel distance for pixel radii
                    dist2 += delta * delta;
                }
                const double limit = cand.radius + other.radius + config.margin;
                if (dist2 <= limit * limit) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                obj.position = cand.position;
                placed.push_back(cand);
            }
        }
        if (!ok) {
            throw Error("PLACEMENT_EXHAUSTED",
                        "could not place object " + std::to_string(i) + " in scene " +
                            std::to_string(scene_index));
        }
        if (radii_out) radii_out->push_back(placed.back().radius);
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

} // namespace

Scene generate_scene(const GenConfig& config, std::int64_t scene_index) {
    return generate_scene_impl(config, scene_index, nullptr);
}

double object_radius(const Scene& scene, const GenConfig& config, int object_index) {
    if (object_index < 0 || object_index >= static_cast<int>(scene.objects.size())) {
        throw Error("INVALID_ARGUMENT", "object index out of range");
    }
    // regenerate deterministically; radii are not persisted on the scene
    std::vector<double> radii;
    (void)generate_scene_impl(config, scene.scene_id, &radii);
    return radii[static_cast<std::size_t>(object_index)];
}

namespace {

// Flat-top regular polygon vertices, circumradius r, pixel center (cx, cy).
std::vector<std::array<double, 2>> polygon_vertices(int sides, double cx, double cy, double r) {
    std::vector<std::array<double, 2>> v(static_cast<std::size_t>(sides));
    // start angle chosen so the top edge is horizontal
    const double start = -M_PI / 2.0 + M_PI / sides;
    for (int i = 0; i < sides; ++i) {
        const double a = start + 2.0 * M_PI * i / sides;
        v[static_cast<std::size_t>(i)] = {cx + r * std::cos(a), cy + r * std::sin(a)};
    }
    return v;
}

bool point_in_convex_polygon(const std::vector<std::array<double, 2>>& poly, double x, double y) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        const double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
        if (cross < 0.0) return false;
    }
    return true;
}

} // namespace

Image render_scene(Scene& scene, const GenConfig& config) {
    if (scene.schema_id != SchemaId::Clevr2d) {
        throw Error("SCHEMA_MISMATCH", "render_scene requires a CLEVR_2D scene");
    }
    const auto& sch = scene.schema();
    Image img;
    img.width = config.canvas_width;
    img.height = config.canvas_height;
    img.rgb.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = config.background_gray[0];
        img.rgb[i + 1] = config.background_gray[1];
        img.rgb[i + 2] = config.background_gray[2];
    }

    const int shape_concept = sch.concept_index("shape");
    const int color_concept = sch.concept_index("color");

    std::vector<double> radii;
    (void)generate_scene_impl(config, scene.scene_id, &radii);

    for (int oi = 0; oi < static_cast<int>(scene.objects.size()); ++oi) {
        auto& obj = scene.objects[static_cast<std::size_t>(oi)];
        const double cx = obj.position[0] * img.width;
        const double cy = obj.position[1] * img.height;
        const double r = radii[static_cast<std::size_t>(oi)];
        const auto& rgb = color_rgb(obj.attributes[color_concept]);
        const std::string& shape = sch.domain(shape_concept)[obj.attributes[shape_concept]];

        std::vector<std::array<double, 2>> poly;
        double half_w = r, half_h = r;
        if (shape == "square") {
            half_w = half_h = r / std::sqrt(2.0);
        } else if (shape == "rectangle") {
            half_w = 0.85 * r;
            half_h = 0.5 * r;
        } else if (shape == "triangle") {
            poly = polygon_vertices(3, cx, cy, r);
        } else if (shape == "hexagon") {
            poly = polygon_vertices(6, cx, cy, r);
        } else if (shape == "octagon") {
            poly = polygon_vertices(8, cx, cy, r);
        }

        const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
        const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + r)));
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
        const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + r)));

        int bx0 = img.width, by0 = img.height, bx1 = -1, by1 = -1;
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                bool inside = false;
                if (shape == "circle") {
                    inside = (px - cx) * (px - cx) + (py - cy) * (py - cy) <= r * r;
                } else if (shape == "square" || shape == "rectangle") {
                    inside = std::abs(px - cx) <= half_w && std::abs(py - cy) <= half_h;
                } else {
                    inside = point_in_convex_polygon(poly, px, py);
                }
                if (!inside) continue;
                const std::size_t i = 3 * (static_cast<std::size_t>(y) * img.width + x);
                img.rgb[i] = rgb[0];
                img.rgb[i + 1] = rgb[1];
                img.rgb[i + 2] = rgb[2];
                bx0 = std::min(bx0, x);
                by0 = std::min(by0, y);
                bx1 = std::max(bx1, x);
                by1 = std::max(by1, y);
            }
        }
        if (bx1 >= bx0) {
            obj.bbox = BBox{static_cast<double>(bx0), static_cast<double>(by0),
                            static_cast<double>(bx1 + 1), static_cast<double>(by1 + 1)};
        }
    }
    return img;
}

// ---------------------------------------------------------------------------
// PNG encoding (8-bit RGB, no alpha) via zlib

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const auto crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

} // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
    // filter byte 0 per scanline
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(image.height) * (image.width * 3 + 1));
    for (int y = 0; y < image.height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = image.rgb.data() + static_cast<std::size_t>(y) * image.width * 3;
        raw.insert(raw.end(), row, row + image.width * 3);
    }
    uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> comp(comp_size);
    if (compress2(comp.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
        throw Error("PNG_ENCODE", "zlib compression failed");
    }
    comp.resize(comp_size);

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(image.width));
    put_u32(ihdr, static_cast<std::uint32_t>(image.height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // color type: truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", comp);
    put_chunk(out, "IEND", {});
    return out;
}

// ---------------------------------------------------------------------------
// Dataset persistence

std::string gen_config_to_json(const GenConfig& config) {
    json ranges = json::array();
    for (const auto& r : config.size_ranges) ranges.push_back({r.min_radius, r.max_radius});
    json doc = {{"schema", to_string(config.schema_id)},
                {"min_objects", config.min_objects},
                {"max_objects", config.max_objects},
                {"canvas_px", {config.canvas_width, config.canvas_height}},
                {"size_ranges", ranges},
                {"margin", config.margin},
                {"background_gray", config.background_gray},
                {"base_seed", config.base_seed}};
    return doc.dump(2);
}

GenConfig gen_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("PARSE_ERROR", e.what());
    }
    try {
        GenConfig cfg = GenConfig::defaults(schema_id_from_string(doc.at("schema").get<std::string>()),
                                            doc.at("base_seed").get<std::uint64_t>());
        cfg.min_objects = doc.at("min_objects").get<int>();
        cfg.max_objects = doc.at("max_objects").get<int>();
        cfg.canvas_width = doc.at("canvas_px")[0].get<int>();
        cfg.canvas_height = doc.at("canvas_px")[1].get<int>();
        cfg.margin = doc.at("margin").get<double>();
        cfg.background_gray = doc.at("background_gray").get<std::array<std::uint8_t, 3>>();
        cfg.size_ranges.clear();
        for (const auto& r : doc.at("size_ranges")) {
            cfg.size_ranges.push_back({r[0].get<double>(), r[1].get<double>()});
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw Error("PARSE_ERROR", e.what());
    }
}

namespace {

std::string scene_file_name(std::int64_t id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%06lld", static_cast<long long>(id));
    return buf;
}

void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IO_ERROR", "cannot open for writing: " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw Error("IO_ERROR", "write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IO_ERROR", "cannot open: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr int kManifestVersion = 1;

} // namespace

DatasetManifest write_dataset(const std::vector<Scene>& scenes, const GenConfig& config,
                              const std::filesystem::path& directory, bool render) {
    namespace fs = std::filesystem;
    fs::create_directories(directory / "scenes");
    const bool do_render = render && config.schema_id == SchemaId::Clevr2d;
    if (do_render) fs::create_directories(directory / "images");

    DatasetManifest manifest;
    manifest.config = config;
    std::vector<Scene> rendered = scenes; // bboxes are filled during rendering
    for (auto& scene : rendered) {
        if (do_render) {
            const Image img = render_scene(scene, config);
            const auto png = encode_png(img);
            write_file(directory / "images" / (scene_file_name(scene.scene_id) + ".png"),
                       png.data(), png.size());
        }
        const std::string text = scene_to_json(scene);
        write_file(directory / "scenes" / (scene_file_name(scene.scene_id) + ".json"), text.data(),
                   text.size());
        manifest.scene_ids.push_back(scene.scene_id);
    }
    json doc = {{"version", kManifestVersion},
                {"config", json::parse(gen_config_to_json(config))},
                {"scene_ids", manifest.scene_ids}};
    const std::string text = doc.dump(2);
    write_file(directory / "manifest.json", text.data(), text.size());
    return manifest;
}

GenConfig read_manifest_config(const std::filesystem::path& directory) {
    json doc;
    const auto path = directory / "manifest.json";
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error("PARSE_ERROR", path.string() + ": " + e.what());
    }
    if (doc.value("version", -1) != kManifestVersion) {
        throw Error("SCHEMA_VERSION_MISMATCH", path.string());
    }
    return gen_config_from_json(doc.at("config").dump());
}

std::vector<Scene> read_dataset(const std::filesystem::path& directory) {
    const auto path = directory / "manifest.json";
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error("PARSE_ERROR", path.string() + ": " + e.what());
    }
    if (doc.value("version", -1) != kManifestVersion) {
        throw Error("SCHEMA_VERSION_MISMATCH", path.string());
    }
    std::vector<Scene> scenes;
    for (const auto& id : doc.at("scene_ids")) {
        const auto file =
            directory / "scenes" / (scene_file_name(id.get<std::int64_t>()) + ".json");
        try {
            scenes.push_back(scene_from_json(read_file(file)));
        } catch (const Error& e) {
            throw Error(e.code(), file.string() + ": " + e.what());
        }
    }
    return scenes;
}

} // namespace nsb
