#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nsbench/scene.hpp"

namespace nsb {

struct SizeRange {
    double min_radius = 0.0;
    double max_radius = 0.0;
};

// Generation parameters. Radii are pixels for CLEVR_2D and normalized scene
// units for CLEVR_ATTR; non-overlap margin follows the same unit.
struct GenConfig {
    SchemaId schema_id = SchemaId::Clevr2d;
    int min_objects = 3;
    int max_objects = 7;
    int canvas_width = 480;
    int canvas_height = 320;
    std::vector<SizeRange> size_ranges; // indexed by the schema's size domain
    double margin = 2.0;
    std::array<std::uint8_t, 3> background_gray = {40, 40, 40};
    std::uint64_t base_seed = 0;

    static GenConfig defaults(SchemaId schema_id, std::uint64_t base_seed);
    void validate() const;
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // row-major, 3 bytes per pixel

    std::array<std::uint8_t, 3> pixel(int x, int y) const {
        const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
};

// Deterministic in (config.base_seed, scene_index); throws PLACEMENT_EXHAUSTED
// when rejection sampling cannot place an object within 1000 attempts.
Scene generate_scene(const GenConfig& config, std::int64_t scene_index);

// CLEVR_2D only. Fills tight bboxes back onto the scene objects.
Image render_scene(Scene& scene, const GenConfig& config);

const std::array<std::uint8_t, 3>& color_rgb(int color_index);

// object radius in the generator's units, recovered from the config
double object_radius(const Scene& scene, const GenConfig& config, int object_index);

std::vector<std::uint8_t> encode_png(const Image& image);

struct DatasetManifest {
    GenConfig config;
    std::vector<std::int64_t> scene_ids;
};

// Layout: manifest.json, scenes/scene_%06d.json, images/scene_%06d.png
DatasetManifest write_dataset(const std::vector<Scene>& scenes, const GenConfig& config,
                              const std::filesystem::path& directory, bool render = true);
std::vector<Scene> read_dataset(const std::filesystem::path& directory);
GenConfig read_manifest_config(const std::filesystem::path& directory);

std::string gen_config_to_json(const GenConfig& config);
GenConfig gen_config_from_json(const std::string& text);

} // namespace nsb
