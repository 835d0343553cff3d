#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsbench/schema.hpp"

namespace nsb {

using Position = std::vector<double>; // length == schema position_dims, normalized [0,1]
using BBox = std::array<double, 4>;   // x_min, y_min, x_max, y_max in pixels

struct SceneObject {
    int id = 0;
    std::vector<int> attributes; // value index per schema concept
    Position position;
    std::optional<BBox> bbox; // only for rendered scenes
};

struct Scene {
    SchemaId schema_id = SchemaId::ClevrAttr;
    std::int64_t scene_id = 0;
    std::uint64_t rng_seed_used = 0;
    std::vector<SceneObject> objects;

    const AttributeSchema& schema() const { return AttributeSchema::by_id(schema_id); }
    // throws INVALID_SCENE on violated invariants
    void validate() const;
};

enum class SceneSource { GroundTruth, SimulatedVae };

std::string to_string(SceneSource s);
SceneSource scene_source_from_string(std::string_view s);

// Grounded fact. Attribute atoms carry a value; relational atoms carry object2.
struct Atom {
    std::string predicate;
    int subject = 0;
    std::string value;  // empty for relational atoms
    int object2 = -1;   // -1 for attribute atoms

    bool is_relation() const { return object2 >= 0; }
    auto operator<=>(const Atom&) const = default;
};

struct SymbolicScene {
    std::vector<Atom> atoms; // sorted, duplicate-free
    std::vector<int> active_object_ids;
    SceneSource source = SceneSource::GroundTruth;
    std::int64_t scene_id = 0;

    void normalize(); // sort + dedupe atoms and ids
    bool has_atom(const Atom& a) const;

    // Per-object attribute value indices, indexed by [object][concept]; -1 when
    // the atom is missing. Object order follows active_object_ids.
    std::vector<std::vector<int>> attribute_table(const AttributeSchema& schema) const;
};

// Strict-inequality spatial relations with an epsilon tie-break: coincident
// coordinates yield neither direction.
std::vector<Atom> derive_relations(const std::vector<Position>& coords, int depth_axis);
std::vector<Atom> derive_relations(const Scene& scene);

SymbolicScene symbolic_scene_from_ground_truth(const Scene& scene);

// A symbolic scene together with the (possibly noisy) coordinates of its
// active objects; what set-based and metric consumers need beyond the atoms.
struct GroundedScene {
    SymbolicScene sym;
    std::vector<Position> coords; // parallel to sym.active_object_ids
};

GroundedScene grounded_scene_from_ground_truth(const Scene& scene);

// JSON scene-graph serialization (stable field names)
std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
std::string symbolic_scene_to_json(const SymbolicScene& scene);
SymbolicScene symbolic_scene_from_json(const std::string& text);

} // namespace nsb
