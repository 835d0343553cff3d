#include "nsbench/scene.hpp"

#include <algorithm>
#include <cmath>

#include "nsbench/error.hpp"

#include <nlohmann/json.hpp>

namespace nsb {

using nlohmann::json;

namespace {
constexpr double kRelationEps = 1e-9;
} // namespace

void Scene::validate() const {
    const auto& sch = schema();
    if (objects.empty() || static_cast<int>(objects.size()) > sch.k_max()) {
        throw Error("INVALID_SCENE", "object count out of range for schema");
    }
    for (int i = 0; i < static_cast<int>(objects.size()); ++i) {
        const auto& obj = objects[i];
        if (obj.id != i) throw Error("INVALID_SCENE", "object ids must be 0..n-1 consecutive");
        if (static_cast<int>(obj.attributes.size()) != sch.num_concepts()) {
            throw Error("INVALID_SCENE", "attribute count does not match schema");
        }
        for (int c = 0; c < sch.num_concepts(); ++c) {
            if (obj.attributes[c] < 0 || obj.attributes[c] >= sch.domain_size(c)) {
                throw Error("INVALID_SCENE", "attribute value outside domain");
            }
        }
        if (static_cast<int>(obj.position.size()) != sch.position_dims()) {
            throw Error("INVALID_SCENE", "position dimensionality mismatch");
        }
        if (obj.bbox) {
            const auto& b = *obj.bbox;
            if (!(b[0] < b[2]) || !(b[1] < b[3])) throw Error("INVALID_SCENE", "degenerate bbox");
        }
    }
}

std::string to_string(SceneSource s) {
    return s == SceneSource::GroundTruth ? "GROUND_TRUTH" : "SIMULATED_VAE";
}

SceneSource scene_source_from_string(std::string_view s) {
    if (s == "GROUND_TRUTH") return SceneSource::GroundTruth;
    if (s == "SIMULATED_VAE") return SceneSource::SimulatedVae;
    throw Error("UNKNOWN_SOURCE", std::string(s));
}

void SymbolicScene::normalize() {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    std::sort(active_object_ids.begin(), active_object_ids.end());
    active_object_ids.erase(std::unique(active_object_ids.begin(), active_object_ids.end()),
                            active_object_ids.end());
}

bool SymbolicScene::has_atom(const Atom& a) const {
    return std::binary_search(atoms.begin(), atoms.end(), a);
}

std::vector<std::vector<int>> SymbolicScene::attribute_table(const AttributeSchema& schema) const {
    std::vector<std::vector<int>> table(active_object_ids.size(),
                                        std::vector<int>(schema.num_concepts(), -1));
    // active ids are consecutive 0..n-1 in practice, but map defensively
    auto row_of = [&](int id) -> int {
        auto it = std::lower_bound(active_object_ids.begin(), active_object_ids.end(), id);
        if (it == active_object_ids.end() || *it != id) return -1;
        return static_cast<int>(it - active_object_ids.begin());
    };
    for (const auto& atom : atoms) {
        if (atom.is_relation()) continue;
        const int c = schema.concept_index(atom.predicate);
        if (c < 0) continue;
        const int row = row_of(atom.subject);
        if (row < 0) continue;
        table[row][c] = schema.value_index(c, atom.value);
    }
    return table;
}

std::vector<Atom> derive_relations(const std::vector<Position>& coords, int depth_axis) {
    std::vector<Atom> out;
    const int n = static_cast<int>(coords.size());
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            if (coords[a][0] + kRelationEps < coords[b][0]) {
                out.push_back({kRelationLeftOf, a, "", b});
            }
            if (coords[a][depth_axis] + kRelationEps < coords[b][depth_axis]) {
                out.push_back({kRelationFrontOf, a, "", b});
            }
        }
    }
    return out;
}

std::vector<Atom> derive_relations(const Scene& scene) {
    std::vector<Position> coords;
    coords.reserve(scene.objects.size());
    for (const auto& obj : scene.objects) coords.push_back(obj.position);
    return derive_relations(coords, scene.schema().depth_axis());
}

SymbolicScene symbolic_scene_from_ground_truth(const Scene& scene) {
    const auto& sch = scene.schema();
    SymbolicScene out;
    out.scene_id = scene.scene_id;
    out.source = SceneSource::GroundTruth;
    for (const auto& obj : scene.objects) {
        out.active_object_ids.push_back(obj.id);
        for (int c = 0; c < sch.num_concepts(); ++c) {
            out.atoms.push_back({sch.concept_name(c), obj.id, sch.domain(c)[obj.attributes[c]], -1});
        }
    }
    for (auto& rel : derive_relations(scene)) out.atoms.push_back(std::move(rel));
    out.normalize();
    return out;
}

GroundedScene grounded_scene_from_ground_truth(const Scene& scene) {
    GroundedScene out;
    out.sym = symbolic_scene_from_ground_truth(scene);
    for (const auto& obj : scene.objects) out.coords.push_back(obj.position);
    return out;
}

// ---------------------------------------------------------------------------
// JSON

std::string scene_to_json(const Scene& scene) {
    const auto& sch = scene.schema();
    json objs = json::array();
    for (const auto& obj : scene.objects) {
        json attrs = json::object();
        for (int c = 0; c < sch.num_concepts(); ++c) {
            attrs[sch.concept_name(c)] = sch.domain(c)[obj.attributes[c]];
        }
        json rec = {{"id", obj.id}, {"attributes", attrs}, {"position", obj.position}};
        if (obj.bbox) rec["bbox"] = *obj.bbox;
        objs.push_back(std::move(rec));
    }
    json doc = {{"scene_id", scene.scene_id},
                {"schema", to_string(scene.schema_id)},
                {"rng_seed_used", scene.rng_seed_used},
                {"objects", objs}};
    return doc.dump(2);
}

Scene scene_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("PARSE_ERROR", e.what());
    }
    try {
        Scene scene;
        scene.schema_id = schema_id_from_string(doc.at("schema").get<std::string>());
        scene.scene_id = doc.at("scene_id").get<std::int64_t>();
        scene.rng_seed_used = doc.value("rng_seed_used", std::uint64_t{0});
        const auto& sch = scene.schema();
        for (const auto& rec : doc.at("objects")) {
            SceneObject obj;
            obj.id = rec.at("id").get<int>();
            obj.attributes.assign(sch.num_concepts(), -1);
            for (const auto& [name, value] : rec.at("attributes").items()) {
                const int c = sch.concept_index(name);
                if (c < 0) throw Error("PARSE_ERROR", "unknown concept: " + name);
                obj.attributes[c] = sch.value_index(c, value.get<std::string>());
                if (obj.attributes[c] < 0) {
                    throw Error("PARSE_ERROR", "unknown value for " + name);
                }
            }
            obj.position = rec.at("position").get<Position>();
            if (rec.contains("bbox")) obj.bbox = rec.at("bbox").get<BBox>();
            scene.objects.push_back(std::move(obj));
        }
        scene.validate();
        return scene;
    } catch (const json::exception& e) {
        throw Error("PARSE_ERROR", e.what());
    }
}

std::string symbolic_scene_to_json(const SymbolicScene& scene) {
    json atoms = json::array();
    for (const auto& atom : scene.atoms) {
        json rec = {{"predicate", atom.predicate}, {"subject", atom.subject}};
        if (atom.is_relation()) {
            rec["object2"] = atom.object2;
        } else {
            rec["value"] = atom.value;
        }
        atoms.push_back(std::move(rec));
    }
    json doc = {{"scene_id", scene.scene_id},
                {"source", to_string(scene.source)},
                {"active_object_ids", scene.active_object_ids},
                {"atoms", atoms}};
    return doc.dump(2);
}

SymbolicScene symbolic_scene_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("PARSE_ERROR", e.what());
    }
    try {
        SymbolicScene scene;
        scene.scene_id = doc.at("scene_id").get<std::int64_t>();
        scene.source = scene_source_from_string(doc.at("source").get<std::string>());
        scene.active_object_ids = doc.at("active_object_ids").get<std::vector<int>>();
        for (const auto& rec : doc.at("atoms")) {
            Atom atom;
            atom.predicate = rec.at("predicate").get<std::string>();
            atom.subject = rec.at("subject").get<int>();
            atom.value = rec.value("value", "");
            atom.object2 = rec.value("object2", -1);
            scene.atoms.push_back(std::move(atom));
        }
        scene.normalize();
        return scene;
    } catch (const json::exception& e) {
        throw Error("PARSE_ERROR", e.what());
    }
}

} // namespace nsb
