#include "nsbench/schema.hpp"

#include "nsbench/error.hpp"

namespace nsb {

std::string to_string(SchemaId id) {
    return id == SchemaId::ClevrAttr ? "CLEVR_ATTR" : "CLEVR_2D";
}

SchemaId schema_id_from_string(std::string_view s) {
    if (s == "CLEVR_ATTR" || s == "clevr_attr") return SchemaId::ClevrAttr;
    if (s == "CLEVR_2D" || s == "clevr_2d") return SchemaId::Clevr2d;
    throw Error("UNKNOWN_SCHEMA", std::string(s));
}

namespace {
const std::vector<std::string> kColors = {"gray", "red",    "blue", "green",
                                          "brown", "purple", "cyan", "yellow"};
} // namespace

AttributeSchema::AttributeSchema(SchemaId id, std::vector<std::string> concepts,
                                 std::vector<std::vector<std::string>> domains, int position_dims,
                                 int k_max)
    : id_(id),
      concepts_(std::move(concepts)),
      domains_(std::move(domains)),
      position_dims_(position_dims),
      k_max_(k_max) {}

const AttributeSchema& AttributeSchema::clevr_attr() {
    static const AttributeSchema schema(
        SchemaId::ClevrAttr, {"shape", "color", "size", "material"},
        {{"cube", "sphere", "cylinder"}, kColors, {"small", "large"}, {"metal", "rubber"}},
        /*position_dims=*/3, /*k_max=*/10);
    return schema;
}

const AttributeSchema& AttributeSchema::clevr_2d() {
    static const AttributeSchema schema(
        SchemaId::Clevr2d, {"shape", "color", "size"},
        {{"circle", "square", "rectangle", "triangle", "hexagon", "octagon"},
         kColors,
         {"small", "large"}},
        /*position_dims=*/2, /*k_max=*/7);
    return schema;
}

const AttributeSchema& AttributeSchema::by_id(SchemaId id) {
    return id == SchemaId::ClevrAttr ? clevr_attr() : clevr_2d();
}

int AttributeSchema::concept_index(std::string_view name) const {
    for (int c = 0; c < num_concepts(); ++c) {
        if (concepts_[c] == name) return c;
    }
    return -1;
}

int AttributeSchema::value_index(int concept_idx, std::string_view value) const {
    const auto& dom = domains_[concept_idx];
    for (int v = 0; v < static_cast<int>(dom.size()); ++v) {
        if (dom[v] == value) return v;
    }
    return -1;
}

} // namespace nsb
