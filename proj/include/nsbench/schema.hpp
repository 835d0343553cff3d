#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nsb {

enum class SchemaId { ClevrAttr, Clevr2d };

std::string to_string(SchemaId id);
SchemaId schema_id_from_string(std::string_view s);

// Ordered concept/value vocabulary. Value order is the canonical index used
// for categorical score vectors and bag-of-properties layout.
class AttributeSchema {
public:
    static const AttributeSchema& clevr_attr();
    static const AttributeSchema& clevr_2d();
    static const AttributeSchema& by_id(SchemaId id);

    SchemaId id() const { return id_; }
    int position_dims() const { return position_dims_; }
    int k_max() const { return k_max_; }
    int depth_axis() const { return position_dims_ == 2 ? 1 : 2; }

    int num_concepts() const { return static_cast<int>(concepts_.size()); }
    const std::vector<std::string>& concepts() const { return concepts_; }
    const std::string& concept_name(int c) const { return concepts_[c]; }
    const std::vector<std::string>& domain(int c) const { return domains_[c]; }
    int domain_size(int c) const { return static_cast<int>(domains_[c].size()); }

    // -1 when absent
    int concept_index(std::string_view name) const;
    int value_index(int concept_idx, std::string_view value) const;

private:
    AttributeSchema(SchemaId id, std::vector<std::string> concepts,
                    std::vector<std::vector<std::string>> domains, int position_dims, int k_max);

    SchemaId id_;
    std::vector<std::string> concepts_;
    std::vector<std::vector<std::string>> domains_;
    int position_dims_;
    int k_max_;
};

inline constexpr const char* kRelationLeftOf = "left_of";
inline constexpr const char* kRelationFrontOf = "front_of";

} // namespace nsb
