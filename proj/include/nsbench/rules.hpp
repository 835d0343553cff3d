#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nsbench/scene.hpp"

namespace nsb {

// One attribute constraint, e.g. color=blue.
struct Literal {
    std::string concept_name;
    std::string value;
    auto operator<=>(const Literal&) const = default;
};

using Clause = std::vector<Literal>; // conjunction over one object

struct ExistentialRule {
    Clause literals;
};
struct ConjunctiveRule {
    std::vector<Clause> clauses; // AND of existentials
};
struct DisjunctiveRule {
    std::vector<Clause> clauses; // OR of existentials
};
struct CardinalityRule {
    Clause literals;
    int exact_count = 0;
};
struct UniversalRule {
    Clause antecedent;
    Clause consequent;
};
struct RelationalRule {
    Clause clause_a;
    std::string relation; // left_of | front_of
    Clause clause_b;
};

struct RuleSpec {
    std::variant<ExistentialRule, ConjunctiveRule, DisjunctiveRule, CardinalityRule, UniversalRule,
                 RelationalRule>
        node;
    std::string name; // optional display name

    void validate(const AttributeSchema& schema) const;
};

// Textual rule expressions, e.g.
//   exists(color=blue & shape=sphere) and exists(color=yellow & shape=cube)
//   count(material=metal) == 2
//   forall(shape=sphere -> color=blue)
//   exists2(A: color=blue & shape=sphere, front_of, B: color=yellow & shape=cube)
// Parse errors carry the character position.
RuleSpec parse_rule(const std::string& text);
std::string rule_to_string(const RuleSpec& rule);

bool evaluate_rule(const RuleSpec& rule, const SymbolicScene& scene,
                   const AttributeSchema& schema);

// Fixed-width count vector: one counter per attribute value, then one per
// within-object value pair from distinct concepts, in canonical schema order.
int bag_of_properties_width(const AttributeSchema& schema);
std::vector<int> bag_of_properties(const SymbolicScene& scene, const AttributeSchema& schema);
std::vector<std::string> bag_of_properties_feature_names(const AttributeSchema& schema);

} // namespace nsb
