#include "nsbench/rules.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "nsbench/error.hpp"

namespace nsb {

namespace {

void validate_clause(const Clause& clause, const AttributeSchema& schema) {
    if (clause.empty()) throw Error("PARSE_ERROR", "empty clause");
    for (const Literal& lit : clause) {
        const int c = schema.concept_index(lit.concept_name);
        if (c < 0) {
            throw Error("UNKNOWN_LITERAL", "unknown concept '" + lit.concept_name + "'");
        }
        if (schema.value_index(c, lit.value) < 0) {
            throw Error("UNKNOWN_LITERAL",
                        "unknown value '" + lit.value + "' for concept '" + lit.concept_name + "'");
        }
    }
}

// Per-literal (concept, value) index pair resolved against a schema.
struct CompiledLiteral {
    int concept_index;
    int value_index;
};

std::vector<CompiledLiteral> compile_clause(const Clause& clause, const AttributeSchema& schema) {
    validate_clause(clause, schema);
    std::vector<CompiledLiteral> out;
    out.reserve(clause.size());
    for (const Literal& lit : clause) {
        const int c = schema.concept_index(lit.concept_name);
        out.push_back({c, schema.value_index(c, lit.value)});
    }
    return out;
}

bool object_satisfies(const std::vector<int>& row, const std::vector<CompiledLiteral>& clause) {
    for (const CompiledLiteral& lit : clause) {
        if (row[static_cast<std::size_t>(lit.concept_index)] != lit.value_index) return false;
    }
    return true;
}

int count_satisfying(const std::vector<std::vector<int>>& table,
                     const std::vector<CompiledLiteral>& clause) {
    int n = 0;
    for (const auto& row : table) {
        if (object_satisfies(row, clause)) ++n;
    }
    return n;
}

std::string clause_to_string(const Clause& clause) {
    std::string out;
    for (std::size_t i = 0; i < clause.size(); ++i) {
        if (i > 0) out += " & ";
        out += clause[i].concept_name + "=" + clause[i].value;
    }
    return out;
}

// --- recursive-descent parser ------------------------------------------------

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    RuleSpec parse() {
        RuleSpec rule = parse_rule_body();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return rule;
    }

private:
    RuleSpec parse_rule_body() {
        skip_ws();
        const std::string head = peek_ident();
        if (head == "count") return {parse_count(), ""};
        if (head == "forall") return {parse_forall(), ""};
        if (head == "exists2") return {parse_exists2(), ""};
        if (head == "exists") return parse_exists_chain();
        fail("expected exists, exists2, count, or forall");
    }

    RuleSpec parse_exists_chain() {
        std::vector<Clause> clauses;
        clauses.push_back(parse_exists());
        std::string connective;
        while (true) {
            skip_ws();
            const std::size_t save = pos_;
            const std::string word = try_ident();
            if (word.empty()) break;
            if (word != "and" && word != "or") {
                pos_ = save;
                break;
            }
            if (connective.empty()) {
                connective = word;
            } else if (word != connective) {
                fail("cannot mix 'and' and 'or'");
            }
            clauses.push_back(parse_exists());
        }
        if (clauses.size() == 1) return {ExistentialRule{std::move(clauses[0])}, ""};
        if (connective == "and") return {ConjunctiveRule{std::move(clauses)}, ""};
        return {DisjunctiveRule{std::move(clauses)}, ""};
    }

    Clause parse_exists() {
        expect_ident("exists");
        expect('(');
        Clause clause = parse_clause();
        expect(')');
        return clause;
    }

    CardinalityRule parse_count() {
        expect_ident("count");
        expect('(');
        Clause clause = parse_clause();
        expect(')');
        expect('=');
        expect('=');
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected integer");
        return {std::move(clause), std::stoi(text_.substr(start, pos_ - start))};
    }

    UniversalRule parse_forall() {
        expect_ident("forall");
        expect('(');
        Clause antecedent = parse_clause();
        expect('-');
        expect('>');
        Clause consequent = parse_clause();
        expect(')');
        return {std::move(antecedent), std::move(consequent)};
    }

    RelationalRule parse_exists2() {
        expect_ident("exists2");
        expect('(');
        expect_ident("A");
        expect(':');
        Clause a = parse_clause();
        expect(',');
        const std::string relation = ident();
        expect(',');
        expect_ident("B");
        expect(':');
        Clause b = parse_clause();
        expect(')');
        return {std::move(a), relation, std::move(b)};
    }

    Clause parse_clause() {
        Clause clause;
        while (true) {
            const std::string name = ident();
            expect('=');
            clause.push_back({name, ident()});
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == '&') {
                ++pos_;
                continue;
            }
            break;
        }
        return clause;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string try_ident() {
        skip_ws();
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
            ++end;
        }
        std::string word = text_.substr(pos_, end - pos_);
        pos_ = end;
        return word;
    }

    std::string ident() {
        const std::string word = try_ident();
        if (word.empty()) fail("expected identifier");
        return word;
    }

    std::string peek_ident() {
        const std::size_t save = pos_;
        std::string word = try_ident();
        pos_ = save;
        return word;
    }

    void expect_ident(const std::string& word) {
        if (try_ident() != word) fail("expected '" + word + "'");
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error("PARSE_ERROR",
                    what + " at position " + std::to_string(pos_) + " in rule: " + text_);
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

} // namespace

void RuleSpec::validate(const AttributeSchema& schema) const {
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ExistentialRule>) {
                validate_clause(r.literals, schema);
            } else if constexpr (std::is_same_v<T, ConjunctiveRule> ||
                                 std::is_same_v<T, DisjunctiveRule>) {
                if (r.clauses.size() < 2) throw Error("PARSE_ERROR", "need at least two clauses");
                for (const Clause& c : r.clauses) validate_clause(c, schema);
            } else if constexpr (std::is_same_v<T, CardinalityRule>) {
                validate_clause(r.literals, schema);
                if (r.exact_count < 0) throw Error("PARSE_ERROR", "negative cardinality");
            } else if constexpr (std::is_same_v<T, UniversalRule>) {
                validate_clause(r.antecedent, schema);
                validate_clause(r.consequent, schema);
            } else {
                validate_clause(r.clause_a, schema);
                validate_clause(r.clause_b, schema);
                if (r.relation != kRelationLeftOf && r.relation != kRelationFrontOf) {
                    throw Error("UNKNOWN_LITERAL", "unknown relation '" + r.relation + "'");
                }
            }
        },
        node);
}

RuleSpec parse_rule(const std::string& text) { return Parser(text).parse(); }

std::string rule_to_string(const RuleSpec& rule) {
    return std::visit(
        [](const auto& r) -> std::string {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ExistentialRule>) {
                return "exists(" + clause_to_string(r.literals) + ")";
            } else if constexpr (std::is_same_v<T, ConjunctiveRule> ||
                                 std::is_same_v<T, DisjunctiveRule>) {
                const char* sep = std::is_same_v<T, ConjunctiveRule> ? " and " : " or ";
                std::string out;
                for (std::size_t i = 0; i < r.clauses.size(); ++i) {
                    if (i > 0) out += sep;
                    out += "exists(" + clause_to_string(r.clauses[i]) + ")";
                }
                return out;
            } else if constexpr (std::is_same_v<T, CardinalityRule>) {
                return "count(" + clause_to_string(r.literals) +
                       ") == " + std::to_string(r.exact_count);
            } else if constexpr (std::is_same_v<T, UniversalRule>) {
                return "forall(" + clause_to_string(r.antecedent) + " -> " +
                       clause_to_string(r.consequent) + ")";
            } else {
                return "exists2(A: " + clause_to_string(r.clause_a) + ", " + r.relation +
                       ", B: " + clause_to_string(r.clause_b) + ")";
            }
        },
        rule.node);
}

bool evaluate_rule(const RuleSpec& rule, const SymbolicScene& scene,
                   const AttributeSchema& schema) {
    const auto table = scene.attribute_table(schema);
    return std::visit(
        [&](const auto& r) -> bool {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ExistentialRule>) {
                return count_satisfying(table, compile_clause(r.literals, schema)) > 0;
            } else if constexpr (std::is_same_v<T, ConjunctiveRule>) {
                for (const Clause& c : r.clauses) {
                    if (count_satisfying(table, compile_clause(c, schema)) == 0) return false;
                }
                return true;
            } else if constexpr (std::is_same_v<T, DisjunctiveRule>) {
                for (const Clause& c : r.clauses) {
                    if (count_satisfying(table, compile_clause(c, schema)) > 0) return true;
                }
                return false;
            } else if constexpr (std::is_same_v<T, CardinalityRule>) {
                return count_satisfying(table, compile_clause(r.literals, schema)) ==
                       r.exact_count;
            } else if constexpr (std::is_same_v<T, UniversalRule>) {
                const auto ante = compile_clause(r.antecedent, schema);
                const auto cons = compile_clause(r.consequent, schema);
                for (const auto& row : table) {
                    if (object_satisfies(row, ante) && !object_satisfies(row, cons)) return false;
                }
                return true; // vacuously true with no antecedent witness
            } else {
                const auto ca = compile_clause(r.clause_a, schema);
                const auto cb = compile_clause(r.clause_b, schema);
                const auto& ids = scene.active_object_ids;
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    if (!object_satisfies(table[i], ca)) continue;
                    for (std::size_t j = 0; j < ids.size(); ++j) {
                        if (i == j || !object_satisfies(table[j], cb)) continue;
                        if (scene.has_atom({r.relation, ids[i], "", ids[j]})) return true;
                    }
                }
                return false;
            }
        },
        rule.node);
}

int bag_of_properties_width(const AttributeSchema& schema) {
    int width = 0;
    for (int c = 0; c < schema.num_concepts(); ++c) width += schema.domain_size(c);
    for (int c1 = 0; c1 < schema.num_concepts(); ++c1) {
        for (int c2 = c1 + 1; c2 < schema.num_concepts(); ++c2) {
            width += schema.domain_size(c1) * schema.domain_size(c2);
        }
    }
    return width;
}

std::vector<int> bag_of_properties(const SymbolicScene& scene, const AttributeSchema& schema) {
    const auto table = scene.attribute_table(schema);
    std::vector<int> out(static_cast<std::size_t>(bag_of_properties_width(schema)), 0);
    std::size_t base = 0;
    for (int c = 0; c < schema.num_concepts(); ++c) {
        for (const auto& row : table) {
            const int v = row[static_cast<std::size_t>(c)];
            if (v >= 0) ++out[base + static_cast<std::size_t>(v)];
        }
        base += static_cast<std::size_t>(schema.domain_size(c));
    }
    for (int c1 = 0; c1 < schema.num_concepts(); ++c1) {
        for (int c2 = c1 + 1; c2 < schema.num_concepts(); ++c2) {
            const int d2 = schema.domain_size(c2);
            for (const auto& row : table) {
                const int v1 = row[static_cast<std::size_t>(c1)];
                const int v2 = row[static_cast<std::size_t>(c2)];
                if (v1 >= 0 && v2 >= 0) ++out[base + static_cast<std::size_t>(v1 * d2 + v2)];
            }
            base += static_cast<std::size_t>(schema.domain_size(c1) * d2);
        }
    }
    return out;
}

std::vector<std::string> bag_of_properties_feature_names(const AttributeSchema& schema) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(bag_of_properties_width(schema)));
    for (int c = 0; c < schema.num_concepts(); ++c) {
        for (const std::string& v : schema.domain(c)) {
            names.push_back(schema.concept_name(c) + "=" + v);
        }
    }
    for (int c1 = 0; c1 < schema.num_concepts(); ++c1) {
        for (int c2 = c1 + 1; c2 < schema.num_concepts(); ++c2) {
            for (const std::string& v1 : schema.domain(c1)) {
                for (const std::string& v2 : schema.domain(c2)) {
                    names.push_back(schema.concept_name(c1) + "=" + v1 + "&" +
                                    schema.concept_name(c2) + "=" + v2);
                }
            }
        }
    }
    return names;
}

} // namespace nsb
