#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <map>

#include "nsbench/error.hpp"
#include "nsbench/reasoners.hpp"

#include "json.hpp"

namespace nsb {

namespace {

constexpr std::array<const char*, 2> kRelations = {kRelationLeftOf, kRelationFrontOf};

// Scene preprocessed for fast clause tests: attribute table plus relation
// index pairs, object ids remapped to 0..n-1.
struct Prepped {
    std::vector<std::vector<int>> table;
    std::array<std::vector<std::pair<int, int>>, 2> rels;
};

Prepped prep_scene(const GroundedScene& scene, const AttributeSchema& schema) {
    Prepped p;
    p.table = scene.sym.attribute_table(schema);
    std::map<int, int> id_to_index;
    for (std::size_t i = 0; i < scene.sym.active_object_ids.size(); ++i) {
        id_to_index[scene.sym.active_object_ids[i]] = static_cast<int>(i);
    }
    for (const Atom& atom : scene.sym.atoms) {
        if (!atom.is_relation()) continue;
        for (int r = 0; r < 2; ++r) {
            if (atom.predicate == kRelations[static_cast<std::size_t>(r)]) {
                p.rels[static_cast<std::size_t>(r)].emplace_back(id_to_index.at(atom.subject),
                                                                 id_to_index.at(atom.object2));
            }
        }
    }
    return p;
}

std::uint32_t satisfying_mask(const Prepped& scene,
                              const std::vector<std::pair<int, int>>& lits) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < scene.table.size(); ++i) {
        bool ok = true;
        for (const auto& [c, v] : lits) {
            if (scene.table[i][static_cast<std::size_t>(c)] != v) {
                ok = false;
                break;
            }
        }
        if (ok) mask |= 1u << i;
    }
    return mask;
}

bool clause_covers(const IlpClause& clause, const Prepped& scene) {
    const std::uint32_t ma = satisfying_mask(scene, clause.a);
    if (ma == 0) return false;
    if (clause.b.empty() && clause.relation < 0) return true;
    const std::uint32_t mb = satisfying_mask(scene, clause.b);
    if (mb == 0) return false;
    if (clause.relation < 0) return true; // variables may unify
    for (const auto& [i, j] : scene.rels[static_cast<std::size_t>(clause.relation)]) {
        if ((ma >> i & 1u) && (mb >> j & 1u)) return true;
    }
    return false;
}

bool lits_subset(const std::vector<std::pair<int, int>>& small,
                 const std::vector<std::pair<int, int>>& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

// True when every scene covered by `cand` is also covered by `general`, by
// syntactic containment. Used to skip specializations of zero-positive
// clauses.
bool is_specialization(const IlpClause& cand, const IlpClause& general) {
    if (general.relation >= 0) {
        return cand.relation == general.relation && lits_subset(general.a, cand.a) &&
               lits_subset(general.b, cand.b);
    }
    if (general.b.empty()) {
        return lits_subset(general.a, cand.a) || lits_subset(general.a, cand.b);
    }
    return (lits_subset(general.a, cand.a) && lits_subset(general.b, cand.b)) ||
           (lits_subset(general.a, cand.b) && lits_subset(general.b, cand.a));
}

// All attribute conjunctions on one variable, grouped by literal count and
// lexicographically ordered within each group.
std::vector<std::vector<std::vector<std::pair<int, int>>>> enumerate_conjunctions(
    const AttributeSchema& schema, int max_literals) {
    std::vector<std::vector<std::vector<std::pair<int, int>>>> by_size(
        static_cast<std::size_t>(max_literals) + 1);
    std::vector<std::pair<int, int>> current;
    auto rec = [&](auto&& self, int concept_idx) -> void {
        if (!current.empty()) by_size[current.size()].push_back(current);
        if (static_cast<int>(current.size()) == max_literals) return;
        for (int c = concept_idx; c < schema.num_concepts(); ++c) {
            for (int v = 0; v < schema.domain_size(c); ++v) {
                current.emplace_back(c, v);
                self(self, c + 1);
                current.pop_back();
            }
        }
    };
    rec(rec, 0);
    for (auto& group : by_size) std::sort(group.begin(), group.end());
    return by_size;
}

// Candidates of one total size, in (num_vars, lexicographic) order.
std::vector<IlpClause> candidates_of_size(
    const std::vector<std::vector<std::vector<std::pair<int, int>>>>& conj, int total_size,
    const IlpOptions& options) {
    std::vector<IlpClause> out;
    const int max_lits = options.max_literals;
    if (total_size <= max_lits) {
        for (const auto& a : conj[static_cast<std::size_t>(total_size)]) {
            out.push_back({a, {}, -1});
        }
    }
    if (options.max_vars >= 2) {
        for (int asize = 1; asize <= std::min(max_lits, total_size - 1); ++asize) {
            const int bsize = total_size - asize;
            if (bsize < asize || bsize > max_lits) continue; // unordered pair, a <= b
            const auto& as = conj[static_cast<std::size_t>(asize)];
            const auto& bs = conj[static_cast<std::size_t>(bsize)];
            for (std::size_t i = 0; i < as.size(); ++i) {
                const std::size_t j0 = (asize == bsize) ? i + 1 : 0;
                for (std::size_t j = j0; j < bs.size(); ++j) {
                    out.push_back({as[i], bs[j], -1});
                }
            }
        }
        if (options.allow_relations) {
            for (int asize = 1; asize <= std::min(max_lits, total_size - 2); ++asize) {
                const int bsize = total_size - 1 - asize;
                if (bsize < 1 || bsize > max_lits) continue;
                for (int r = 0; r < 2; ++r) {
                    for (const auto& a : conj[static_cast<std::size_t>(asize)]) {
                        for (const auto& b : conj[static_cast<std::size_t>(bsize)]) {
                            out.push_back({a, b, r});
                        }
                    }
                }
            }
        }
    }
    return out;
}

using Bits = std::vector<std::uint64_t>;

Bits make_bits(std::size_t n) { return Bits((n + 63) / 64, 0); }

long count_and(const Bits& x, const Bits& y) {
    long n = 0;
    for (std::size_t w = 0; w < x.size(); ++w) n += std::popcount(x[w] & y[w]);
    return n;
}

long count_or_and(const Bits& x, const Bits& y, const Bits& mask) {
    long n = 0;
    for (std::size_t w = 0; w < x.size(); ++w) n += std::popcount((x[w] | y[w]) & mask[w]);
    return n;
}

struct Tested {
    IlpClause clause;
    Bits coverage;
    long tp = 0;
    long fp = 0;
    long errors(long n_pos) const { return fp + (n_pos - tp); }
};

std::string lits_to_text(const std::vector<std::pair<int, int>>& lits,
                         const AttributeSchema& schema) {
    std::string out;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        if (i > 0) out += " & ";
        out += schema.concept_name(lits[i].first) + "=" +
               schema.domain(lits[i].first)[static_cast<std::size_t>(lits[i].second)];
    }
    return out;
}

} // namespace

int Hypothesis::size() const {
    int n = 0;
    for (const auto& c : clauses) n += c.size();
    return n;
}

IlpReasoner::IlpReasoner(const AttributeSchema& schema, IlpOptions options)
    : schema_(schema), options_(options) {}

const Hypothesis& IlpReasoner::hypothesis() const {
    if (!hypothesis_) throw Error("NO_HYPOTHESIS", "ilp fit returned FAILURE");
    return *hypothesis_;
}

void IlpReasoner::fit(const std::vector<const GroundedScene*>& scenes,
                      const std::vector<char>& labels) {
    if (scenes.empty()) throw Error("EMPTY_TRAINING_SET", "ilp requires training scenes");
    if (scenes.size() != labels.size()) throw Error("LENGTH_MISMATCH", "scenes vs labels");
    hypothesis_.reset();
    iterations_used_ = 0;

    const std::size_t n = scenes.size();
    std::vector<Prepped> prepped;
    prepped.reserve(n);
    for (const GroundedScene* s : scenes) prepped.push_back(prep_scene(*s, schema_));

    Bits pos = make_bits(n);
    Bits all = make_bits(n);
    long n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        all[i / 64] |= 1ull << (i % 64);
        if (labels[i]) {
            pos[i / 64] |= 1ull << (i % 64);
            ++n_pos;
        }
    }
    if (n_pos == 0) return; // nothing to cover; predict all-negative

    const auto conj = enumerate_conjunctions(schema_, options_.max_literals);
    const int max_size = options_.max_vars >= 2
                             ? 2 * options_.max_literals + (options_.allow_relations ? 1 : 0)
                             : options_.max_literals;

    std::vector<IlpClause> pruned;
    // Clauses covering at least one positive and zero negatives; the only
    // admissible disjuncts of a consistent 2-clause hypothesis.
    std::vector<Tested> clean;
    std::vector<std::vector<int>> clean_by_size(static_cast<std::size_t>(max_size) + 1);

    // Hypotheses in increasing total-size order: 2-clause disjunctions whose
    // clause sizes sum to s (built from smaller clauses already tested), then
    // single clauses of size s. The first consistent hypothesis is therefore
    // minimal.
    for (int size = 1; size <= 2 * max_size; ++size) {
        if (options_.max_clauses >= 2) {
            for (int s1 = 1; s1 <= size / 2; ++s1) {
                const int s2 = size - s1;
                if (s2 > max_size) continue;
                for (const int i : clean_by_size[static_cast<std::size_t>(s1)]) {
                    for (const int j : clean_by_size[static_cast<std::size_t>(s2)]) {
                        if (s1 == s2 && j <= i) continue;
                        if (iterations_used_ >= options_.budget) return; // FAILURE
                        ++iterations_used_;
                        const Tested& x = clean[static_cast<std::size_t>(i)];
                        const Tested& y = clean[static_cast<std::size_t>(j)];
                        if (count_or_and(x.coverage, y.coverage, pos) == n_pos) {
                            hypothesis_ = Hypothesis{{x.clause, y.clause}, iterations_used_};
                            return;
                        }
                    }
                }
            }
        }
        if (size <= max_size) {
            for (const IlpClause& cand : candidates_of_size(conj, size, options_)) {
                if (iterations_used_ >= options_.budget) return; // FAILURE
                bool skip = false;
                for (const IlpClause& p : pruned) {
                    if (is_specialization(cand, p)) {
                        skip = true;
                        break;
                    }
                }
                if (skip) continue;

                ++iterations_used_;
                Tested t;
                t.clause = cand;
                t.coverage = make_bits(n);
                for (std::size_t i = 0; i < n; ++i) {
                    if (clause_covers(cand, prepped[i])) t.coverage[i / 64] |= 1ull << (i % 64);
                }
                t.tp = count_and(t.coverage, pos);
                if (t.tp == 0) {
                    pruned.push_back(cand);
                    continue;
                }
                t.fp = 0;
                for (std::size_t w = 0; w < t.coverage.size(); ++w) {
                    t.fp += std::popcount(t.coverage[w] & ~pos[w] & all[w]);
                }
                if (t.tp == n_pos && t.fp == 0) {
                    hypothesis_ = Hypothesis{{cand}, iterations_used_};
                    return;
                }
                if (t.fp == 0) {
                    clean_by_size[static_cast<std::size_t>(size)].push_back(
                        static_cast<int>(clean.size()));
                    clean.push_back(std::move(t));
                }
            }
        }
    }
    // No consistent hypothesis in the bounded language (or budget exhausted):
    // FAILURE, and predict() answers all-negative.
}

bool IlpReasoner::predict(const GroundedScene& scene) const {
    if (!hypothesis_) return false;
    const Prepped p = prep_scene(scene, schema_);
    for (const IlpClause& clause : hypothesis_->clauses) {
        if (clause_covers(clause, p)) return true;
    }
    return false;
}

std::string IlpReasoner::hypothesis_text() const {
    if (!hypothesis_) return "FAILURE";
    std::string out;
    for (std::size_t i = 0; i < hypothesis_->clauses.size(); ++i) {
        const IlpClause& c = hypothesis_->clauses[i];
        if (i > 0) out += " or ";
        if (c.relation >= 0) {
            out += "exists2(A: " + lits_to_text(c.a, schema_) + ", " +
                   kRelations[static_cast<std::size_t>(c.relation)] +
                   ", B: " + lits_to_text(c.b, schema_) + ")";
        } else if (c.b.empty()) {
            out += "exists(" + lits_to_text(c.a, schema_) + ")";
        } else {
            out += "exists(" + lits_to_text(c.a, schema_) + ") and exists(" +
                   lits_to_text(c.b, schema_) + ")";
        }
    }
    return out;
}

std::string IlpReasoner::hypothesis_prolog() const {
    if (!hypothesis_) return "% FAILURE";
    std::string out;
    for (const IlpClause& c : hypothesis_->clauses) {
        out += "pos(S) :- in(S,A)";
        for (const auto& [ci, v] : c.a) {
            out += ", " + schema_.concept_name(ci) + "(A," +
                   schema_.domain(ci)[static_cast<std::size_t>(v)] + ")";
        }
        if (!c.b.empty() || c.relation >= 0) {
            out += ", in(S,B)";
            for (const auto& [ci, v] : c.b) {
                out += ", " + schema_.concept_name(ci) + "(B," +
                       schema_.domain(ci)[static_cast<std::size_t>(v)] + ")";
            }
        }
        if (c.relation >= 0) {
            out += std::string(", ") + kRelations[static_cast<std::size_t>(c.relation)] + "(A,B)";
        }
        out += ".\n";
    }
    return out;
}

std::string IlpReasoner::serialize() const {
    nlohmann::json doc;
    doc["engine"] = "ilp";
    doc["iterations"] = iterations_used_;
    if (!hypothesis_) {
        doc["status"] = "failure";
    } else {
        doc["status"] = "ok";
        doc["text"] = hypothesis_text();
        doc["prolog"] = hypothesis_prolog();
        nlohmann::json clauses = nlohmann::json::array();
        for (const IlpClause& c : hypothesis_->clauses) {
            nlohmann::json jc;
            auto lits = [&](const std::vector<std::pair<int, int>>& ls) {
                nlohmann::json arr = nlohmann::json::array();
                for (const auto& [ci, v] : ls) {
                    arr.push_back({{"concept", schema_.concept_name(ci)},
                                   {"value", schema_.domain(ci)[static_cast<std::size_t>(v)]}});
                }
                return arr;
            };
            jc["a"] = lits(c.a);
            jc["b"] = lits(c.b);
            jc["relation"] = c.relation >= 0
                                 ? nlohmann::json(kRelations[static_cast<std::size_t>(c.relation)])
                                 : nlohmann::json();
            clauses.push_back(jc);
        }
        doc["clauses"] = clauses;
    }
    return doc.dump(2);
}

} // namespace nsb
