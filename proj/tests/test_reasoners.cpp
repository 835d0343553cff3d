#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "nsbench/dataset.hpp"
#include "nsbench/error.hpp"
#include "nsbench/metrics.hpp"
#include "nsbench/reasoners.hpp"
#include "nsbench/rng.hpp"
#include "nsbench/rules.hpp"

using namespace nsb;

namespace {

Scene random_scene(const AttributeSchema& schema, Rng& rng, int min_objects, int max_objects) {
    Scene scene;
    scene.schema_id = schema.id();
    int n = rng.uniform_int(min_objects, max_objects);
    for (int i = 0; i < n; ++i) {
        SceneObject obj;
        obj.id = i;
        for (int c = 0; c < schema.num_concepts(); ++c)
            obj.attributes.push_back(rng.uniform_int(0, schema.domain_size(c) - 1));
        for (int d = 0; d < schema.position_dims(); ++d) obj.position.push_back(rng.uniform());
        scene.objects.push_back(obj);
    }
    return scene;
}

// A scene whose objects are given as (shape, color, size, material) tuples.
GroundedScene attr_scene(const AttributeSchema& schema,
                         const std::vector<std::vector<int>>& rows) {
    Scene scene;
    scene.schema_id = schema.id();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        SceneObject obj;
        obj.id = static_cast<int>(i);
        obj.attributes = rows[i];
        obj.position = {0.05 + 0.09 * double(i), 0.5, 0.5};
        scene.objects.push_back(obj);
    }
    return grounded_scene_from_ground_truth(scene);
}

struct Corpus {
    std::vector<GroundedScene> storage;
    std::vector<const GroundedScene*> scenes;
    std::vector<char> labels;

    void add(GroundedScene scene, bool label) {
        storage.push_back(std::move(scene));
        labels.push_back(label);
    }
    void finish() {
        scenes.clear();
        for (const auto& s : storage) scenes.push_back(&s);
    }
};

Corpus labeled_corpus(const AttributeSchema& schema, const RuleSpec& rule, int n_pos, int n_neg,
                      std::uint64_t seed, bool use_observed = false,
                      const std::string& profile = "oracle") {
    GenConfig config = GenConfig::defaults(schema.id(), seed);
    LabeledDataset data =
        build_labeled_dataset(rule, config, NoiseProfile::builtin(profile), n_pos, n_neg, seed);
    Corpus corpus;
    for (auto& item : data.items)
        corpus.add(use_observed ? std::move(item.observed) : std::move(item.truth), item.label);
    corpus.finish();
    return corpus;
}

double corpus_f1(const Reasoner& model, const Corpus& corpus) {
    std::vector<char> predictions;
    for (const auto* scene : corpus.scenes) predictions.push_back(model.predict(*scene));
    return f1_score(predictions, corpus.labels).f1;
}

// Exhaustive consistency check over every satisfiable 1-variable clause with at
// most two literals, ignoring the engine's pruning entirely.
struct BruteIlp {
    bool found = false;
    int size = 0;
};

BruteIlp brute_force_ilp(const AttributeSchema& schema, const Corpus& corpus) {
    std::vector<std::vector<std::vector<int>>> tables;
    for (const auto* scene : corpus.scenes) tables.push_back(scene->sym.attribute_table(schema));
    auto consistent = [&](const std::vector<std::pair<int, int>>& lits) {
        for (std::size_t s = 0; s < tables.size(); ++s) {
            bool covered = false;
            for (const auto& row : tables[s]) {
                bool ok = true;
                for (auto [c, v] : lits) ok = ok && row[c] == v;
                if (ok) {
                    covered = true;
                    break;
                }
            }
            if (covered != (corpus.labels[s] != 0)) return false;
        }
        return true;
    };
    std::vector<std::pair<int, int>> values;
    for (int c = 0; c < schema.num_concepts(); ++c)
        for (int v = 0; v < schema.domain_size(c); ++v) values.push_back({c, v});
    for (const auto& lit : values)
        if (consistent({lit})) return {true, 1};
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            if (values[i].first == values[j].first) continue; // unsatisfiable pair
            if (consistent({values[i], values[j]})) return {true, 2};
        }
    return {false, 0};
}

} // namespace

// ---------------------------------------------------------------------------
// ILP

TEST_CASE("ilp recovers the existential target exactly on clean data") {
    const auto& schema = AttributeSchema::clevr_attr();
    RuleSpec rule = parse_rule("exists(size=large & color=red & shape=sphere)");
    Corpus corpus = labeled_corpus(schema, rule, 100, 400, 7);

    IlpReasoner ilp(schema);
    ilp.fit(corpus.scenes, corpus.labels);
    REQUIRE_FALSE(ilp.failed());
    REQUIRE(ilp.hypothesis().clauses.size() == 1);
    const IlpClause& clause = ilp.hypothesis().clauses[0];
    std::set<std::pair<int, int>> got(clause.a.begin(), clause.a.end());
    std::set<std::pair<int, int>> want = {
        {schema.concept_index("size"), schema.value_index(schema.concept_index("size"), "large")},
        {schema.concept_index("color"), schema.value_index(schema.concept_index("color"), "red")},
        {schema.concept_index("shape"),
         schema.value_index(schema.concept_index("shape"), "sphere")}};
    CHECK(got == want);
    CHECK(clause.b.empty());
    CHECK(clause.relation == -1);
    CHECK(corpus_f1(ilp, corpus) == 1.0);
    CHECK(ilp.iterations() > 0);
    CHECK(ilp.iterations() <= IlpOptions{}.budget);

    std::string prolog = ilp.hypothesis_prolog();
    CHECK(prolog.find(":-") != std::string::npos);
    CHECK(prolog.find("in(S,A)") != std::string::npos);
    CHECK(prolog.find("color(A,red)") != std::string::npos);
}

TEST_CASE("ilp cannot express cardinality and fails closed") {
    const auto& schema = AttributeSchema::clevr_attr();
    RuleSpec rule = parse_rule("count(material=metal) == 2");
    Corpus corpus = labeled_corpus(schema, rule, 60, 240, 11);

    IlpReasoner ilp(schema);
    ilp.fit(corpus.scenes, corpus.labels);
    CHECK(ilp.failed());
    CHECK(ilp.hypothesis_text() == "FAILURE");
    for (const auto* scene : corpus.scenes) CHECK_FALSE(ilp.predict(*scene));
    CHECK(corpus_f1(ilp, corpus) == 0.0);
}

TEST_CASE("any returned hypothesis is consistent with its training set") {
    const auto& schema = AttributeSchema::clevr_attr();
    const std::vector<std::string> rules = {
        "exists(color=red)",
        "exists(size=large & color=red & shape=sphere)",
        "exists(color=blue & shape=sphere) and exists(color=yellow & shape=cube)",
        "exists(color=green & material=metal) or exists(color=yellow & material=rubber)",
        "count(material=metal) == 2",
        "forall(shape=sphere -> color=blue)",
    };
    int returned = 0;
    for (std::size_t r = 0; r < rules.size(); ++r)
        for (std::uint64_t seed = 1; seed <= 2; ++seed) {
            Corpus corpus = labeled_corpus(schema, parse_rule(rules[r]), 30, 120,
                                           1000 * (r + 1) + seed);
            IlpReasoner ilp(schema);
            ilp.fit(corpus.scenes, corpus.labels);
            if (ilp.failed()) continue;
            returned++;
            for (std::size_t i = 0; i < corpus.scenes.size(); ++i)
                CHECK(ilp.predict(*corpus.scenes[i]) == (corpus.labels[i] != 0));
        }
    CHECK(returned >= 4); // the expressible rules do produce hypotheses
}

TEST_CASE("search agrees with an unpruned exhaustive baseline at small bounds") {
    const auto& schema = AttributeSchema::clevr_attr();
    IlpOptions small;
    small.max_vars = 1;
    small.max_literals = 2;
    small.max_clauses = 1;

    Rng rng(99);
    int found = 0, failed = 0;
    for (int trial = 0; trial < 40; ++trial) {
        // random labelings: some consistent, some not
        Corpus corpus;
        for (int i = 0; i < 30; ++i)
            corpus.add(grounded_scene_from_ground_truth(random_scene(schema, rng, 1, 6)), false);
        RuleSpec rule = trial % 2 == 0 ? parse_rule("exists(color=red & size=large)")
                                       : parse_rule("exists(shape=cube)");
        for (std::size_t i = 0; i < corpus.storage.size(); ++i)
            corpus.labels[i] = evaluate_rule(rule, corpus.storage[i].sym, schema);
        // in half the trials, corrupt one label so no consistent clause may exist
        if (trial % 3 == 0 && !corpus.labels.empty()) corpus.labels[0] ^= 1;
        corpus.finish();

        BruteIlp want = brute_force_ilp(schema, corpus);
        IlpReasoner ilp(schema, small);
        ilp.fit(corpus.scenes, corpus.labels);
        CHECK(ilp.failed() == !want.found);
        if (want.found) {
            // pruning never skips the minimum, ordering never overshoots it
            CHECK(ilp.hypothesis().size() == want.size);
            found++;
        } else {
            failed++;
        }
    }
    CHECK(found > 0);
    CHECK(failed > 0);
}

TEST_CASE("a single-literal target is found within the unary candidate count") {
    const auto& schema = AttributeSchema::clevr_attr();
    RuleSpec rule = parse_rule("exists(color=purple)");
    Corpus corpus = labeled_corpus(schema, rule, 1, 20, 17);
    IlpReasoner ilp(schema);
    ilp.fit(corpus.scenes, corpus.labels);
    REQUIRE_FALSE(ilp.failed());
    long unary_candidates = 0;
    for (int c = 0; c < schema.num_concepts(); ++c) unary_candidates += schema.domain_size(c);
    CHECK(ilp.iterations() <= unary_candidates);
}

TEST_CASE("ilp input validation") {
    const auto& schema = AttributeSchema::clevr_attr();
    IlpReasoner ilp(schema);
    try {
        ilp.fit({}, {});
        FAIL("expected EMPTY_TRAINING_SET");
    } catch (const Error& e) {
        CHECK(e.code() == "EMPTY_TRAINING_SET");
    }
    GroundedScene scene = attr_scene(schema, {{0, 0, 0, 0}});
    CHECK_THROWS_AS(ilp.fit({&scene}, {1, 0}), Error);
}

TEST_CASE("all-negative training data yields an all-negative predictor") {
    const auto& schema = AttributeSchema::clevr_attr();
    Rng rng(21);
    Corpus corpus;
    for (int i = 0; i < 10; ++i)
        corpus.add(grounded_scene_from_ground_truth(random_scene(schema, rng, 1, 5)), false);
    corpus.finish();
    IlpReasoner ilp(schema);
    ilp.fit(corpus.scenes, corpus.labels);
    for (const auto* scene : corpus.scenes) CHECK_FALSE(ilp.predict(*scene));
}

// ---------------------------------------------------------------------------
// Decision tree

TEST_CASE("dt is deterministic") {
    const auto& schema = AttributeSchema::clevr_attr();
    RuleSpec rule = parse_rule("count(material=metal) == 2");
    Corpus corpus = labeled_corpus(schema, rule, 40, 160, 23);
    DtReasoner a(schema), b(schema);
    a.fit(corpus.scenes, corpus.labels);
    b.fit(corpus.scenes, corpus.labels);
    CHECK(a.serialize() == b.serialize());
}

TEST_CASE("a separable single feature gives a depth-1 tree") {
    const auto& schema = AttributeSchema::clevr_attr();
    int red = schema.value_index(schema.concept_index("color"), "red");
    Corpus corpus;
    for (int i = 0; i < 10; ++i) {
        corpus.add(attr_scene(schema, {{0, red, 0, 0}, {1, 3, 1, 1}}), true);
        corpus.add(attr_scene(schema, {{0, 2, 0, 0}, {1, 3, 1, 1}}), false);
    }
    corpus.finish();
    DtReasoner dt(schema);
    dt.fit(corpus.scenes, corpus.labels);
    CHECK(dt.nodes().size() == 3); // one split, two leaves
    for (std::size_t i = 0; i < corpus.scenes.size(); ++i)
        CHECK(dt.predict(*corpus.scenes[i]) == (corpus.labels[i] != 0));
}

TEST_CASE("constant labels collapse to one leaf") {
    const auto& schema = AttributeSchema::clevr_attr();
    Rng rng(31);
    Corpus corpus;
    for (int i = 0; i < 8; ++i)
        corpus.add(grounded_scene_from_ground_truth(random_scene(schema, rng, 1, 5)), true);
    corpus.finish();
    DtReasoner dt(schema);
    dt.fit(corpus.scenes, corpus.labels);
    REQUIRE(dt.nodes().size() == 1);
    CHECK(dt.nodes()[0].is_leaf());
    CHECK(dt.nodes()[0].prediction);
}

TEST_CASE("dt learns the cardinality band on clean predicates") {
    const auto& schema = AttributeSchema::clevr_attr();
    RuleSpec rule = parse_rule("count(material=metal) == 2");
    Corpus corpus = labeled_corpus(schema, rule, 100, 400, 37);
    DtReasoner dt(schema);
    dt.fit(corpus.scenes, corpus.labels);
    CHECK(corpus_f1(dt, corpus) >= 0.95);
}

TEST_CASE("dt rejects feature vectors of the wrong width") {
    const auto& schema = AttributeSchema::clevr_attr();
    RuleSpec rule = parse_rule("exists(color=red)");
    Corpus corpus = labeled_corpus(schema, rule, 20, 80, 41);
    DtReasoner dt(schema);
    dt.fit(corpus.scenes, corpus.labels);
    try {
        (void)dt.predict_vector({1, 2, 3});
        FAIL("expected WIDTH_MISMATCH");
    } catch (const Error& e) {
        CHECK(e.code() == "WIDTH_MISMATCH");
    }
}

// ---------------------------------------------------------------------------
// Naive Bayes

TEST_CASE("bn posterior equals a from-scratch count computation") {
    const auto& schema = AttributeSchema::clevr_attr();
    Rng rng(51);
    Corpus corpus;
    for (int i = 0; i < 40; ++i)
        corpus.add(grounded_scene_from_ground_truth(random_scene(schema, rng, 1, 8)),
                   rng.bernoulli(0.3));
    corpus.finish();

    BnOptions options;
    BnReasoner bn(schema, options);
    bn.fit(corpus.scenes, corpus.labels);

    // independent recount: clipped categorical likelihoods with Laplace alpha
    const int width = bag_of_properties_width(schema);
    const int buckets = options.count_cap + 1;
    std::vector<std::vector<std::vector<double>>> counts(
        2, std::vector<std::vector<double>>(width, std::vector<double>(buckets, 0.0)));
    double class_count[2] = {0.0, 0.0};
    std::vector<std::vector<int>> features;
    for (const auto* scene : corpus.scenes)
        features.push_back(bag_of_properties(scene->sym, schema));
    for (std::size_t i = 0; i < features.size(); ++i) {
        int y = corpus.labels[i] ? 1 : 0;
        class_count[y] += 1.0;
        for (int f = 0; f < width; ++f)
            counts[y][f][std::min(features[i][f], options.count_cap)] += 1.0;
    }
    for (int probe = 0; probe < 10; ++probe) {
        const auto& x = features[probe * 3];
        for (int y = 0; y < 2; ++y) {
            double want = std::log((class_count[y] + options.alpha) /
                                   (double(features.size()) + 2.0 * options.alpha));
            for (int f = 0; f < width; ++f) {
                int b = std::min(x[f], options.count_cap);
                want += std::log((counts[y][f][b] + options.alpha) /
                                 (class_count[y] + options.alpha * buckets));
            }
            CHECK(bn.log_posterior(x, y == 1) == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("a perfectly separating feature dominates the bn posterior") {
    const auto& schema = AttributeSchema::clevr_attr();
    int red = schema.value_index(schema.concept_index("color"), "red");
    Corpus corpus;
    for (int i = 0; i < 12; ++i) {
        corpus.add(attr_scene(schema, {{0, red, 0, 0}, {2, 5, 1, 1}}), true);
        corpus.add(attr_scene(schema, {{0, 6, 0, 0}, {2, 5, 1, 1}}), false);
    }
    corpus.finish();
    BnReasoner bn(schema);
    bn.fit(corpus.scenes, corpus.labels);
    for (std::size_t i = 0; i < corpus.scenes.size(); ++i)
        CHECK(bn.predict(*corpus.scenes[i]) == (corpus.labels[i] != 0));
}

TEST_CASE("uninformative features fall back to the majority prior") {
    const auto& schema = AttributeSchema::clevr_attr();
    GroundedScene same = attr_scene(schema, {{1, 1, 1, 1}});
    Corpus corpus;
    for (int i = 0; i < 10; ++i) corpus.add(same, i < 3); // 70% negative
    corpus.finish();
    BnReasoner bn(schema);
    bn.fit(corpus.scenes, corpus.labels);
    CHECK_FALSE(bn.predict(same));
}

TEST_CASE("posterior rises as a count moves toward the positive mode") {
    const auto& schema = AttributeSchema::clevr_attr();
    int red = schema.value_index(schema.concept_index("color"), "red");
    auto red_objects = [&](int n) {
        std::vector<std::vector<int>> rows;
        for (int i = 0; i < n; ++i) rows.push_back({0, red, 0, 0});
        rows.push_back({1, 3, 1, 1}); // one filler so scenes are never empty
        return attr_scene(schema, rows);
    };
    Corpus corpus;
    for (int i = 0; i < 10; ++i) {
        corpus.add(red_objects(3 + i % 2), true);
        corpus.add(red_objects(i % 2), false);
    }
    corpus.finish();
    BnReasoner bn(schema);
    bn.fit(corpus.scenes, corpus.labels);

    auto names = bag_of_properties_feature_names(schema);
    int feature = -1;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == "color=red") feature = static_cast<int>(i);
    REQUIRE(feature >= 0);
    std::vector<int> x(names.size(), 0);
    double previous = -1e300;
    for (int count = 0; count <= 4; ++count) {
        x[feature] = count;
        double margin = bn.log_posterior(x, true) - bn.log_posterior(x, false);
        CHECK(margin >= previous);
        previous = margin;
    }
}

// ---------------------------------------------------------------------------
// DeepSets classifier

TEST_CASE("nscl logit is permutation invariant") {
    const auto& schema = AttributeSchema::clevr_attr();
    RuleSpec rule = parse_rule("forall(shape=sphere -> color=blue)");
    Corpus corpus = labeled_corpus(schema, rule, 30, 120, 61);
    NsclOptions options;
    options.epochs = 3;
    NsclReasoner nscl(schema, 5, options);
    nscl.fit(corpus.scenes, corpus.labels);

    // Present the same objects in a different order: new ids in permuted
    // sequence, so the grounded rows shuffle while their content does not.
    Rng rng(62);
    auto scene_from = [&](const std::vector<std::vector<int>>& rows,
                          const std::vector<Position>& positions) {
        Scene scene;
        scene.schema_id = schema.id();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            SceneObject obj;
            obj.id = static_cast<int>(i);
            obj.attributes = rows[i];
            obj.position = positions[i];
            scene.objects.push_back(obj);
        }
        return grounded_scene_from_ground_truth(scene);
    };
    for (int trial = 0; trial < 40; ++trial) {
        int n = rng.uniform_int(2, 8);
        std::vector<std::vector<int>> rows(n);
        std::vector<Position> positions(n);
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < schema.num_concepts(); ++c)
                rows[i].push_back(rng.uniform_int(0, schema.domain_size(c) - 1));
            positions[i] = {rng.uniform(), rng.uniform(), rng.uniform()};
        }
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);
        std::vector<std::vector<int>> rows2;
        std::vector<Position> positions2;
        for (int i : order) {
            rows2.push_back(rows[i]);
            positions2.push_back(positions[i]);
        }
        double a = nscl.logit(scene_from(rows, positions));
        double b = nscl.logit(scene_from(rows2, positions2));
        CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    const auto& schema = AttributeSchema::clevr_attr();
    NsclOptions options;
    options.hidden = 8;
    options.epochs = 0; // fit only initializes the parameters
    NsclReasoner nscl(schema, 99, options);

    Rng rng(71);
    Corpus corpus;
    corpus.add(attr_scene(schema, {{0, 1, 0, 1}, {2, 4, 1, 0}, {1, 7, 0, 0}}), true);
    corpus.add(attr_scene(schema, {{1, 2, 1, 1}, {0, 0, 0, 0}, {2, 6, 1, 1}}), false);
    corpus.add(attr_scene(schema, {{2, 5, 0, 1}, {1, 3, 1, 0}, {0, 2, 0, 1}}), true);
    corpus.finish();
    nscl.fit(corpus.scenes, corpus.labels);

    std::vector<std::vector<std::vector<double>>> batch;
    for (const auto* scene : corpus.scenes) batch.push_back(nscl.encode(*scene));

    std::vector<double> grad;
    (void)nscl.loss_and_grad(batch, corpus.labels, &grad);
    REQUIRE(grad.size() == nscl.parameters().size());

    const double h = 1e-4;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        double saved = nscl.parameters()[i];
        nscl.parameters()[i] = saved + h;
        double up = nscl.loss_and_grad(batch, corpus.labels, nullptr);
        nscl.parameters()[i] = saved - h;
        double down = nscl.loss_and_grad(batch, corpus.labels, nullptr);
        nscl.parameters()[i] = saved;
        double numeric = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
        max_rel = std::max(max_rel, std::abs(numeric - grad[i]) / denom);
    }
    CHECK(max_rel <= 1e-4);
}

TEST_CASE("nscl handles empty scenes and is seed-deterministic") {
    const auto& schema = AttributeSchema::clevr_attr();
    RuleSpec rule = parse_rule("exists(color=red)");
    Corpus corpus = labeled_corpus(schema, rule, 20, 80, 81);
    NsclOptions options;
    options.epochs = 5;
    NsclReasoner a(schema, 7, options), b(schema, 7, options), c(schema, 8, options);
    a.fit(corpus.scenes, corpus.labels);
    b.fit(corpus.scenes, corpus.labels);
    c.fit(corpus.scenes, corpus.labels);
    CHECK(a.serialize() == b.serialize());
    CHECK(a.serialize() != c.serialize());

    GroundedScene empty;
    double p = a.probability(empty);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
}

// ---------------------------------------------------------------------------
// Factory

TEST_CASE("the factory covers all four engines") {
    const auto& schema = AttributeSchema::clevr_attr();
    const auto& names = engine_names();
    CHECK(names == std::vector<std::string>{"ilp", "dt", "bn", "nscl"});
    for (const auto& name : names) {
        auto model = make_reasoner(name, schema, 1);
        REQUIRE(model);
        CHECK(model->name() == name);
    }
    CHECK_THROWS_AS((void)make_reasoner("svm", schema, 1), Error);
}
