#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "nsbench/dataset.hpp"
#include "nsbench/error.hpp"
#include "nsbench/experiment.hpp"
#include "nsbench/metrics.hpp"
#include "nsbench/rng.hpp"

using namespace nsb;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig config;
    config.schema_id = SchemaId::ClevrAttr;
    config.rules = {{"exist", "exists(color=red & size=large)"},
                    {"card", "count(material=metal) == 2"}};
    config.profiles = {"oracle", "sup50"};
    config.engines = {"dt", "bn"};
    config.n_pos = 20;
    config.n_neg = 80;
    config.runs = 2;
    config.base_seed = 5;
    return config;
}

} // namespace

TEST_CASE("f1 basics") {
    BinaryMetrics perfect = f1_score({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    BinaryMetrics all_negative = f1_score({0, 0, 0}, {1, 0, 1});
    CHECK(all_negative.f1 == 0.0);

    // TP=2, FP=1, FN=1
    BinaryMetrics mixed = f1_score({1, 1, 1, 0, 0}, {1, 1, 0, 1, 0});
    CHECK(mixed.precision == doctest::Approx(2.0 / 3.0));
    CHECK(mixed.recall == doctest::Approx(2.0 / 3.0));
    CHECK(mixed.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(mixed.tp == 2);
    CHECK(mixed.fp == 1);
    CHECK(mixed.fn == 1);
    CHECK(mixed.tn == 1);

    try {
        (void)f1_score({1, 0}, {1});
        FAIL("expected LENGTH_MISMATCH");
    } catch (const Error& e) {
        CHECK(e.code() == "LENGTH_MISMATCH");
    }
}

TEST_CASE("mean and sample std") {
    CHECK(mean({1.0, 2.0, 3.0}) == doctest::Approx(2.0));
    CHECK(sample_std({2.0, 4.0}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(sample_std({5.0}) == 0.0);
}

TEST_CASE("splits partition the index range") {
    Rng rng(3);
    for (int n : {2, 10, 500}) {
        Split split = make_split(n, 0.8, rng);
        CHECK(!split.train.empty());
        CHECK(!split.test.empty());
        std::set<int> all(split.train.begin(), split.train.end());
        all.insert(split.test.begin(), split.test.end());
        CHECK(static_cast<int>(all.size()) == n);
        CHECK(split.train.size() + split.test.size() == static_cast<std::size_t>(n));
        if (n == 500) CHECK(split.train.size() == 400);
    }
}

TEST_CASE("labeled datasets hit their quotas deterministically") {
    RuleSpec rule = parse_rule("exists(color=red & size=large)");
    GenConfig config = GenConfig::defaults(SchemaId::ClevrAttr, 9);
    NoiseProfile profile = NoiseProfile::builtin("sup15");

    LabeledDataset a = build_labeled_dataset(rule, config, profile, 100, 400, 9);
    CHECK(a.items.size() == 500);
    CHECK(a.positives() == 100);

    const auto& schema = AttributeSchema::clevr_attr();
    for (const LabeledItem& item : a.items)
        CHECK(item.label == evaluate_rule(rule, item.truth.sym, schema));

    LabeledDataset b = build_labeled_dataset(rule, config, profile, 100, 400, 9);
    REQUIRE(b.items.size() == a.items.size());
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        CHECK(symbolic_scene_to_json(b.items[i].truth.sym) ==
              symbolic_scene_to_json(a.items[i].truth.sym));
        CHECK(symbolic_scene_to_json(b.items[i].observed.sym) ==
              symbolic_scene_to_json(a.items[i].observed.sym));
    }
}

TEST_CASE("the oracle profile observes exactly what is true") {
    RuleSpec rule = parse_rule("count(material=metal) == 2");
    GenConfig config = GenConfig::defaults(SchemaId::ClevrAttr, 13);
    const auto& schema = AttributeSchema::clevr_attr();
    LabeledDataset data =
        build_labeled_dataset(rule, config, NoiseProfile::oracle(), 30, 120, 13);
    for (const LabeledItem& item : data.items)
        CHECK(evaluate_rule(rule, item.observed.sym, schema) == item.label);
}

TEST_CASE("a near-zero base rate rule is rejected") {
    RuleSpec rule = parse_rule("count(color=red) == 10");
    GenConfig config = GenConfig::defaults(SchemaId::ClevrAttr, 17);
    try {
        (void)build_labeled_dataset(rule, config, NoiseProfile::oracle(), 5, 5, 17);
        FAIL("expected UNSATISFIABLE_RULE");
    } catch (const Error& e) {
        CHECK(e.code() == "UNSATISFIABLE_RULE");
    }
}

TEST_CASE("experiment config validation and JSON round-trip") {
    ExperimentConfig config = tiny_config();
    CHECK_NOTHROW(config.validate());
    ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(config));
    CHECK(experiment_config_to_json(back) == experiment_config_to_json(config));

    ExperimentConfig bad = config;
    bad.runs = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.train_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.engines = {"transformer"};
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = config;
    bad.eval_source = "simulated";
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("the benchmark grid config covers the table") {
    for (bool small : {true, false}) {
        ExperimentConfig config = default_rq3_config(small);
        CHECK_NOTHROW(config.validate());
        CHECK(config.rules.size() == 5);
        CHECK(config.engines.size() == 4);
        CHECK(std::count(config.profiles.begin(), config.profiles.end(), "oracle") == 1);
        CHECK(std::count(config.profiles.begin(), config.profiles.end(), "sup15") == 1);
        CHECK(config.runs == 5);
        CHECK(config.n_neg == 4 * config.n_pos);
        CHECK(config.n_pos == (small ? 100 : 1000));
    }
}

TEST_CASE("resolve_profile accepts labels and files") {
    NoiseProfile builtin = resolve_profile("sup25");
    CHECK(builtin.label == "sup25");

    fs::path file = fs::temp_directory_path() / "nsbench_profile_test.json";
    {
        std::ofstream out(file);
        out << noise_profile_to_json(NoiseProfile::builtin("sup50"));
    }
    NoiseProfile loaded = resolve_profile(file.string());
    CHECK(loaded.label == "sup50");
    fs::remove(file);

    CHECK_THROWS_AS((void)resolve_profile("sup33"), Error);
}

TEST_CASE("experiments are deterministic and order-independent") {
    ExperimentConfig config = tiny_config();
    ExperimentReport first = run_experiment(config);
    ExperimentReport second = run_experiment(config);
    CHECK(report_to_csv(first) == report_to_csv(second));

    ExperimentConfig swapped = config;
    std::swap(swapped.engines[0], swapped.engines[1]);
    ExperimentReport reordered = run_experiment(swapped);
    for (const RunResult& r : first.runs) {
        bool found = false;
        for (const RunResult& s : reordered.runs)
            if (s.rule == r.rule && s.profile == r.profile && s.engine == r.engine &&
                s.run == r.run) {
                found = true;
                CHECK(s.seed == r.seed);
                CHECK(s.metrics.f1 == r.metrics.f1);
                CHECK(s.metrics.tp == r.metrics.tp);
            }
        CHECK(found);
    }
}

TEST_CASE("reports carry recomputable aggregates and stable shapes") {
    ExperimentConfig config = tiny_config();
    ExperimentReport report = run_experiment(config);

    const std::size_t cells = config.rules.size() * config.profiles.size() *
                              config.engines.size();
    CHECK(report.runs.size() == cells * config.runs);
    CHECK(report.aggregates.size() == cells);

    for (const CellAggregate& agg : report.aggregates) {
        std::vector<double> f1s;
        for (const RunResult& r : report.runs)
            if (r.rule == agg.rule && r.profile == agg.profile && r.engine == agg.engine)
                f1s.push_back(r.metrics.f1);
        REQUIRE(static_cast<int>(f1s.size()) == config.runs);
        CHECK(agg.f1_mean == doctest::Approx(mean(f1s)));
        CHECK(agg.f1_std == doctest::Approx(sample_std(f1s)));
        CHECK(agg.f1_mean >= 0.0);
        CHECK(agg.f1_mean <= 1.0);
        CHECK(agg.f1_std >= 0.0);
    }

    std::string csv = report_to_csv(report);
    long lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 1 + static_cast<long>(report.runs.size() + report.aggregates.size()));
    // timings never enter the CSV, keeping byte-identical reruns possible
    CHECK(csv.find("wall") == std::string::npos);
}

TEST_CASE("single-run cells have zero std") {
    ExperimentConfig config = tiny_config();
    config.rules = {{"exist", "exists(color=red & size=large)"}};
    config.profiles = {"oracle"};
    config.engines = {"dt"};
    config.runs = 1;
    ExperimentReport report = run_experiment(config);
    REQUIRE(report.aggregates.size() == 1);
    CHECK(report.aggregates[0].f1_std == 0.0);
}

TEST_CASE("report JSON mirrors the CSV") {
    ExperimentConfig config = tiny_config();
    config.rules = {{"exist", "exists(color=red & size=large)"}};
    ExperimentReport report = run_experiment(config);
    ExperimentReport back = report_from_json(report_to_json(report));
    CHECK(report_to_csv(back) == report_to_csv(report));
}

TEST_CASE("emit_report writes csv, json, and one svg per rule") {
    ExperimentConfig config = tiny_config();
    ExperimentReport report = run_experiment(config);

    fs::path dir = fs::temp_directory_path() / "nsbench_report_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<fs::path> files = emit_report(report, dir);
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "report.json"));
    int svg_count = 0;
    for (const fs::path& f : files)
        if (f.extension() == ".svg") {
            svg_count++;
            std::ifstream in(f);
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            CHECK(text.find("<svg") != std::string::npos);
            CHECK(text.rfind("</svg>") != std::string::npos);
        }
    CHECK(svg_count == static_cast<int>(config.rules.size()));
    fs::remove_all(dir);
}

TEST_CASE("oracle never trails a noisy profile by more than the slack") {
    // full-size cells: at tiny samples split variance can outweigh the noise
    ExperimentConfig config = tiny_config();
    config.n_pos = 100;
    config.n_neg = 400;
    config.runs = 5;
    ExperimentReport report = run_experiment(config);
    for (const CellAggregate& noisy : report.aggregates) {
        if (noisy.profile == "oracle") continue;
        for (const CellAggregate& clean : report.aggregates)
            if (clean.rule == noisy.rule && clean.engine == noisy.engine &&
                clean.profile == "oracle")
                CHECK(clean.f1_mean >= noisy.f1_mean - 0.05);
    }
}
