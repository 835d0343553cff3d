// Command-line surface for the scene/perception/reasoning bench.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "nsbench/dataset.hpp"
#include "nsbench/error.hpp"
#include "nsbench/experiment.hpp"
#include "nsbench/generator.hpp"
#include "nsbench/metrics.hpp"
#include "nsbench/perception.hpp"
#include "nsbench/reasoners.hpp"
#include "nsbench/rules.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nsb::Error("IO_ERROR", "cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw nsb::Error("IO_ERROR", "cannot write " + path.string());
    out << content;
}

char scene_file_suffix_buf[32];

int run_gen(const std::string& schema, int count, std::uint64_t seed, const std::string& out,
            const std::string& config_path) {
    nsb::GenConfig config = config_path.empty()
                                ? nsb::GenConfig::defaults(nsb::schema_id_from_string(schema), seed)
                                : nsb::gen_config_from_json(read_file(config_path));
    if (config_path.empty()) config.base_seed = seed;
    std::vector<nsb::Scene> scenes;
    scenes.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) scenes.push_back(nsb::generate_scene(config, i));
    const auto manifest = nsb::write_dataset(scenes, config, out,
                                             config.schema_id == nsb::SchemaId::Clevr2d);
    json summary = {{"scenes", manifest.scene_ids.size()}, {"out", out}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_label(const std::string& rule_text, const std::string& data_dir) {
    const auto scenes = nsb::read_dataset(data_dir);
    if (scenes.empty()) throw nsb::Error("EMPTY_DATASET", "no scenes in " + data_dir);
    const nsb::RuleSpec rule = nsb::parse_rule(rule_text);
    const auto& schema = scenes.front().schema();
    rule.validate(schema);
    long positives = 0;
    for (const auto& scene : scenes) {
        if (nsb::evaluate_rule(rule, nsb::symbolic_scene_from_ground_truth(scene), schema)) {
            ++positives;
        }
    }
    json summary = {{"rule", nsb::rule_to_string(rule)},
                    {"scenes", scenes.size()},
                    {"positives", positives},
                    {"base_rate", static_cast<double>(positives) / scenes.size()}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_simulate(const std::string& data_dir, const std::string& profile_name, std::uint64_t seed,
                 const std::string& out) {
    const auto scenes = nsb::read_dataset(data_dir);
    if (scenes.empty()) throw nsb::Error("EMPTY_DATASET", "no scenes in " + data_dir);
    const nsb::NoiseProfile profile = nsb::resolve_profile(profile_name);
    const auto& schema = scenes.front().schema();
    profile.validate(schema);

    std::filesystem::create_directories(std::filesystem::path(out) / "symbolic");
    nsb::PredicateQuality quality;
    for (const auto& scene : scenes) {
        nsb::GroundedScene grounded;
        if (profile.is_oracle()) {
            grounded = nsb::grounded_scene_from_ground_truth(scene);
        } else {
            nsb::Rng rng(nsb::hash_combine(seed, static_cast<std::uint64_t>(scene.scene_id)));
            const auto slots = nsb::simulate_slots(scene, profile, schema.k_max(), rng);
            grounded = nsb::pipeline_ground(slots.slots, schema, scene.scene_id);
        }
        quality.merge(nsb::predicate_quality(grounded, scene));
        std::snprintf(scene_file_suffix_buf, sizeof(scene_file_suffix_buf), "scene_%06lld.json",
                      static_cast<long long>(scene.scene_id));
        write_file(std::filesystem::path(out) / "symbolic" / scene_file_suffix_buf,
                   nsb::symbolic_scene_to_json(grounded.sym));
    }
    json summary = {{"profile", profile.label},
                    {"scenes", scenes.size()},
                    {"presence_accuracy", quality.presence_accuracy()},
                    {"coord_mae", quality.coord_mae()}};
    for (int c = 0; c < schema.num_concepts(); ++c) {
        summary["concept_accuracy"][schema.concept_name(c)] =
            quality.concept_accuracy(schema.concept_name(c));
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_fit(const std::string& engine, const std::string& rule_text, const std::string& profile,
            const std::string& schema_name, int n_pos, int n_neg, const std::string& eval_source,
            std::uint64_t seed, const std::string& out) {
    const nsb::SchemaId schema_id = nsb::schema_id_from_string(schema_name);
    const auto& schema = nsb::AttributeSchema::by_id(schema_id);
    const nsb::RuleSpec rule = nsb::parse_rule(rule_text);
    const nsb::LabeledDataset dataset = nsb::build_labeled_dataset(
        rule, nsb::GenConfig::defaults(schema_id, 0), nsb::resolve_profile(profile), n_pos, n_neg,
        seed);

    nsb::Rng split_rng(nsb::hash_combine(seed, nsb::hash_str("split")));
    const nsb::Split split =
        nsb::make_split(static_cast<int>(dataset.items.size()), 0.8, split_rng);
    std::vector<const nsb::GroundedScene*> train;
    std::vector<char> train_y;
    for (int i : split.train) {
        train.push_back(&dataset.items[static_cast<std::size_t>(i)].observed);
        train_y.push_back(dataset.items[static_cast<std::size_t>(i)].label ? 1 : 0);
    }
    auto reasoner =
        nsb::make_reasoner(engine, schema, nsb::hash_combine(seed, nsb::hash_str("engine")));
    reasoner->fit(train, train_y);

    std::vector<char> predictions, labels;
    for (int i : split.test) {
        const auto& item = dataset.items[static_cast<std::size_t>(i)];
        const nsb::GroundedScene& scene = eval_source == "truth" ? item.truth : item.observed;
        predictions.push_back(reasoner->predict(scene) ? 1 : 0);
        labels.push_back(item.label ? 1 : 0);
    }
    const nsb::BinaryMetrics metrics = nsb::f1_score(predictions, labels);

    if (!out.empty()) write_file(std::filesystem::path(out) / "model.json", reasoner->serialize());
    json summary = {{"engine", engine},
                    {"rule", nsb::rule_to_string(rule)},
                    {"profile", profile},
                    {"train_size", train.size()},
                    {"test_size", labels.size()},
                    {"f1", metrics.f1},
                    {"precision", metrics.precision},
                    {"recall", metrics.recall},
                    {"iterations", reasoner->iterations()}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

std::vector<char> read_binary_array(const std::string& path) {
    const json doc = json::parse(read_file(path));
    std::vector<char> out;
    for (const auto& v : doc) out.push_back(v.get<int>() != 0 ? 1 : 0);
    return out;
}

int run_eval(const std::string& predictions_path, const std::string& labels_path) {
    const auto metrics =
        nsb::f1_score(read_binary_array(predictions_path), read_binary_array(labels_path));
    json summary = {{"f1", metrics.f1},
                    {"precision", metrics.precision},
                    {"recall", metrics.recall},
                    {"tp", metrics.tp},
                    {"fp", metrics.fp},
                    {"fn", metrics.fn},
                    {"tn", metrics.tn}};
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_rq3(const std::string& config_path, const std::string& out, std::uint64_t seed, int jobs,
            bool small) {
    nsb::ExperimentConfig config = config_path.empty()
                                       ? nsb::default_rq3_config(small)
                                       : nsb::experiment_config_from_json(read_file(config_path));
    if (seed != 0) config.base_seed = seed;
    if (jobs != 0) config.jobs = jobs;
    const nsb::ExperimentReport report = nsb::run_experiment(config);
    const auto files = nsb::emit_report(report, out);
    json summary = {{"out", out}, {"files", json::array()}, {"runs", report.runs.size()}};
    for (const auto& f : files) summary["files"].push_back(f.string());
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_report(const std::string& in_path, const std::string& out) {
    const nsb::ExperimentReport report = nsb::report_from_json(read_file(in_path));
    const auto files = nsb::emit_report(report, out);
    json summary = {{"out", out}, {"files", json::array()}};
    for (const auto& f : files) summary["files"].push_back(f.string());
    std::cout << summary.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"scene generation, simulated perception, and rule-induction bench"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    std::string config_path;
    std::string out = "out";
    int jobs = 0;
    app.add_option("--seed", seed, "base RNG seed");
    app.add_option("--config", config_path, "config file (JSON)");
    app.add_option("--out", out, "output directory");
    app.add_option("--jobs", jobs, "worker threads");

    auto* gen = app.add_subcommand("gen", "generate a scene dataset");
    std::string schema = "clevr_2d";
    int count = 100;
    gen->add_option("--schema", schema, "clevr_2d or clevr_attr");
    gen->add_option("--count", count, "number of scenes");

    auto* label = app.add_subcommand("label", "apply a rule to a dataset, report base rate");
    std::string rule_text;
    std::string rule_file;
    std::string data_dir;
    label->add_option("--rule", rule_text, "rule expression");
    label->add_option("--rule-file", rule_file, "file containing a rule expression");
    label->add_option("--data", data_dir, "dataset directory")->required();

    auto* simulate = app.add_subcommand("simulate", "apply a noise profile to a dataset");
    std::string profile = "sup15";
    simulate->add_option("--profile", profile, "builtin profile label or profile file");
    simulate->add_option("--data", data_dir, "dataset directory")->required();

    auto* fit = app.add_subcommand("fit", "fit one engine on a freshly built labeled dataset");
    std::string engine = "ilp";
    int n_pos = 100;
    std::string fit_eval_source = "observed";
    int n_neg = 400;
    fit->add_option("--engine", engine, "ilp, dt, bn, or nscl");
    fit->add_option("--rule", rule_text, "rule expression");
    fit->add_option("--rule-file", rule_file, "file containing a rule expression");
    fit->add_option("--profile", profile, "noise profile");
    fit->add_option("--schema", schema, "clevr_attr or clevr_2d");
    fit->add_option("--n-pos", n_pos, "positive scenes");
    fit->add_option("--n-neg", n_neg, "negative scenes");
    fit->add_option("--eval-source", fit_eval_source, "observed or truth test scenes");

    auto* eval = app.add_subcommand("eval", "score prediction/label arrays");
    std::string predictions_path;
    std::string labels_path;
    eval->add_option("--predictions", predictions_path, "JSON array of 0/1")->required();
    eval->add_option("--labels", labels_path, "JSON array of 0/1")->required();

    auto* rq3 = app.add_subcommand("repro-rq3", "run the benchmark grid and emit reports");
    bool full = false;
    rq3->add_flag("--full", full, "5000-scene pools instead of 500");

    auto* report = app.add_subcommand("report", "regenerate CSV/SVG from a JSON report");
    std::string in_path;
    report->add_option("--in", in_path, "report.json path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen(schema, count, seed, out, config_path);
        if (label->parsed()) {
            if (!rule_file.empty()) rule_text = read_file(rule_file);
            if (rule_text.empty()) throw nsb::Error("INVALID_ARGUMENT", "--rule or --rule-file");
            return run_label(rule_text, data_dir);
        }
        if (simulate->parsed()) return run_simulate(data_dir, profile, seed, out);
        if (fit->parsed()) {
            if (!rule_file.empty()) rule_text = read_file(rule_file);
            if (rule_text.empty()) throw nsb::Error("INVALID_ARGUMENT", "--rule or --rule-file");
            if (fit->count("--schema") == 0) schema = "clevr_attr";
            return run_fit(engine, rule_text, profile, schema, n_pos, n_neg, fit_eval_source, seed, out);
        }
        if (eval->parsed()) return run_eval(predictions_path, labels_path);
        if (rq3->parsed()) return run_rq3(config_path, out, seed, jobs, !full);
        if (report->parsed()) return run_report(in_path, out);
    } catch (const nsb::Error& e) {
        json err = {{"code", e.code()}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err = {{"code", "INTERNAL"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
