#include "nsbench/experiment.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "nsbench/error.hpp"
#include "nsbench/reasoners.hpp"

#include "json.hpp"

namespace nsb {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::uint64_t cell_seed(const ExperimentConfig& config, const RuleEntry& rule,
                        const std::string& profile) {
    return hash_combine(hash_combine(config.base_seed, hash_str(rule.text)), hash_str(profile));
}

std::uint64_t run_seed(const ExperimentConfig& config, const RuleEntry& rule,
                       const std::string& profile, const std::string& engine, int run) {
    return hash_combine(hash_combine(cell_seed(config, rule, profile), hash_str(engine)),
                        static_cast<std::uint64_t>(run));
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name) {
        out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
    }
    return out;
}

} // namespace

void ExperimentConfig::validate() const {
    if (rules.empty() || profiles.empty() || engines.empty()) {
        throw Error("INVALID_CONFIG", "rules, profiles, and engines must be non-empty");
    }
    if (runs < 1) throw Error("INVALID_CONFIG", "runs must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error("INVALID_CONFIG", "train fraction must be in (0,1)");
    }
    if (n_pos < 1 || n_neg < 1) throw Error("INVALID_CONFIG", "dataset sizes must be positive");
    if (eval_source != "truth" && eval_source != "observed") {
        throw Error("INVALID_CONFIG", "eval_source must be 'truth' or 'observed'");
    }
    if (jobs < 1) throw Error("INVALID_CONFIG", "jobs must be >= 1");
    gen_config().validate();
    const AttributeSchema& schema = AttributeSchema::by_id(schema_id);
    for (const RuleEntry& rule : rules) parse_rule(rule.text).validate(schema);
    for (const std::string& p : profiles) resolve_profile(p).validate(schema);
    for (const std::string& e : engines) make_reasoner(e, schema, 0);
}

GenConfig ExperimentConfig::gen_config() const {
    if (gen) return *gen;
    return GenConfig::defaults(schema_id, 0);
}

NoiseProfile resolve_profile(const std::string& label_or_path) {
    for (const std::string& label : NoiseProfile::builtin_labels()) {
        if (label == label_or_path) return NoiseProfile::builtin(label);
    }
    std::ifstream in(label_or_path);
    if (!in) {
        throw Error("UNKNOWN_PROFILE",
                    "'" + label_or_path + "' is neither a builtin profile nor a readable file");
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return noise_profile_from_json(text);
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    json doc;
    doc["schema"] = to_string(config.schema_id);
    doc["rules"] = json::array();
    for (const RuleEntry& r : config.rules) {
        doc["rules"].push_back({{"name", r.name}, {"text", r.text}});
    }
    doc["profiles"] = config.profiles;
    doc["engines"] = config.engines;
    doc["n_pos"] = config.n_pos;
    doc["n_neg"] = config.n_neg;
    doc["runs"] = config.runs;
    doc["train_fraction"] = config.train_fraction;
    doc["eval_source"] = config.eval_source;
    doc["base_seed"] = config.base_seed;
    doc["jobs"] = config.jobs;
    if (config.gen) doc["gen"] = json::parse(gen_config_to_json(*config.gen));
    return doc.dump(2);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        ExperimentConfig config;
        config.schema_id = schema_id_from_string(doc.at("schema").get<std::string>());
        for (const auto& r : doc.at("rules")) {
            config.rules.push_back(
                {r.at("name").get<std::string>(), r.at("text").get<std::string>()});
        }
        config.profiles = doc.at("profiles").get<std::vector<std::string>>();
        config.engines = doc.at("engines").get<std::vector<std::string>>();
        config.n_pos = doc.at("n_pos").get<int>();
        config.n_neg = doc.at("n_neg").get<int>();
        config.runs = doc.value("runs", 5);
        config.train_fraction = doc.value("train_fraction", 0.8);
        config.eval_source = doc.value("eval_source", std::string("observed"));
        config.base_seed = doc.value("base_seed", std::uint64_t{1});
        config.jobs = doc.value("jobs", 1);
        if (doc.contains("gen")) config.gen = gen_config_from_json(doc.at("gen").dump());
        config.validate();
        return config;
    } catch (const json::exception& e) {
        throw Error("PARSE_ERROR", std::string("experiment config: ") + e.what());
    }
}

ExperimentConfig default_rq3_config(bool small) {
    ExperimentConfig config;
    config.schema_id = SchemaId::ClevrAttr;
    config.rules = {
        {"existential", "exists(size=large & color=red & shape=sphere)"},
        {"conjunctive", "exists(color=blue & shape=sphere) and exists(color=yellow & shape=cube)"},
        {"disjunctive",
         "exists(color=green & material=metal & shape=cylinder) or "
         "exists(color=yellow & material=rubber & shape=cube)"},
        {"cardinality", "count(material=metal) == 2"},
        {"universal", "forall(shape=sphere -> color=blue)"},
    };
    config.profiles = {"oracle", "sup15"};
    config.engines = {"ilp", "dt", "bn", "nscl"};
    config.n_pos = small ? 100 : 1000;
    config.n_neg = small ? 400 : 4000;
    config.runs = 5;
    config.base_seed = 1;
    return config;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    const AttributeSchema& schema = AttributeSchema::by_id(config.schema_id);

    struct Cell {
        const RuleEntry* rule;
        const std::string* profile;
    };
    std::vector<Cell> cells;
    for (const RuleEntry& rule : config.rules) {
        for (const std::string& profile : config.profiles) {
            cells.push_back({&rule, &profile});
        }
    }

    std::vector<std::vector<RunResult>> cell_results(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure_code;
    std::string failure_message;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t c = next.fetch_add(1);
            if (c >= cells.size() || failed.load()) return;
            const RuleEntry& rule = *cells[c].rule;
            const std::string& profile_name = *cells[c].profile;
            try {
                const RuleSpec spec = parse_rule(rule.text);
                const NoiseProfile profile = resolve_profile(profile_name);
                const std::uint64_t dataset_seed =
                    hash_combine(cell_seed(config, rule, profile_name), hash_str("dataset"));
                const LabeledDataset dataset = build_labeled_dataset(
                    spec, config.gen_config(), profile, config.n_pos, config.n_neg, dataset_seed);

                for (const std::string& engine : config.engines) {
                    for (int r = 0; r < config.runs; ++r) {
                        const std::uint64_t seed =
                            run_seed(config, rule, profile_name, engine, r);
                        const auto t0 = std::chrono::steady_clock::now();

                        Rng split_rng(hash_combine(seed, hash_str("split")));
                        const Split split = make_split(
                            static_cast<int>(dataset.items.size()), config.train_fraction,
                            split_rng);
                        std::vector<const GroundedScene*> train;
                        std::vector<char> train_y;
                        for (int i : split.train) {
                            train.push_back(&dataset.items[static_cast<std::size_t>(i)].observed);
                            train_y.push_back(
                                dataset.items[static_cast<std::size_t>(i)].label ? 1 : 0);
                        }
                        auto reasoner = make_reasoner(engine, schema,
                                                      hash_combine(seed, hash_str("engine")));
                        reasoner->fit(train, train_y);

                        std::vector<char> predictions;
                        std::vector<char> labels;
                        for (int i : split.test) {
                            const LabeledItem& item = dataset.items[static_cast<std::size_t>(i)];
                            const GroundedScene& scene =
                                config.eval_source == "truth" ? item.truth : item.observed;
                            predictions.push_back(reasoner->predict(scene) ? 1 : 0);
                            labels.push_back(item.label ? 1 : 0);
                        }
                        RunResult result;
                        result.rule = rule.name;
                        result.profile = profile_name;
                        result.engine = engine;
                        result.run = r;
                        result.seed = seed;
                        result.metrics = f1_score(predictions, labels);
                        result.iterations = reasoner->iterations();
                        result.wall_seconds =
                            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();
                        cell_results[c].push_back(std::move(result));
                    }
                }
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failed.exchange(true)) {
                    failure_code = e.code();
                    failure_message = "rule=" + rule.name + " profile=" + profile_name + ": " +
                                      e.what();
                }
                return;
            }
        }
    };

    const int jobs = std::min<int>(config.jobs, static_cast<int>(cells.size()));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw Error(failure_code, failure_message);

    ExperimentReport report;
    report.config = config;
    for (const auto& rs : cell_results) {
        report.runs.insert(report.runs.end(), rs.begin(), rs.end());
    }

    for (const RuleEntry& rule : config.rules) {
        for (const std::string& profile : config.profiles) {
            for (const std::string& engine : config.engines) {
                std::vector<double> f1s, precisions, recalls, iters;
                for (const RunResult& r : report.runs) {
                    if (r.rule != rule.name || r.profile != profile || r.engine != engine) continue;
                    f1s.push_back(r.metrics.f1);
                    precisions.push_back(r.metrics.precision);
                    recalls.push_back(r.metrics.recall);
                    iters.push_back(static_cast<double>(r.iterations));
                }
                CellAggregate agg;
                agg.rule = rule.name;
                agg.profile = profile;
                agg.engine = engine;
                agg.runs = static_cast<int>(f1s.size());
                agg.f1_mean = mean(f1s);
                agg.f1_std = sample_std(f1s);
                agg.precision_mean = mean(precisions);
                agg.recall_mean = mean(recalls);
                agg.iterations_mean = mean(iters);
                report.aggregates.push_back(agg);
            }
        }
    }
    return report;
}

std::string report_to_csv(const ExperimentReport& report) {
    std::string out =
        "kind,rule,profile,engine,run,f1,precision,recall,tp,fp,fn,tn,iterations,"
        "f1_mean,f1_std,precision_mean,recall_mean\n";
    for (const RunResult& r : report.runs) {
        out += "run," + r.rule + "," + r.profile + "," + r.engine + "," + std::to_string(r.run) +
               "," + fmt(r.metrics.f1) + "," + fmt(r.metrics.precision) + "," +
               fmt(r.metrics.recall) + "," + std::to_string(r.metrics.tp) + "," +
               std::to_string(r.metrics.fp) + "," + std::to_string(r.metrics.fn) + "," +
               std::to_string(r.metrics.tn) + "," + std::to_string(r.iterations) + ",,,,\n";
    }
    for (const CellAggregate& a : report.aggregates) {
        out += "aggregate," + a.rule + "," + a.profile + "," + a.engine + ",,,,,,,,," +
               fmt(a.iterations_mean) + "," + fmt(a.f1_mean) + "," + fmt(a.f1_std) + "," +
               fmt(a.precision_mean) + "," + fmt(a.recall_mean) + "\n";
    }
    return out;
}

std::string report_to_json(const ExperimentReport& report) {
    json doc;
    doc["config"] = json::parse(experiment_config_to_json(report.config));
    doc["runs"] = json::array();
    for (const RunResult& r : report.runs) {
        doc["runs"].push_back({{"rule", r.rule},
                               {"profile", r.profile},
                               {"engine", r.engine},
                               {"run", r.run},
                               {"seed", r.seed},
                               {"f1", r.metrics.f1},
                               {"precision", r.metrics.precision},
                               {"recall", r.metrics.recall},
                               {"tp", r.metrics.tp},
                               {"fp", r.metrics.fp},
                               {"fn", r.metrics.fn},
                               {"tn", r.metrics.tn},
                               {"iterations", r.iterations},
                               {"wall_seconds", r.wall_seconds}});
    }
    doc["aggregates"] = json::array();
    for (const CellAggregate& a : report.aggregates) {
        doc["aggregates"].push_back({{"rule", a.rule},
                                     {"profile", a.profile},
                                     {"engine", a.engine},
                                     {"runs", a.runs},
                                     {"f1_mean", a.f1_mean},
                                     {"f1_std", a.f1_std},
                                     {"precision_mean", a.precision_mean},
                                     {"recall_mean", a.recall_mean},
                                     {"iterations_mean", a.iterations_mean}});
    }
    return doc.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        ExperimentReport report;
        report.config = experiment_config_from_json(doc.at("config").dump());
        for (const auto& r : doc.at("runs")) {
            RunResult run;
            run.rule = r.at("rule").get<std::string>();
            run.profile = r.at("profile").get<std::string>();
            run.engine = r.at("engine").get<std::string>();
            run.run = r.at("run").get<int>();
            run.seed = r.at("seed").get<std::uint64_t>();
            run.metrics.f1 = r.at("f1").get<double>();
            run.metrics.precision = r.at("precision").get<double>();
            run.metrics.recall = r.at("recall").get<double>();
            run.metrics.tp = r.at("tp").get<long>();
            run.metrics.fp = r.at("fp").get<long>();
            run.metrics.fn = r.at("fn").get<long>();
            run.metrics.tn = r.at("tn").get<long>();
            run.iterations = r.at("iterations").get<long>();
            run.wall_seconds = r.at("wall_seconds").get<double>();
            report.runs.push_back(std::move(run));
        }
        for (const auto& a : doc.at("aggregates")) {
            CellAggregate agg;
            agg.rule = a.at("rule").get<std::string>();
            agg.profile = a.at("profile").get<std::string>();
            agg.engine = a.at("engine").get<std::string>();
            agg.runs = a.at("runs").get<int>();
            agg.f1_mean = a.at("f1_mean").get<double>();
            agg.f1_std = a.at("f1_std").get<double>();
            agg.precision_mean = a.at("precision_mean").get<double>();
            agg.recall_mean = a.at("recall_mean").get<double>();
            agg.iterations_mean = a.at("iterations_mean").get<double>();
            report.aggregates.push_back(std::move(agg));
        }
        return report;
    } catch (const json::exception& e) {
        throw Error("PARSE_ERROR", std::string("report: ") + e.what());
    }
}

std::string report_to_svg(const ExperimentReport& report, const std::string& rule_name) {
    const auto& profiles = report.config.profiles;
    const auto& engines = report.config.engines;
    static const std::vector<std::string> palette = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                                     "#8172b3", "#937860"};
    const int bar_w = 22;
    const int group_gap = 28;
    const int group_w = bar_w * static_cast<int>(engines.size()) + group_gap;
    const int left = 60;
    const int plot_h = 220;
    const int top = 40;
    const int width = left + group_w * static_cast<int>(profiles.size()) + 160;
    const int height = top + plot_h + 60;

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<text x=\"" + std::to_string(left) + "\" y=\"24\" font-size=\"16\">" + rule_name +
           " (mean F1 over " + std::to_string(report.config.runs) + " runs)</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = tick * 0.25;
        const int y = top + plot_h - static_cast<int>(v * plot_h);
        svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(y) + "\" x2=\"" +
               std::to_string(left + group_w * static_cast<int>(profiles.size())) + "\" y2=\"" +
               std::to_string(y) + "\" stroke=\"#cccccc\"/>\n";
        svg += "<text x=\"" + std::to_string(left - 38) + "\" y=\"" + std::to_string(y + 4) +
               "\" font-size=\"11\">" + fmt(v).substr(0, 4) + "</text>\n";
    }
    for (std::size_t p = 0; p < profiles.size(); ++p) {
        const int gx = left + static_cast<int>(p) * group_w;
        for (std::size_t e = 0; e < engines.size(); ++e) {
            double f1 = 0.0;
            for (const CellAggregate& a : report.aggregates) {
                if (a.rule == rule_name && a.profile == profiles[p] && a.engine == engines[e]) {
                    f1 = a.f1_mean;
                }
            }
            const int bh = static_cast<int>(f1 * plot_h);
            const int x = gx + static_cast<int>(e) * bar_w;
            svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" +
                   std::to_string(top + plot_h - bh) + "\" width=\"" + std::to_string(bar_w - 3) +
                   "\" height=\"" + std::to_string(bh) + "\" fill=\"" +
                   palette[e % palette.size()] + "\"/>\n";
        }
        svg += "<text x=\"" + std::to_string(gx) + "\" y=\"" + std::to_string(top + plot_h + 18) +
               "\" font-size=\"12\">" + profiles[p] + "</text>\n";
    }
    for (std::size_t e = 0; e < engines.size(); ++e) {
        const int y = top + static_cast<int>(e) * 18;
        const int x = left + group_w * static_cast<int>(profiles.size()) + 16;
        svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y - 10) +
               "\" width=\"12\" height=\"12\" fill=\"" + palette[e % palette.size()] + "\"/>\n";
        svg += "<text x=\"" + std::to_string(x + 18) + "\" y=\"" + std::to_string(y) +
               "\" font-size=\"12\">" + engines[e] + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    std::vector<std::filesystem::path> written;
    auto write = [&](const std::filesystem::path& path, const std::string& content) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
        out << content;
        written.push_back(path);
    };
    write(directory / "report.csv", report_to_csv(report));
    write(directory / "report.json", report_to_json(report));
    for (const RuleEntry& rule : report.config.rules) {
        write(directory / ("report_" + sanitize(rule.name) + ".svg"),
              report_to_svg(report, rule.name));
    }
    return written;
}

} // namespace nsb
