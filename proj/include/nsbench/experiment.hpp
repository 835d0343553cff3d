#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsbench/dataset.hpp"
#include "nsbench/metrics.hpp"
#include "nsbench/perception.hpp"

namespace nsb {

struct RuleEntry {
    std::string name;
    std::string text;
};

struct ExperimentConfig {
    SchemaId schema_id = SchemaId::ClevrAttr;
    std::vector<RuleEntry> rules;
    std::vector<std::string> profiles; // builtin labels or profile file paths
    std::vector<std::string> engines;
    int n_pos = 100;
    int n_neg = 400;
    int runs = 5;
    double train_fraction = 0.8;
    // Scenes used for test-time prediction: "observed" feeds the model the
    // same simulated perception output it trained on; "truth" scores it on
    // clean ground-truth groundings instead.
    std::string eval_source = "observed";
    std::uint64_t base_seed = 1;
    int jobs = 1;
    std::optional<GenConfig> gen; // schema defaults when absent

    void validate() const;
    GenConfig gen_config() const;
};

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const std::string& text);

// The Table-style benchmark grid: five rule families x engines x profiles.
// small=true shrinks the pool to 500 scenes (400 neg / 100 pos).
ExperimentConfig default_rq3_config(bool small);

struct RunResult {
    std::string rule;
    std::string profile;
    std::string engine;
    int run = 0;
    std::uint64_t seed = 0;
    BinaryMetrics metrics;
    long iterations = 0; // ILP only
    double wall_seconds = 0.0;
};

struct CellAggregate {
    std::string rule;
    std::string profile;
    std::string engine;
    int runs = 0;
    double f1_mean = 0.0;
    double f1_std = 0.0;
    double precision_mean = 0.0;
    double recall_mean = 0.0;
    double iterations_mean = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<RunResult> runs;
    std::vector<CellAggregate> aggregates;
};

// Deterministic in config (wall-clock timings aside, which never enter the
// CSV). Per-run seed = hash(base_seed, rule, profile, engine, run).
ExperimentReport run_experiment(const ExperimentConfig& config);

NoiseProfile resolve_profile(const std::string& label_or_path);

std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);
std::string report_to_svg(const ExperimentReport& report, const std::string& rule_name);

// Writes report.csv, report.json, and one grouped-bar SVG per rule.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& directory);

} // namespace nsb
