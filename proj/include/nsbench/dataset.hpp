#pragma once

#include <cstdint>
#include <vector>

#include "nsbench/generator.hpp"
#include "nsbench/perception.hpp"
#include "nsbench/rules.hpp"

namespace nsb {

struct LabeledItem {
    GroundedScene truth;    // ground-truth grounding
    GroundedScene observed; // simulated perception output (== truth for oracle)
    bool label = false;     // rule evaluated on ground truth
};

struct LabeledDataset {
    SchemaId schema_id = SchemaId::ClevrAttr;
    std::string rule_text;
    std::string profile_label;
    std::uint64_t seed = 0;
    std::vector<LabeledItem> items;

    int positives() const;
};

// Rejection-samples generated scenes until both label quotas are met, then
// pairs each kept scene with one simulated perception grounding. Deterministic
// in (config, profile, seed). Throws UNSATISFIABLE_RULE when a quota is still
// open after 10^6 candidate scenes.
LabeledDataset build_labeled_dataset(const RuleSpec& rule, const GenConfig& config,
                                     const NoiseProfile& profile, int n_pos, int n_neg,
                                     std::uint64_t seed);

struct Split {
    std::vector<int> train;
    std::vector<int> test;
};

// Shuffled index split; both parts keep at least one item.
Split make_split(int n_items, double train_fraction, Rng& rng);

} // namespace nsb
