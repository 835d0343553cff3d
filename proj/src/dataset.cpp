#include "nsbench/dataset.hpp"

#include <algorithm>

#include "nsbench/error.hpp"

namespace nsb {

int LabeledDataset::positives() const {
    int n = 0;
    for (const auto& item : items) n += item.label ? 1 : 0;
    return n;
}

LabeledDataset build_labeled_dataset(const RuleSpec& rule, const GenConfig& config,
                                     const NoiseProfile& profile, int n_pos, int n_neg,
                                     std::uint64_t seed) {
    if (n_pos < 1 || n_neg < 1) throw Error("INVALID_ARGUMENT", "need positive quotas");
    config.validate();
    const AttributeSchema& schema = AttributeSchema::by_id(config.schema_id);
    rule.validate(schema);
    profile.validate(schema);

    GenConfig gen = config;
    gen.base_seed = hash_combine(seed, hash_str("scenes"));

    LabeledDataset out;
    out.schema_id = config.schema_id;
    out.rule_text = rule_to_string(rule);
    out.profile_label = profile.label;
    out.seed = seed;
    out.items.reserve(static_cast<std::size_t>(n_pos + n_neg));

    constexpr std::int64_t kBudget = 1'000'000;
    int pos_left = n_pos;
    int neg_left = n_neg;
    for (std::int64_t index = 0; index < kBudget && (pos_left > 0 || neg_left > 0); ++index) {
        Scene scene = generate_scene(gen, index);
        GroundedScene truth = grounded_scene_from_ground_truth(scene);
        const bool label = evaluate_rule(rule, truth.sym, schema);
        int& left = label ? pos_left : neg_left;
        if (left == 0) continue;
        --left;

        LabeledItem item;
        item.label = label;
        if (profile.is_oracle()) {
            item.observed = truth;
        } else {
            Rng noise_rng(hash_combine(hash_combine(seed, hash_str("noise")),
                                       static_cast<std::uint64_t>(index)));
            const auto sim = simulate_slots(scene, profile, schema.k_max(), noise_rng);
            item.observed = pipeline_ground(sim.slots, schema, scene.scene_id);
        }
        item.truth = std::move(truth);
        out.items.push_back(std::move(item));
    }
    if (pos_left > 0) {
        throw Error("UNSATISFIABLE_RULE",
                    "rule '" + out.rule_text + "' produced too few positives within budget");
    }
    if (neg_left > 0) {
        throw Error("UNSATISFIABLE_RULE",
                    "rule '" + out.rule_text + "' produced too few negatives within budget");
    }
    return out;
}

Split make_split(int n_items, double train_fraction, Rng& rng) {
    if (n_items < 2) throw Error("INVALID_ARGUMENT", "need at least two items to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error("INVALID_ARGUMENT", "train fraction must be in (0,1)");
    }
    std::vector<int> order(static_cast<std::size_t>(n_items));
    for (int i = 0; i < n_items; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    int n_train = static_cast<int>(train_fraction * n_items);
    n_train = std::clamp(n_train, 1, n_items - 1);
    Split split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.test.assign(order.begin() + n_train, order.end());
    return split;
}

} // namespace nsb
