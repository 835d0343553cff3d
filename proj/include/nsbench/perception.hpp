#pragma once

#include <map>
#include <string>
#include <vector>

#include "nsbench/rng.hpp"
#include "nsbench/scene.hpp"

namespace nsb {

// Stand-in for one VAE slot: presence probability, per-concept categorical
// score vectors, and predicted coordinates.
struct PredictedSlot {
    int slot_index = 0;
    double presence_prob = 0.0;
    std::vector<std::vector<double>> concept_scores; // per schema concept, sums to 1
    Position coords;
};

// Calibration targets for the perception simulator. Accuracies are the
// probability that the grounded (argmax) value equals the true one; coord_mae
// is the per-axis mean absolute coordinate error.
struct NoiseProfile {
    std::string label;
    std::map<std::string, double> concept_accuracy;
    double presence_accuracy = 1.0;
    double coord_mae = 0.0;
    double confident_prob = 0.9; // mass placed on the sampled value

    bool is_oracle() const { return label == "oracle"; }
    void validate(const AttributeSchema& schema) const;

    static NoiseProfile oracle();
    // the shipped calibration rows, by label ("sup1".."sup100", "oracle")
    static NoiseProfile builtin(const std::string& label);
    static const std::vector<std::string>& builtin_labels();
};

std::string noise_profile_to_json(const NoiseProfile& profile);
NoiseProfile noise_profile_from_json(const std::string& text);

struct SimulatedSlots {
    std::vector<PredictedSlot> slots;
    // provenance: for each scene object, the slot it was emitted into
    std::vector<int> object_to_slot;
};

// Corrupts ground truth into k predicted slots. Slot order is a random
// permutation; trailing slots are distractors. Throws TOO_MANY_OBJECTS.
SimulatedSlots simulate_slots(const Scene& scene, const NoiseProfile& profile, int k, Rng& rng);

// Presence thresholding + argmax grounding + relation derivation.
GroundedScene pipeline_ground(const std::vector<PredictedSlot>& slots,
                              const AttributeSchema& schema, std::int64_t scene_id,
                              double threshold = 0.5);

// Counter-based so per-scene results merge exactly across a corpus.
struct PredicateQuality {
    std::map<std::string, long> concept_correct;
    std::map<std::string, long> concept_total;
    long matched = 0;
    long presence_misses = 0;
    long presence_false_alarms = 0;
    double coord_abs_error_sum = 0.0;
    long coord_terms = 0;

    double concept_accuracy(const std::string& name) const;
    // matched / (matched + misses + false alarms)
    double presence_accuracy() const;
    double coord_mae() const; // per-axis MAE over matched pairs
    void merge(const PredicateQuality& other);
};

// Matches predictions to ground truth with the Hungarian algorithm on
// coordinate L2 cost, then scores concepts, presence, and coordinates.
PredicateQuality predicate_quality(const GroundedScene& pred, const Scene& truth);

} // namespace nsb
