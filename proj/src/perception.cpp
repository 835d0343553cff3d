#include "nsbench/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nsbench/error.hpp"
#include "nsbench/hungarian.hpp"

#include <nlohmann/json.hpp>

namespace nsb {

using nlohmann::json;

namespace {

constexpr double kHalfNormalFactor = 1.2533141373155003; // sqrt(pi/2)

// Table of calibration rows by supervision level (fractions, not percent).
struct BuiltinRow {
    const char* label;
    double shape, color, size, material, presence, coord_mae;
};

constexpr BuiltinRow kBuiltinRows[] = {
    {"sup1", 0.7140, 0.2182, 0.8808, 0.8358, 0.6586, 0.2646},
    {"sup5", 0.8079, 0.4446, 0.9614, 0.9042, 0.7849, 0.1603},
    {"sup15", 0.8414, 0.7872, 0.9741, 0.9414, 0.8384, 0.0989},
    {"sup25", 0.8407, 0.8214, 0.9751, 0.9388, 0.8479, 0.0873},
    {"sup50", 0.8644, 0.8821, 0.9780, 0.9540, 0.8865, 0.0772},
    {"sup75", 0.8944, 0.8921, 0.9795, 0.9590, 0.9065, 0.0572},
    {"sup100", 0.9310, 0.9138, 0.9880, 0.9676, 0.9380, 0.0425},
};

} // namespace

void NoiseProfile::validate(const AttributeSchema& schema) const {
    for (int c = 0; c < schema.num_concepts(); ++c) {
        auto it = concept_accuracy.find(schema.concept_name(c));
        if (it == concept_accuracy.end()) {
            throw Error("INVALID_PROFILE", "missing accuracy for " + schema.concept_name(c));
        }
        if (!(it->second > 0.0) || it->second > 1.0) {
            throw Error("INVALID_PROFILE", "accuracy out of (0,1]");
        }
    }
    if (!(presence_accuracy > 0.0) || presence_accuracy > 1.0) {
        throw Error("INVALID_PROFILE", "presence accuracy out of (0,1]");
    }
    if (coord_mae < 0.0) throw Error("INVALID_PROFILE", "negative coord_mae");
    int min_domain = schema.domain_size(0);
    for (int c = 1; c < schema.num_concepts(); ++c) {
        min_domain = std::min(min_domain, schema.domain_size(c));
    }
    if (!(confident_prob > 1.0 / min_domain)) {
        throw Error("INVALID_PROFILE", "confident_prob too low for argmax recovery");
    }
}

NoiseProfile NoiseProfile::oracle() {
    NoiseProfile p;
    p.label = "oracle";
    for (const char* c : {"shape", "color", "size", "material"}) p.concept_accuracy[c] = 1.0;
    p.presence_accuracy = 1.0;
    p.coord_mae = 0.0;
    p.confident_prob = 1.0 - 1e-12; // keep probability off the excluded endpoint semantics
    return p;
}

NoiseProfile NoiseProfile::builtin(const std::string& label) {
    if (label == "oracle") return oracle();
    for (const auto& row : kBuiltinRows) {
        if (label == row.label) {
            NoiseProfile p;
            p.label = label;
            p.concept_accuracy = {{"shape", row.shape},
                                  {"color", row.color},
                                  {"size", row.size},
                                  {"material", row.material}};
            p.presence_accuracy = row.presence;
            p.coord_mae = row.coord_mae;
            return p;
        }
    }
    throw Error("UNKNOWN_PROFILE", label);
}

const std::vector<std::string>& NoiseProfile::builtin_labels() {
    static const std::vector<std::string> labels = {"sup1",  "sup5",  "sup15",  "sup25",
                                                    "sup50", "sup75", "sup100", "oracle"};
    return labels;
}

std::string noise_profile_to_json(const NoiseProfile& profile) {
    json doc = {{"label", profile.label},
                {"concept_accuracy", profile.concept_accuracy},
                {"presence_accuracy", profile.presence_accuracy},
                {"coord_mae", profile.coord_mae},
                {"confident_prob", profile.confident_prob}};
    return doc.dump(2);
}

NoiseProfile noise_profile_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("PARSE_ERROR", e.what());
    }
    try {
        NoiseProfile p;
        p.label = doc.at("label").get<std::string>();
        p.concept_accuracy = doc.at("concept_accuracy").get<std::map<std::string, double>>();
        p.presence_accuracy = doc.at("presence_accuracy").get<double>();
        p.coord_mae = doc.at("coord_mae").get<double>();
        p.confident_prob = doc.value("confident_prob", 0.9);
        return p;
    } catch (const json::exception& e) {
        throw Error("PARSE_ERROR", e.what());
    }
}

namespace {

std::vector<double> score_vector(int domain_size, int sampled, double p_hi) {
    std::vector<double> scores(static_cast<std::size_t>(domain_size),
                               domain_size > 1 ? (1.0 - p_hi) / (domain_size - 1) : 0.0);
    scores[static_cast<std::size_t>(sampled)] = domain_size > 1 ? p_hi : 1.0;
    return scores;
}

} // namespace

SimulatedSlots simulate_slots(const Scene& scene, const NoiseProfile& profile, int k, Rng& rng) {
    const auto& sch = scene.schema();
    profile.validate(sch);
    const int n = static_cast<int>(scene.objects.size());
    if (n > k) throw Error("TOO_MANY_OBJECTS", "scene has more objects than slots");

    const double sigma = profile.coord_mae * kHalfNormalFactor;

    // slot order carries no information
    std::vector<int> slot_of(static_cast<std::size_t>(k));
    std::iota(slot_of.begin(), slot_of.end(), 0);
    rng.shuffle(slot_of);

    SimulatedSlots out;
    out.slots.resize(static_cast<std::size_t>(k));
    out.object_to_slot.resize(static_cast<std::size_t>(n));

    for (int i = 0; i < k; ++i) {
        const int slot_index = slot_of[static_cast<std::size_t>(i)];
        PredictedSlot slot;
        slot.slot_index = slot_index;
        slot.concept_scores.resize(static_cast<std::size_t>(sch.num_concepts()));

        if (i < n) {
            const auto& obj = scene.objects[static_cast<std::size_t>(i)];
            out.object_to_slot[static_cast<std::size_t>(i)] = slot_index;
            for (int c = 0; c < sch.num_concepts(); ++c) {
                const int d = sch.domain_size(c);
                const double acc = profile.concept_accuracy.at(sch.concept_name(c));
                int sampled = obj.attributes[static_cast<std::size_t>(c)];
                if (!rng.bernoulli(acc)) {
                    // uniform over the wrong values
                    int wrong = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d - 1)));
                    if (wrong >= sampled) ++wrong;
                    sampled = wrong;
                }
                slot.concept_scores[static_cast<std::size_t>(c)] =
                    score_vector(d, sampled, profile.confident_prob);
            }
            slot.coords.resize(obj.position.size());
            for (std::size_t d = 0; d < obj.position.size(); ++d) {
                slot.coords[d] = obj.position[d] + rng.gaussian(0.0, sigma);
            }
            // thresholding at 0.5 keeps the slot with probability a_p
            slot.presence_prob = rng.bernoulli(profile.presence_accuracy)
                                     ? rng.uniform(0.5, 1.0)
                                     : rng.uniform(0.0, 0.5);
        } else {
            // distractor slot: random content, discarded with probability a_p
            for (int c = 0; c < sch.num_concepts(); ++c) {
                const int d = sch.domain_size(c);
                const int sampled = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d)));
                slot.concept_scores[static_cast<std::size_t>(c)] =
                    score_vector(d, sampled, profile.confident_prob);
            }
            slot.coords.resize(static_cast<std::size_t>(sch.position_dims()));
            for (auto& x : slot.coords) x = rng.uniform();
            slot.presence_prob = rng.bernoulli(profile.presence_accuracy)
                                     ? rng.uniform(0.0, 0.5)
                                     : rng.uniform(0.5, 1.0);
        }
        out.slots[static_cast<std::size_t>(slot_index)] = std::move(slot);
    }
    return out;
}

GroundedScene pipeline_ground(const std::vector<PredictedSlot>& slots,
                              const AttributeSchema& schema, std::int64_t scene_id,
                              double threshold) {
    GroundedScene out;
    out.sym.scene_id = scene_id;
    out.sym.source = SceneSource::SimulatedVae;

    int next_id = 0;
    for (const auto& slot : slots) {
        if (slot.presence_prob < threshold) continue;
        const int id = next_id++;
        out.sym.active_object_ids.push_back(id);
        out.coords.push_back(slot.coords);
        for (int c = 0; c < schema.num_concepts(); ++c) {
            const auto& scores = slot.concept_scores[static_cast<std::size_t>(c)];
            // argmax with lowest-index tie-break
            int arg = 0;
            for (int v = 1; v < static_cast<int>(scores.size()); ++v) {
                if (scores[static_cast<std::size_t>(v)] > scores[static_cast<std::size_t>(arg)]) {
                    arg = v;
                }
            }
            out.sym.atoms.push_back({schema.concept_name(c), id, schema.domain(c)[arg], -1});
        }
    }
    for (auto& rel : derive_relations(out.coords, schema.depth_axis())) {
        out.sym.atoms.push_back(std::move(rel));
    }
    out.sym.normalize();
    return out;
}

double PredicateQuality::concept_accuracy(const std::string& name) const {
    auto tot = concept_total.find(name);
    if (tot == concept_total.end() || tot->second == 0) return 0.0;
    auto cor = concept_correct.find(name);
    return static_cast<double>(cor == concept_correct.end() ? 0 : cor->second) / tot->second;
}

double PredicateQuality::presence_accuracy() const {
    const long denom = matched + presence_misses + presence_false_alarms;
    return denom == 0 ? 0.0 : static_cast<double>(matched) / denom;
}

double PredicateQuality::coord_mae() const {
    return coord_terms == 0 ? 0.0 : coord_abs_error_sum / coord_terms;
}

void PredicateQuality::merge(const PredicateQuality& other) {
    for (const auto& [k, v] : other.concept_correct) concept_correct[k] += v;
    for (const auto& [k, v] : other.concept_total) concept_total[k] += v;
    matched += other.matched;
    presence_misses += other.presence_misses;
    presence_false_alarms += other.presence_false_alarms;
    coord_abs_error_sum += other.coord_abs_error_sum;
    coord_terms += other.coord_terms;
}

PredicateQuality predicate_quality(const GroundedScene& pred, const Scene& truth) {
    const auto& sch = truth.schema();
    const int np = static_cast<int>(pred.coords.size());
    const int nt = static_cast<int>(truth.objects.size());

    PredicateQuality q;
    if (np == 0) {
        q.presence_misses = nt;
        return q;
    }

    std::vector<std::vector<double>> cost(static_cast<std::size_t>(np),
                                          std::vector<double>(static_cast<std::size_t>(nt), 0.0));
    for (int i = 0; i < np; ++i) {
        for (int j = 0; j < nt; ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < pred.coords[static_cast<std::size_t>(i)].size(); ++d) {
                const double delta = pred.coords[static_cast<std::size_t>(i)][d] -
                                     truth.objects[static_cast<std::size_t>(j)].position[d];
                d2 += delta * delta;
            }
            cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::sqrt(d2);
        }
    }
    const auto assignment = hungarian_match(pad_square(cost, 1e6));

    const auto table = pred.sym.attribute_table(sch);
    for (int i = 0; i < static_cast<int>(assignment.size()); ++i) {
        const int j = assignment[static_cast<std::size_t>(i)];
        if (i >= np) continue; // padded prediction row
        if (j >= nt) {
            q.presence_false_alarms++;
            continue;
        }
        q.matched++;
        const auto& obj = truth.objects[static_cast<std::size_t>(j)];
        for (int c = 0; c < sch.num_concepts(); ++c) {
            q.concept_total[sch.concept_name(c)]++;
            if (table[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] ==
                obj.attributes[static_cast<std::size_t>(c)]) {
                q.concept_correct[sch.concept_name(c)]++;
            }
        }
        for (std::size_t d = 0; d < obj.position.size(); ++d) {
            q.coord_abs_error_sum +=
                std::abs(pred.coords[static_cast<std::size_t>(i)][d] - obj.position[d]);
            q.coord_terms++;
        }
    }
    q.presence_misses = nt - q.matched;
    return q;
}

} // namespace nsb
