#include <algorithm>
#include <cmath>

#include "nsbench/error.hpp"
#include "nsbench/reasoners.hpp"

#include "json.hpp"

namespace nsb {

BnReasoner::BnReasoner(const AttributeSchema& schema, BnOptions options)
    : schema_(schema), options_(options) {}

void BnReasoner::fit(const std::vector<const GroundedScene*>& scenes,
                     const std::vector<char>& labels) {
    if (scenes.empty()) throw Error("EMPTY_TRAINING_SET", "bn requires training scenes");
    if (scenes.size() != labels.size()) throw Error("LENGTH_MISMATCH", "scenes vs labels");
    width_ = bag_of_properties_width(schema_);
    const int buckets = options_.count_cap + 1;

    long class_n[2] = {0, 0};
    std::vector<std::vector<long>> counts[2];
    for (int y = 0; y < 2; ++y) {
        counts[y].assign(static_cast<std::size_t>(width_),
                         std::vector<long>(static_cast<std::size_t>(buckets), 0));
    }
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const int y = labels[i] ? 1 : 0;
        ++class_n[y];
        const auto features = bag_of_properties(scenes[i]->sym, schema_);
        for (int f = 0; f < width_; ++f) {
            const int bucket =
                std::clamp(features[static_cast<std::size_t>(f)], 0, options_.count_cap);
            ++counts[y][static_cast<std::size_t>(f)][static_cast<std::size_t>(bucket)];
        }
    }

    const double total = static_cast<double>(scenes.size());
    for (int y = 0; y < 2; ++y) {
        // Laplace on the prior too, so single-class training sets stay finite
        log_prior_[y] = std::log((class_n[y] + options_.alpha) / (total + 2.0 * options_.alpha));
        log_prob_[y].assign(static_cast<std::size_t>(width_),
                            std::vector<double>(static_cast<std::size_t>(buckets), 0.0));
        for (int f = 0; f < width_; ++f) {
            const double denom = class_n[y] + options_.alpha * buckets;
            for (int b = 0; b < buckets; ++b) {
                log_prob_[y][static_cast<std::size_t>(f)][static_cast<std::size_t>(b)] = std::log(
                    (counts[y][static_cast<std::size_t>(f)][static_cast<std::size_t>(b)] +
                     options_.alpha) /
                    denom);
            }
        }
    }
}

double BnReasoner::feature_log_prob(int feature, int bucket, bool positive) const {
    return log_prob_[positive ? 1 : 0][static_cast<std::size_t>(feature)]
                    [static_cast<std::size_t>(std::clamp(bucket, 0, options_.count_cap))];
}

double BnReasoner::log_posterior(const std::vector<int>& features, bool positive) const {
    if (log_prob_[0].empty()) throw Error("EMPTY_TRAINING_SET", "bn not fitted");
    if (static_cast<int>(features.size()) != width_) {
        throw Error("WIDTH_MISMATCH", "feature vector width differs from training width");
    }
    double lp = log_prior_[positive ? 1 : 0];
    for (int f = 0; f < width_; ++f) {
        lp += feature_log_prob(f, features[static_cast<std::size_t>(f)], positive);
    }
    return lp;
}

bool BnReasoner::predict(const GroundedScene& scene) const {
    const auto features = bag_of_properties(scene.sym, schema_);
    return log_posterior(features, true) > log_posterior(features, false);
}

std::string BnReasoner::serialize() const {
    nlohmann::json doc;
    doc["engine"] = "bn";
    doc["width"] = width_;
    doc["count_cap"] = options_.count_cap;
    doc["alpha"] = options_.alpha;
    doc["log_prior"] = {log_prior_[0], log_prior_[1]};
    doc["log_prob_neg"] = log_prob_[0];
    doc["log_prob_pos"] = log_prob_[1];
    return doc.dump();
}

} // namespace nsb
