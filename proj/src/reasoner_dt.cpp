#include <algorithm>
#include <map>

#include "nsbench/error.hpp"
#include "nsbench/reasoners.hpp"

#include "json.hpp"

namespace nsb {

namespace {

double gini(long pos, long total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

} // namespace

DtReasoner::DtReasoner(const AttributeSchema& schema, DtOptions options)
    : schema_(schema), options_(options) {}

int DtReasoner::build(std::vector<int>& rows, const std::vector<std::vector<int>>& x,
                      const std::vector<char>& y, int depth) {
    long pos = 0;
    for (int r : rows) pos += y[static_cast<std::size_t>(r)] ? 1 : 0;
    const long total = static_cast<long>(rows.size());

    auto make_leaf = [&]() {
        Node leaf;
        leaf.prediction = pos > total - pos; // tie predicts negative
        nodes_.push_back(leaf);
        return static_cast<int>(nodes_.size()) - 1;
    };
    if (pos == 0 || pos == total || depth == options_.max_depth ||
        total < 2 * options_.min_leaf) {
        return make_leaf();
    }

    // best split: lowest weighted child impurity; ties keep the lowest
    // (feature, threshold) because enumeration is ascending
    const double parent = gini(pos, total);
    double best = parent - 1e-12;
    int best_feature = -1;
    int best_threshold = 0;
    for (int f = 0; f < width_; ++f) {
        std::map<int, std::pair<long, long>> hist; // value -> (pos, count)
        for (int r : rows) {
            auto& cell = hist[x[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)]];
            cell.first += y[static_cast<std::size_t>(r)] ? 1 : 0;
            cell.second += 1;
        }
        if (hist.size() < 2) continue;
        long left_pos = 0;
        long left_n = 0;
        for (auto it = hist.begin(); std::next(it) != hist.end(); ++it) {
            left_pos += it->second.first;
            left_n += it->second.second;
            const long right_n = total - left_n;
            if (left_n < options_.min_leaf || right_n < options_.min_leaf) continue;
            const double w =
                (gini(left_pos, left_n) * left_n + gini(pos - left_pos, right_n) * right_n) /
                static_cast<double>(total);
            if (w < best) {
                best = w;
                best_feature = f;
                best_threshold = it->first;
            }
        }
    }
    if (best_feature < 0) return make_leaf();

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    for (int r : rows) {
        if (x[static_cast<std::size_t>(r)][static_cast<std::size_t>(best_feature)] <=
            best_threshold) {
            left_rows.push_back(r);
        } else {
            right_rows.push_back(r);
        }
    }
    const int self = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(self)].feature = best_feature;
    nodes_[static_cast<std::size_t>(self)].threshold = best_threshold;
    const int left = build(left_rows, x, y, depth + 1);
    const int right = build(right_rows, x, y, depth + 1);
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

void DtReasoner::fit(const std::vector<const GroundedScene*>& scenes,
                     const std::vector<char>& labels) {
    if (scenes.empty()) throw Error("EMPTY_TRAINING_SET", "dt requires training scenes");
    if (scenes.size() != labels.size()) throw Error("LENGTH_MISMATCH", "scenes vs labels");
    width_ = bag_of_properties_width(schema_);
    std::vector<std::vector<int>> x;
    x.reserve(scenes.size());
    for (const GroundedScene* s : scenes) x.push_back(bag_of_properties(s->sym, schema_));

    nodes_.clear();
    std::vector<int> rows(scenes.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
    build(rows, x, labels, 0);
}

bool DtReasoner::predict_vector(const std::vector<int>& features) const {
    if (nodes_.empty()) throw Error("EMPTY_TRAINING_SET", "dt not fitted");
    if (static_cast<int>(features.size()) != width_) {
        throw Error("WIDTH_MISMATCH", "feature vector width differs from training width");
    }
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
        const Node& node = nodes_[static_cast<std::size_t>(i)];
        i = features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                               : node.right;
    }
    return nodes_[static_cast<std::size_t>(i)].prediction;
}

bool DtReasoner::predict(const GroundedScene& scene) const {
    return predict_vector(bag_of_properties(scene.sym, schema_));
}

std::string DtReasoner::serialize() const {
    nlohmann::json doc;
    doc["engine"] = "dt";
    doc["width"] = width_;
    nlohmann::json nodes = nlohmann::json::array();
    const auto names = bag_of_properties_feature_names(schema_);
    for (const Node& n : nodes_) {
        if (n.is_leaf()) {
            nodes.push_back({{"leaf", true}, {"prediction", n.prediction}});
        } else {
            nodes.push_back({{"leaf", false},
                             {"feature", n.feature},
                             {"feature_name", names[static_cast<std::size_t>(n.feature)]},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right}});
        }
    }
    doc["nodes"] = nodes;
    return doc.dump(2);
}

} // namespace nsb
