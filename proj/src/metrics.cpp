#include "nsbench/metrics.hpp"

#include <cmath>

#include "nsbench/error.hpp"

namespace nsb {

BinaryMetrics f1_score(const std::vector<char>& predictions, const std::vector<char>& labels) {
    if (predictions.size() != labels.size()) {
        throw Error("LENGTH_MISMATCH", "predictions and labels differ in length");
    }
    if (predictions.empty()) throw Error("LENGTH_MISMATCH", "empty inputs");
    BinaryMetrics m;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool p = predictions[i] != 0;
        const bool y = labels[i] != 0;
        if (p && y) ++m.tp;
        else if (p && !y) ++m.fp;
        else if (!p && y) ++m.fn;
        else ++m.tn;
    }
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
    m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

} // namespace nsb
