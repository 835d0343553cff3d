#pragma once

#include <vector>

namespace nsb {

struct BinaryMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
};

// Degenerate cases (no predicted or no actual positives) score f1 = 0.
// Throws LENGTH_MISMATCH.
BinaryMetrics f1_score(const std::vector<char>& predictions, const std::vector<char>& labels);

double mean(const std::vector<double>& xs);
double sample_std(const std::vector<double>& xs); // 0 for fewer than 2 values

} // namespace nsb
