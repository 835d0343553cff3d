#pragma once

#include <vector>

namespace nsb {

// Minimum-cost assignment on a square matrix. Returns the column assigned to
// each row. Among cost-equal optima the lexicographically smallest assignment
// (by row order) is returned. Throws NON_FINITE_COST on NaN/inf entries.
std::vector<int> hungarian_match(const std::vector<std::vector<double>>& cost);

double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<int>& assignment);

// Pads a rectangular matrix to square with a constant larger than any entry.
std::vector<std::vector<double>> pad_square(const std::vector<std::vector<double>>& cost,
                                            double pad_value);

} // namespace nsb
