#include "nsbench/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsbench/error.hpp"

namespace nsb {

namespace {

// Classic O(n^3) shortest-augmenting-path formulation with row/column
// potentials (1-indexed internally).
std::vector<int> solve(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);  // row matched to column j
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = a[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> assignment(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        if (p[static_cast<std::size_t>(j)] > 0) {
            assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
        }
    }
    return assignment;
}

} // namespace

double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<int>& assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        total += cost[i][static_cast<std::size_t>(assignment[i])];
    }
    return total;
}

std::vector<int> hungarian_match(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    double max_abs = 0.0;
    for (const auto& row : cost) {
        if (static_cast<int>(row.size()) != n) {
            throw Error("INVALID_ARGUMENT", "cost matrix must be square (pad_square first)");
        }
        for (double c : row) {
            if (!std::isfinite(c)) throw Error("NON_FINITE_COST", "cost matrix entry not finite");
            max_abs = std::max(max_abs, std::abs(c));
        }
    }

    const auto base = solve(cost);
    const double best = assignment_cost(cost, base);
    const double eps = 1e-9 * std::max(1.0, max_abs) * n;
    const double big = 4.0 * (max_abs + 1.0) * n; // dominates any real total

    // Greedy lexicographic refinement: fix each row in turn to the smallest
    // column that still admits an optimal completion.
    std::vector<std::vector<double>> work = cost;
    std::vector<int> fixed(static_cast<std::size_t>(n), -1);
    std::vector<char> col_used(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (col_used[static_cast<std::size_t>(j)]) continue;
            // force row i -> j and re-solve
            std::vector<double> saved = work[static_cast<std::size_t>(i)];
            for (int j2 = 0; j2 < n; ++j2) {
                work[static_cast<std::size_t>(i)][static_cast<std::size_t>(j2)] =
                    (j2 == j) ? saved[static_cast<std::size_t>(j2)] : big;
            }
            const auto trial = solve(work);
            const double total = assignment_cost(work, trial);
            if (total <= best + eps) {
                fixed[static_cast<std::size_t>(i)] = j;
                col_used[static_cast<std::size_t>(j)] = true;
                // keep row i forced for subsequent rows
                break;
            }
            work[static_cast<std::size_t>(i)] = saved;
        }
        if (fixed[static_cast<std::size_t>(i)] < 0) {
            // numerically pathological; fall back to the base solution
            return base;
        }
    }
    return fixed;
}

std::vector<std::vector<double>> pad_square(const std::vector<std::vector<double>>& cost,
                                            double pad_value) {
    std::size_t rows = cost.size();
    std::size_t cols = 0;
    for (const auto& row : cost) cols = std::max(cols, row.size());
    const std::size_t n = std::max(rows, cols);
    std::vector<std::vector<double>> out(n, std::vector<double>(n, pad_value));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cost[i].size(); ++j) out[i][j] = cost[i][j];
    }
    return out;
}

} // namespace nsb
