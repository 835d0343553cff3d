#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "nsbench/error.hpp"
#include "nsbench/hungarian.hpp"
#include "nsbench/rng.hpp"

using namespace nsb;

namespace {

// Exhaustive n! minimization with the same lexicographic tie-break.
std::vector<int> brute_force(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<int> perm(n), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = assignment_cost(cost, perm);
        if (c < best_cost - 1e-12 ||
            (c < best_cost + 1e-12 && (best.empty() || perm < best))) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

std::vector<std::vector<double>> random_matrix(Rng& rng, int n, int scale) {
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (auto& row : cost)
        for (double& v : row) v = scale > 0 ? double(rng.uniform_int(0, scale)) : rng.uniform();
    return cost;
}

} // namespace

TEST_CASE("identity-favoring matrix yields the identity") {
    std::vector<std::vector<double>> cost(4, std::vector<double>(4, 1.0));
    for (int i = 0; i < 4; ++i) cost[i][i] = 0.0;
    auto got = hungarian_match(cost);
    CHECK(got == std::vector<int>{0, 1, 2, 3});
    CHECK(assignment_cost(cost, got) == 0.0);
}

TEST_CASE("2x2 textbook case") {
    std::vector<std::vector<double>> cost = {{4, 1}, {2, 3}};
    auto got = hungarian_match(cost);
    CHECK(got == std::vector<int>{1, 0});
    CHECK(assignment_cost(cost, got) == 3.0);
}

TEST_CASE("all-equal costs break ties lexicographically") {
    std::vector<std::vector<double>> cost(5, std::vector<double>(5, 7.0));
    CHECK(hungarian_match(cost) == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("matches exhaustive minimization on random 5x5 matrices") {
    Rng rng(808);
    for (int trial = 0; trial < 1000; ++trial) {
        auto cost = random_matrix(rng, 5, 0);
        auto got = hungarian_match(cost);
        auto want = brute_force(cost);
        CHECK(assignment_cost(cost, got) == doctest::Approx(assignment_cost(cost, want)));
    }
}

TEST_CASE("integer matrices with ties also match the brute-force tie-break") {
    Rng rng(809);
    for (int trial = 0; trial < 500; ++trial) {
        auto cost = random_matrix(rng, 4, 3); // small integer range forces ties
        CHECK(hungarian_match(cost) == brute_force(cost));
    }
}

TEST_CASE("sizes up to 6 against brute force") {
    Rng rng(810);
    for (int n = 1; n <= 6; ++n)
        for (int trial = 0; trial < 50; ++trial) {
            auto cost = random_matrix(rng, n, 0);
            auto got = hungarian_match(cost);
            CHECK(assignment_cost(cost, got) ==
                  doctest::Approx(assignment_cost(cost, brute_force(cost))));
        }
}

TEST_CASE("never beaten by a random permutation") {
    Rng rng(811);
    for (int trial = 0; trial < 50; ++trial) {
        auto cost = random_matrix(rng, 8, 0);
        double best = assignment_cost(cost, hungarian_match(cost));
        std::vector<int> perm(8);
        std::iota(perm.begin(), perm.end(), 0);
        for (int p = 0; p < 100; ++p) {
            rng.shuffle(perm);
            CHECK(best <= assignment_cost(cost, perm) + 1e-9);
        }
    }
}

TEST_CASE("non-finite entries are rejected") {
    std::vector<std::vector<double>> cost = {{0.0, 1.0},
                                             {std::numeric_limits<double>::quiet_NaN(), 2.0}};
    try {
        (void)hungarian_match(cost);
        FAIL("expected NON_FINITE_COST");
    } catch (const Error& e) {
        CHECK(e.code() == "NON_FINITE_COST");
    }
    cost[1][0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)hungarian_match(cost), Error);
}

TEST_CASE("pad_square embeds a rectangle without changing the optimum") {
    std::vector<std::vector<double>> cost = {{5.0, 1.0, 9.0}, {2.0, 6.0, 3.0}};
    auto padded = pad_square(cost, 100.0);
    REQUIRE(padded.size() == 3);
    REQUIRE(padded[0].size() == 3);
    auto got = hungarian_match(padded);
    // rows 0 and 1 are the real ones: 0->1 (1) and 1->0 (2) is optimal
    CHECK(got[0] == 1);
    CHECK(got[1] == 0);
}
