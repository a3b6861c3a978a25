#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

#include <intrinsic/scale_select.hpp>

using namespace intrinsic;
using Catch::Approx;

TEST_CASE("equal-probability ladder")
{
    const auto two = equal_probability_ladder(0.001, 2);
    CHECK(two[1] == Approx(0.001 * (1.0 + std::numbers::ln2)).epsilon(1e-14));
    for (std::size_t n = 1; n <= 14; ++n)
    {
        const auto ladder = equal_probability_ladder(0.002, n);
        for (std::size_t i = 1; i < n; ++i)
        {
            CHECK(ladder[i] > ladder[i - 1]);
        }
        const auto p = branch_probabilities(ladder);
        for (std::size_t i = 1; i < n; ++i)
        {
            CHECK(std::abs(p[i] - 0.5) <= 1e-9);
        }
        const auto scaled = equal_probability_ladder(0.006, n);
        for (std::size_t i = 0; i < n; ++i)
        {
            CHECK(scaled[i] == Approx(3.0 * ladder[i]).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(equal_probability_ladder(0.0, 3), invalid_input);
}

TEST_CASE("equal-probability growth constant matches the long-double sum")
{
    for (std::size_t k : {10U, 1000U, 100000U})
    {
        const auto ladder = equal_probability_ladder(1.0, k);
        CHECK(ladder[k - 1] / static_cast<double>(k) ==
              Approx(oracle::equal_probability_constant(k)).epsilon(1e-11));
    }
}

TEST_CASE("golden-section search")
{
    const auto best = golden_section_maximize([](double x) { return -(x - 1.7) * (x - 1.7); }, 1.0, 4.0, 1e-9);
    CHECK(best.x == Approx(1.7).margin(1e-8));
    CHECK_THROWS_AS(golden_section_maximize([](double x) { return x; }, 2.0, 1.0, 1e-6), invalid_input);
}

TEST_CASE("two thresholds: entropy maximum equals the equal-probability ratio")
{
    LadderSearchConfig config;
    config.n = 2;
    config.objective = Objective::max_h1;
    const auto h1_best = optimize_ladder(config);
    CHECK(h1_best.ratio == Approx(1.0 + std::numbers::ln2).margin(1e-3));

    config.objective = Objective::equal_probability;
    const auto equal = optimize_ladder(config);
    CHECK(equal.ratio == Approx(h1_best.ratio).margin(1e-3));
}

TEST_CASE("three thresholds: the equivalence breaks and the search beats a grid")
{
    LadderSearchConfig config;
    config.n = 3;
    config.objective = Objective::max_h1;
    const auto best = optimize_ladder(config);

    double grid_best = 0.0;
    double grid_value = -1.0;
    for (int k = 1; k <= 3000; ++k)
    {
        const double ratio = 1.0 + 1e-3 * k;
        const auto w = analytic_matrix(ThresholdLadder::geometric(config.delta1, ratio, 3));
        const auto mu = oracle::lazy_power_stationary(w.to_dense());
        const double v = oracle::entropy_rate(w.to_dense(), mu);
        if (v > grid_value)
        {
            grid_value = v;
            grid_best = ratio;
        }
        if (k % 10 == 0 && ratio >= config.ratio_low)
        {
            CHECK(best.objective >= v - 1e-12);
        }
    }
    CHECK(best.ratio == Approx(grid_best).margin(1.5e-3));
    CHECK(std::abs(best.ratio - (1.0 + std::numbers::ln2)) > 1e-2);
    CHECK(best.objective <= std::numbers::ln2);
}

TEST_CASE("second-order objective is deterministic and non-negative")
{
    LadderSearchConfig config;
    config.n = 3;
    config.objective = Objective::max_h2;
    config.tolerance = 1e-3;
    config.h2 = {100'000, 32, 9};
    const auto a = optimize_ladder(config);
    const auto b = optimize_ladder(config);
    CHECK(a.ratio == b.ratio);
    CHECK(a.objective == b.objective);
    CHECK(a.objective >= 0.0);
    CHECK(parse_objective("max-h2") == Objective::max_h2);
    CHECK_THROWS_AS(parse_objective("min-h1"), invalid_input);
}
