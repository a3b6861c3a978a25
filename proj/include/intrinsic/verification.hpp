#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "info.hpp"
#include "markov.hpp"
#include "mc_oracle.hpp"
#include "random.hpp"
#include "scale_select.hpp"

namespace intrinsic::verify {

struct Check
{
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double expected = 0.0;
    std::string detail;
};

struct Options
{
    std::uint64_t seed = 1;
    /// Multiplies every Monte Carlo sample size.
    double effort = 1.0;
};

[[nodiscard]] inline std::size_t scaled(std::size_t base, const Options& options)
{
    return std::max<std::size_t>(1000, static_cast<std::size_t>(static_cast<double>(base) * options.effort));
}

/// Driftless walk at unit price whose step is delta/resolution, with paths
/// capped at a 5% price wander.
[[nodiscard]] inline SimConfig brownian_config(double sigma, double delta, double resolution,
                                               std::uint64_t seed)
{
    SimConfig config;
    config.sigma = sigma;
    config.dt = std::pow(delta / resolution / sigma, 2);
    config.steps = static_cast<std::size_t>(std::pow(0.05 * resolution / delta, 2));
    config.seed = seed;
    return config;
}

[[nodiscard]] inline std::vector<Check> fit(const Options& options)
{
    std::vector<Check> checks;
    const double delta = 0.005;
    for (double sigma : {0.005, 0.01, 0.03})
    {
        const auto report =
            verify_fit(brownian_config(sigma, delta, 50.0, options.seed), delta, scaled(100'000, options));
        checks.push_back({"mean overshoot / delta, sigma=" + csv::format(sigma),
                          report.mean_ratio >= 0.98 && report.mean_ratio <= 1.02, report.mean_ratio,
                          1.0, std::to_string(report.overshoots) + " overshoots"});
    }
    return checks;
}

[[nodiscard]] inline std::vector<Check> exponential(const Options& options)
{
    const double delta = 0.005;
    const auto report =
        verify_fit(brownian_config(0.01, delta, 200.0, options.seed), delta, scaled(100'000, options));
    return {{"KS p-value against Exponential(delta)", report.ks_pvalue >= 0.01, report.ks_pvalue, 0.01,
             "D=" + csv::format(report.ks_statistic) + ", " + std::to_string(report.overshoots) +
                 " overshoots"}};
}

[[nodiscard]] inline std::vector<Check> two_threshold(const Options& options)
{
    std::vector<Check> checks;
    const double delta1 = 0.005;
    for (double ratio : {1.5, 2.0, 3.0})
    {
        const ThresholdLadder ladder({delta1, delta1 * ratio});
        const auto counts = empirical_matrix(brownian_config(0.01, delta1, 20.0, options.seed), ladder,
                                             scaled(1'000'000, options));
        const double expected = two_threshold_matrix(delta1, delta1 * ratio)(1, 3);
        const double observed = counts.probability(1, 3);
        const double se = counts.standard_error(1, 3);
        checks.push_back({"P(1->3), ratio=" + csv::format(ratio),
                          std::abs(observed - expected) <= 3.0 * se, observed, expected,
                          "stderr " + csv::format(se)});
    }
    return checks;
}

[[nodiscard]] inline std::vector<Check> escape(const Options& options)
{
    struct Point
    {
        double mu, delta, Delta;
    };
    std::vector<Check> checks;
    for (const auto& p : {Point{0.5, 1.0, 1.0}, Point{-0.5, 1.0, 1.0}, Point{1.0, 0.5, 1.5},
                          Point{-0.25, 1.5, 0.5}})
    {
        const auto mc = first_passage_probability(p.Delta, p.delta, p.mu, 1.0,
                                                  scaled(1'000'000, options), options.seed);
        const double expected = drifted_escape_probability(p.Delta, p.delta, p.mu, 1.0);
        checks.push_back({"escape mu=" + csv::format(p.mu) + " delta=" + csv::format(p.delta) +
                              " Delta=" + csv::format(p.Delta),
                          std::abs(mc.probability - expected) <= 3.0 * mc.standard_error,
                          mc.probability, expected, "stderr " + csv::format(mc.standard_error)});
    }
    return checks;
}

/// Largest entrywise difference over all states.
[[nodiscard]] inline double max_difference(const TransitionMatrix& a, const TransitionMatrix& b)
{
    if (a.states() != b.states())
    {
        return INFINITY;
    }
    double worst = 0.0;
    for (StateCode s = 0; s < a.states(); ++s)
    {
        for (auto t : successors(s, a.network_size()))
        {
            worst = std::max(worst, std::abs(a(s, t) - b(s, t)));
        }
    }
    return worst;
}

[[nodiscard]] inline std::vector<Check> contraction(const Options& options)
{
    auto engine = make_engine(options.seed, 1);
    UniformDistribution uniform;
    std::vector<Check> checks;
    for (std::size_t n = 2; n <= 8; ++n)
    {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial)
        {
            const auto ladder =
                ThresholdLadder::geometric(1e-4 + 0.01 * uniform(engine), 1.05 + 2.95 * uniform(engine), n);
            worst = std::max(worst, max_difference(contract(analytic_matrix(ladder)),
                                                   analytic_matrix(ladder.without_smallest())));
        }
        checks.push_back({"contraction identity n=" + std::to_string(n), worst <= 1e-12, worst, 0.0,
                          "20 random geometric ladders"});
    }
    return checks;
}

[[nodiscard]] inline std::vector<Check> constants(const Options& options)
{
    const auto w = analytic_matrix(ThresholdLadder::geometric(0.00025, 2.0, 12));
    const auto mu = stationary_distribution(w);
    const double first = h1(w, mu);
    const auto second = h2_estimate(w, mu, {10'000'000, 64, options.seed});
    return {{"H1 of the doubling 12-ladder", std::abs(first - 0.4604) <= 0.01, first, 0.4604, ""},
            {"H2 of the doubling 12-ladder", std::abs(second.h2 - 0.70818) <= 0.05, second.h2, 0.70818,
             "one-step variance " + csv::format(second.r0) + ", ratio to it " +
                 csv::format(second.h2 / second.r0)}};
}

[[nodiscard]] inline std::vector<Check> entropy_bound(const Options& options)
{
    auto engine = make_engine(options.seed, 2);
    UniformDistribution uniform;
    double largest = 0.0;
    for (int trial = 0; trial < 1000; ++trial)
    {
        const auto n = 1 + static_cast<std::size_t>(uniform(engine) * 8.0);
        std::vector<double> deltas{1e-4 + 0.01 * uniform(engine)};
        for (std::size_t i = 1; i < n; ++i)
        {
            deltas.push_back(deltas.back() * (1.0 + 1e-3 + 4.0 * uniform(engine)));
        }
        const auto w = analytic_matrix(ThresholdLadder(deltas));
        largest = std::max(largest, h1(w, stationary_distribution(w)));
    }
    return {{"largest H1 over 1000 random ladders", largest <= std::numbers::ln2, largest,
             std::numbers::ln2, ""}};
}

[[nodiscard]] inline std::vector<Check> scales(const Options&)
{
    std::vector<Check> checks;
    double worst = 0.0;
    for (std::size_t n = 2; n <= 12; ++n)
    {
        const auto p = branch_probabilities(equal_probability_ladder(1.0, n));
        for (std::size_t i = 1; i < n; ++i)
        {
            worst = std::max(worst, std::abs(p[i] - 0.5));
        }
    }
    checks.push_back({"equal-probability branch deviation", worst <= 1e-9, worst, 0.0, "n = 2..12"});

    LadderSearchConfig config;
    config.n = 2;
    config.objective = Objective::max_h1;
    const auto best = optimize_ladder(config);
    const double target = 1.0 + std::numbers::ln2;
    checks.push_back({"n=2 entropy-maximising ratio", std::abs(best.ratio - target) <= 1e-3, best.ratio,
                      target, ""});

    const std::size_t k = 1'000'000;
    const auto ladder = equal_probability_ladder(1.0, k);
    const double constant = ladder[k - 1] / static_cast<double>(k);
    checks.push_back({"delta_k / (delta_1 k) at k=1e6", std::abs(constant - 0.8625576) <= 1e-4, constant,
                      0.8625576, ""});
    return checks;
}

struct Suite
{
    std::string_view name;
    std::function<std::vector<Check>(const Options&)> run;
};

[[nodiscard]] inline const std::vector<Suite>& suites()
{
    static const std::vector<Suite> all{
        {"fit", fit},
        {"exponential", exponential},
        {"two-threshold", two_threshold},
        {"escape", escape},
        {"contraction", contraction},
        {"constants", constants},
        {"entropy-bound", entropy_bound},
        {"scales", scales},
    };
    return all;
}

inline void write_report(std::ostream& out, std::string_view suite, const std::vector<Check>& checks)
{
    for (const auto& c : checks)
    {
        out << (c.passed ? "PASS" : "FAIL") << "  " << suite << ": " << c.name << "  observed "
            << csv::format(c.observed) << "  expected " << csv::format(c.expected);
        if (!c.detail.empty())
        {
            out << "  (" << c.detail << ")";
        }
        out << '\n';
    }
}

} // namespace intrinsic::verify
