#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dc_engine.hpp"
#include "error.hpp"
#include "info.hpp"
#include "markov.hpp"

namespace intrinsic {

/// Ladder on which every non-blind-spot branch probability is one half:
/// delta_k = delta_1 prod_{i<k} (1 + log(1 + 1/i)).
[[nodiscard]] inline ThresholdLadder equal_probability_ladder(double delta1, std::size_t n)
{
    if (!(delta1 > 0.0) || n == 0)
    {
        throw invalid_input("equal-probability ladder needs delta1 > 0 and n >= 1");
    }
    std::vector<double> deltas(n);
    double log_delta = std::log(delta1);
    deltas[0] = delta1;
    for (std::size_t k = 1; k < n; ++k)
    {
        log_delta += std::log1p(std::log1p(1.0 / static_cast<double>(k)));
        deltas[k] = std::exp(log_delta);
    }
    return ThresholdLadder(std::move(deltas));
}

enum class Objective : std::uint8_t
{
    equal_probability,
    max_h1,
    max_h2,
};

[[nodiscard]] constexpr std::string_view to_string(Objective objective) noexcept
{
    switch (objective)
    {
    case Objective::equal_probability: return "equal-prob";
    case Objective::max_h1: return "max-h1";
    case Objective::max_h2: return "max-h2";
    }
    return "";
}

[[nodiscard]] inline Objective parse_objective(std::string_view text)
{
    if (text == "equal-prob")
    {
        return Objective::equal_probability;
    }
    if (text == "max-h1")
    {
        return Objective::max_h1;
    }
    if (text == "max-h2")
    {
        return Objective::max_h2;
    }
    throw invalid_input("unknown objective '" + std::string(text) + "'");
}

struct LadderSearchConfig
{
    std::size_t n = 2;
    double delta1 = 0.00025;
    Objective objective = Objective::max_h1;
    double ratio_low = 1.01;
    double ratio_high = 4.0;
    double tolerance = 1e-6;
    H2Options h2{1'000'000, 64, 1};
};

struct LadderSearchResult
{
    ThresholdLadder ladder;
    /// Geometric ratio; zero for the non-geometric equal-probability ladder.
    double ratio = 0.0;
    double objective = 0.0;
};

struct Maximum
{
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal f on [low, high].
[[nodiscard]] inline Maximum golden_section_maximize(const std::function<double(double)>& f,
                                                     double low, double high, double tolerance)
{
    if (!(high > low) || !(tolerance > 0.0))
    {
        throw invalid_input("golden-section search needs low < high and tolerance > 0");
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = low;
    double b = high;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tolerance)
    {
        if (fc >= fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Maximum best{0.5 * (a + b), 0.0};
    best.value = f(best.x);
    for (auto [x, v] : {std::pair{c, fc}, std::pair{d, fd}})
    {
        if (v > best.value)
        {
            best = {x, v};
        }
    }
    return best;
}

[[nodiscard]] inline double ladder_objective(const ThresholdLadder& ladder, Objective objective,
                                             const H2Options& h2 = {1'000'000, 64, 1})
{
    const auto w = analytic_matrix(ladder);
    const auto mu = stationary_distribution(w);
    if (objective == Objective::max_h2)
    {
        return h2_estimate(w, mu, h2).h2;
    }
    return h1(w, mu);
}

[[nodiscard]] inline LadderSearchResult optimize_ladder(const LadderSearchConfig& config)
{
    if (config.n == 0 || !(config.delta1 > 0.0))
    {
        throw invalid_input("ladder search needs n >= 1 and delta1 > 0");
    }
    if (!(config.ratio_low > 1.0) || !(config.ratio_high > config.ratio_low))
    {
        throw invalid_input("ratio bounds must satisfy 1 < low < high");
    }
    if (!(config.tolerance > 0.0))
    {
        throw invalid_input("tolerance must be positive");
    }
    if (config.objective == Objective::equal_probability)
    {
        LadderSearchResult result{equal_probability_ladder(config.delta1, config.n), 0.0, 0.0};
        if (config.n >= 2)
        {
            result.ratio = result.ladder[1] / result.ladder[0];
        }
        result.objective = ladder_objective(result.ladder, Objective::max_h1);
        return result;
    }
    if (config.n == 1)
    {
        const ThresholdLadder ladder({config.delta1});
        return {ladder, 0.0, ladder_objective(ladder, config.objective, config.h2)};
    }
    auto f = [&](double ratio) {
        return ladder_objective(ThresholdLadder::geometric(config.delta1, ratio, config.n),
                                config.objective, config.h2);
    };
    const auto best =
        golden_section_maximize(f, config.ratio_low, config.ratio_high, config.tolerance);
    return {ThresholdLadder::geometric(config.delta1, best.x, config.n), best.x, best.value};
}

} // namespace intrinsic
