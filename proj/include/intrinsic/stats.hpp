#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "error.hpp"

namespace intrinsic::stats {

[[nodiscard]] inline double mean(std::span<const double> xs)
{
    if (xs.empty())
    {
        throw invalid_input("mean of an empty sample");
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Unbiased sample variance.
[[nodiscard]] inline double variance(std::span<const double> xs)
{
    if (xs.size() < 2)
    {
        throw invalid_input("variance needs at least two values");
    }
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs)
    {
        ss += (x - m) * (x - m);
    }
    return ss / static_cast<double>(xs.size() - 1);
}

[[nodiscard]] inline double median(std::vector<double> xs)
{
    if (xs.empty())
    {
        throw invalid_input("median of an empty sample");
    }
    const auto mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    const double upper = xs[mid];
    if (xs.size() % 2 == 1)
    {
        return upper;
    }
    const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

[[nodiscard]] inline double exponential_cdf(double x, double mean_value)
{
    return x <= 0.0 ? 0.0 : -std::expm1(-x / mean_value);
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <typename Cdf>
[[nodiscard]] double ks_statistic(std::vector<double> sample, Cdf cdf)
{
    if (sample.empty())
    {
        throw invalid_input("KS statistic of an empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
    {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Survival function of the Kolmogorov distribution.
[[nodiscard]] inline double kolmogorov_survival(double lambda)
{
    if (lambda <= 0.0)
    {
        return 1.0;
    }
    if (lambda < 1.18)
    {
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1; k <= 50; k += 2)
        {
            cdf += std::exp(-k * k * pi2 / (8.0 * lambda * lambda));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k)
    {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18)
        {
            break;
        }
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic p-value of a one-sample KS distance, with Stephens'
/// finite-sample correction.
[[nodiscard]] inline double ks_pvalue(double d, std::size_t n)
{
    const double sn = std::sqrt(static_cast<double>(n));
    return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

} // namespace intrinsic::stats
