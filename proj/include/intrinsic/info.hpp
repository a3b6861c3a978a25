#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "csv.hpp"
#include "error.hpp"
#include "markov.hpp"
#include "random.hpp"

namespace intrinsic {

/// True when every state reaches every other one.
[[nodiscard]] inline bool strongly_connected(const TransitionMatrix& w)
{
    const auto size = w.states();
    auto reach_all = [&](bool reverse) {
        std::vector<std::vector<StateCode>> adjacency(size);
        for (StateCode s = 0; s < size; ++s)
        {
            for (const auto& e : w.row(s))
            {
                if (e.prob > 0.0)
                {
                    reverse ? adjacency[e.to].push_back(s) : adjacency[s].push_back(e.to);
                }
            }
        }
        std::vector<bool> seen(size, false);
        std::vector<StateCode> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty())
        {
            const auto s = stack.back();
            stack.pop_back();
            for (auto t : adjacency[s])
            {
                if (!seen[t])
                {
                    seen[t] = true;
                    ++count;
                    stack.push_back(t);
                }
            }
        }
        return count == size;
    };
    return reach_all(false) && reach_all(true);
}

/// Solves mu W = mu, sum mu = 1 by a direct sparse solve.
[[nodiscard]] inline std::vector<double> stationary_distribution(const TransitionMatrix& w)
{
    if (!strongly_connected(w))
    {
        throw data_error("transition matrix is reducible");
    }
    const auto size = static_cast<Eigen::Index>(w.states());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(size) * 4);
    for (Eigen::Index j = 0; j < size; ++j)
    {
        triplets.emplace_back(0, j, 1.0);
    }
    for (StateCode s = 0; s < w.states(); ++s)
    {
        for (const auto& e : w.row(s))
        {
            if (e.to != 0)
            {
                triplets.emplace_back(e.to, s, e.prob);
            }
        }
        if (s != 0)
        {
            triplets.emplace_back(s, s, -1.0);
        }
    }
    Eigen::SparseMatrix<double> a(size, size);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(a);
    if (solver.info() != Eigen::Success)
    {
        throw data_error("stationary system is singular");
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
    rhs[0] = 1.0;
    const Eigen::VectorXd x = solver.solve(rhs);

    std::vector<double> mu(static_cast<std::size_t>(size));
    double total = 0.0;
    for (Eigen::Index i = 0; i < size; ++i)
    {
        mu[static_cast<std::size_t>(i)] = std::max(0.0, x[i]);
        total += mu[static_cast<std::size_t>(i)];
    }
    for (auto& m : mu)
    {
        m /= total;
    }
    return mu;
}

/// Largest |(mu W)_s - mu_s|.
[[nodiscard]] inline double stationarity_residual(const TransitionMatrix& w,
                                                  std::span<const double> mu)
{
    std::vector<double> next(w.states(), 0.0);
    for (StateCode s = 0; s < w.states(); ++s)
    {
        for (const auto& e : w.row(s))
        {
            next[e.to] += mu[s] * e.prob;
        }
    }
    double worst = 0.0;
    for (std::size_t s = 0; s < next.size(); ++s)
    {
        worst = std::max(worst, std::abs(next[s] - mu[s]));
    }
    return worst;
}

/// -log p, with -log 1 = 0 exactly.
[[nodiscard]] inline double surprisal(double p)
{
    if (!(p > 0.0))
    {
        throw data_error("zero-probability transition");
    }
    return p == 1.0 ? 0.0 : -std::log(p);
}

[[nodiscard]] inline double row_entropy(const TransitionMatrix::Row& row)
{
    double h = 0.0;
    for (const auto& e : row)
    {
        if (e.prob > 0.0 && e.prob < 1.0)
        {
            h -= e.prob * std::log(e.prob);
        }
    }
    return h;
}

/// Entropy rate of the chain in nats.
[[nodiscard]] inline double h1(const TransitionMatrix& w, std::span<const double> mu)
{
    if (mu.size() != w.states())
    {
        throw invalid_input("stationary distribution has the wrong size");
    }
    double h = 0.0;
    for (StateCode s = 0; s < w.states(); ++s)
    {
        h += mu[s] * row_entropy(w.row(s));
    }
    return h;
}

/// Surprise of a transition path.
template <typename Records>
[[nodiscard]] double surprise(const Records& records, const TransitionMatrix& w)
{
    double gamma = 0.0;
    for (const auto& r : records)
    {
        gamma += surprisal(w(r.from, r.to));
    }
    return gamma;
}

struct H2Options
{
    std::size_t chain_length = 10'000'000;
    std::size_t lag = 64;
    std::uint64_t seed = 1;
};

struct H2Estimate
{
    /// Long-run variance of the per-step surprise.
    double h2 = 0.0;
    /// Lag-0 autocovariance, i.e. the one-step surprise variance.
    double r0 = 0.0;
    std::vector<double> autocovariance;
};

/// Simulates the chain from mu and estimates the long-run variance of the
/// per-step surprise from truncated sample autocovariances:
/// R(0) + 2 sum_{0<t<L} R(t) + R(L), the last lag at half weight.
[[nodiscard]] inline H2Estimate h2_estimate(const TransitionMatrix& w, std::span<const double> mu,
                                            const H2Options& options = {})
{
    if (options.lag == 0 || options.lag >= options.chain_length)
    {
        throw invalid_input("truncation lag must be in 1..chain_length-1");
    }
    if (mu.size() != w.states())
    {
        throw invalid_input("stationary distribution has the wrong size");
    }
    auto engine = make_engine(options.seed);
    UniformDistribution uniform;

    StateCode state = 0;
    {
        const double u = uniform(engine);
        double cumulative = 0.0;
        for (StateCode s = 0; s < w.states(); ++s)
        {
            cumulative += mu[s];
            state = s;
            if (u < cumulative)
            {
                break;
            }
        }
    }

    const auto n = options.chain_length;
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t)
    {
        const auto& row = w.row(state);
        const auto& pick = (row.count == 2 && uniform(engine) >= row.entries[0].prob)
                               ? row.entries[1]
                               : row.entries[0];
        x[t] = surprisal(pick.prob);
        state = pick.to;
    }

    double m = 0.0;
    for (double v : x)
    {
        m += v;
    }
    m /= static_cast<double>(n);
    for (auto& v : x)
    {
        v -= m;
    }

    H2Estimate out;
    out.autocovariance.resize(options.lag + 1);
    for (std::size_t tau = 0; tau <= options.lag; ++tau)
    {
        double acc = 0.0;
        const double* a = x.data();
        const double* b = x.data() + tau;
        const std::size_t len = n - tau;
        for (std::size_t t = 0; t < len; ++t)
        {
            acc += a[t] * b[t];
        }
        out.autocovariance[tau] = acc / static_cast<double>(n);
    }
    out.r0 = out.autocovariance[0];
    out.h2 = out.autocovariance[0] + out.autocovariance[options.lag];
    for (std::size_t tau = 1; tau < options.lag; ++tau)
    {
        out.h2 += 2.0 * out.autocovariance[tau];
    }
    if (out.h2 < 0.0 && out.h2 > -1e-12)
    {
        out.h2 = 0.0;
    }
    return out;
}

struct InfoSummary
{
    std::vector<double> mu;
    double h1 = 0.0;
    double h2 = 0.0;
    double r0 = 0.0;
};

[[nodiscard]] inline InfoSummary summarize(const TransitionMatrix& w, const H2Options& options = {})
{
    InfoSummary info;
    info.mu = stationary_distribution(w);
    info.h1 = h1(w, info.mu);
    const auto est = h2_estimate(w, info.mu, options);
    info.h2 = est.h2;
    info.r0 = est.r0;
    return info;
}

[[nodiscard]] inline double normal_cdf(double z)
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

struct LiquiditySample
{
    std::int64_t time = 0;
    std::size_t K = 0;
    double surprise = 0.0;
    double z = 0.0;
    double liquidity = 0.5;
    bool low_confidence = false;
};

struct LiquidityOptions
{
    std::int64_t window_ms = 86'400'000;
    std::int64_t cadence_ms = 60'000;
    std::size_t k_min = 30;
};

[[nodiscard]] constexpr std::int64_t ceil_to_multiple(std::int64_t t, std::int64_t step) noexcept
{
    const auto q = t / step;
    const auto r = t % step;
    return (r > 0 ? q + 1 : q) * step;
}

/// Rolling liquidity: on every cadence point t from the first record to the
/// last, takes the records in (t - window, t]. Points with no records are
/// skipped.
[[nodiscard]] inline std::vector<LiquiditySample>
liquidity_stream(std::span<const TransitionRecord> records, const TransitionMatrix& w,
                 const InfoSummary& info, const LiquidityOptions& options = {})
{
    if (options.window_ms <= 0 || options.cadence_ms <= 0)
    {
        throw invalid_input("window and cadence must be positive");
    }
    if (records.empty())
    {
        return {};
    }
    std::vector<double> prefix(records.size() + 1, 0.0);
    for (std::size_t i = 0; i < records.size(); ++i)
    {
        if (i > 0 && records[i].time < records[i - 1].time)
        {
            throw data_error("transition records out of time order");
        }
        prefix[i + 1] = prefix[i] + surprisal(w(records[i].from, records[i].to));
    }

    std::vector<LiquiditySample> out;
    const auto first = ceil_to_multiple(records.front().time, options.cadence_ms);
    const auto last = ceil_to_multiple(records.back().time, options.cadence_ms);
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (auto t = first; t <= last; t += options.cadence_ms)
    {
        while (hi < records.size() && records[hi].time <= t)
        {
            ++hi;
        }
        while (lo < hi && records[lo].time <= t - options.window_ms)
        {
            ++lo;
        }
        const auto k = hi - lo;
        if (k == 0)
        {
            continue;
        }
        LiquiditySample sample;
        sample.time = t;
        sample.K = k;
        sample.surprise = prefix[hi] - prefix[lo];
        const double excess = sample.surprise - static_cast<double>(k) * info.h1;
        if (info.h2 > 0.0)
        {
            sample.z = excess / std::sqrt(static_cast<double>(k) * info.h2);
        }
        else if (std::abs(excess) <= 1e-9 * static_cast<double>(k))
        {
            sample.z = 0.0;
        }
        else
        {
            throw data_error("second-order informativeness is zero but the surprise varies; "
                             "the ladder is degenerate");
        }
        sample.liquidity = 1.0 - normal_cdf(sample.z);
        sample.low_confidence = k < options.k_min;
        out.push_back(sample);
    }
    return out;
}

inline constexpr std::string_view liquidity_header =
    "time_ms,K,surprise_nats,z,liquidity,low_confidence";

inline void write_liquidity(std::ostream& out, std::span<const LiquiditySample> samples)
{
    out << liquidity_header << '\n';
    for (const auto& s : samples)
    {
        out << s.time << ',' << s.K << ',' << csv::format_fixed(s.surprise, 6) << ','
            << csv::format_fixed(s.z, 6) << ',' << csv::format_fixed(s.liquidity, 6) << ','
            << (s.low_confidence ? 1 : 0) << '\n';
    }
}

} // namespace intrinsic
