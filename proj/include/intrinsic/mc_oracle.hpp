#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dc_engine.hpp"
#include "error.hpp"
#include "markov.hpp"
#include "network.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "ticks.hpp"

namespace intrinsic {

/// Arithmetic Brownian motion x += mu dt + sigma sqrt(dt) xi, in price units
/// per unit of time. One unit of time is `time_unit_ms` milliseconds.
struct SimConfig
{
    double sigma = 0.01;
    double mu = 0.0;
    double dt = 1.0;
    std::size_t steps = 1'000'000;
    double x0 = 1.0;
    std::uint64_t seed = 1;
    std::int64_t time_unit_ms = 1000;
    std::int64_t start_ms = 0;

    [[nodiscard]] double step_scale() const noexcept { return sigma * std::sqrt(dt); }
};

inline void validate(const SimConfig& config)
{
    if (!(config.sigma > 0.0) || !(config.dt > 0.0) || !(config.x0 > 0.0) ||
        !std::isfinite(config.mu))
    {
        throw invalid_input("simulation needs sigma > 0, dt > 0, x0 > 0 and a finite drift");
    }
    if (config.steps == 0)
    {
        throw invalid_input("simulation needs at least one step");
    }
}

/// Throws unless one step's standard deviation is at most 1/20 of the
/// smallest threshold, expressed in price units at x0.
inline void check_resolution(const SimConfig& config, double delta)
{
    validate(config);
    if (config.step_scale() > delta * config.x0 / 20.0)
    {
        throw invalid_input("resolution guard: sigma*sqrt(dt) must not exceed delta*x0/20");
    }
}

class PathGenerator
{
public:
    PathGenerator(const SimConfig& config, std::uint64_t stream)
        : engine_(make_engine(config.seed, stream)), drift_(config.mu * config.dt),
          scale_(config.step_scale()), x_(config.x0)
    {
    }

    [[nodiscard]] double value() const noexcept { return x_; }

    double next()
    {
        x_ += drift_ + scale_ * normal_(engine_);
        return x_;
    }

private:
    Engine engine_;
    NormalDistribution normal_;
    double drift_;
    double scale_;
    double x_;
};

[[nodiscard]] inline std::int64_t step_time(const SimConfig& config, std::size_t k)
{
    return config.start_ms +
           std::llround(static_cast<double>(k) * config.dt * static_cast<double>(config.time_unit_ms));
}

/// Zero-spread tick series of steps + 1 prices, stream 0 of the seed.
[[nodiscard]] inline PriceSeries simulate_path(const SimConfig& config)
{
    validate(config);
    PathGenerator path(config, 0);
    PriceSeries series;
    series.instrument = "simulated";
    series.ticks.reserve(config.steps + 1);
    series.ticks.push_back(Tick{config.start_ms, config.x0, config.x0});
    for (std::size_t k = 1; k <= config.steps; ++k)
    {
        const double x = path.next();
        if (!(x > 0.0))
        {
            throw data_error("simulated price left the positive domain at step " +
                             std::to_string(k));
        }
        series.ticks.push_back(Tick{step_time(config, k), x, x});
    }
    return series;
}

inline constexpr std::size_t max_simulated_paths = 10'000'000;

struct FitReport
{
    std::size_t overshoots = 0;
    double mean_ratio = 0.0;
    double ks_statistic = 0.0;
    double ks_pvalue = 0.0;
};

/// Collects overshoot amplitudes at one threshold over independent paths
/// (stream p for path p). Each path discards its first `warmup` events and
/// stops after `per_path` overshoots; `config.steps` only caps the path
/// length, and running into the cap is an error since a path cut at a fixed
/// time loses its unfinished, typically long, overshoot.
[[nodiscard]] inline std::vector<double> collect_overshoots(const SimConfig& config, double delta,
                                                            std::size_t count,
                                                            std::size_t warmup = 2,
                                                            std::size_t per_path = 20)
{
    check_resolution(config, delta);
    if (per_path == 0)
    {
        throw invalid_input("per_path must be positive");
    }
    std::vector<double> amplitudes;
    amplitudes.reserve(count);
    for (std::uint64_t p = 0; amplitudes.size() < count; ++p)
    {
        if (p >= max_simulated_paths)
        {
            throw data_error("could not collect the requested number of overshoots");
        }
        PathGenerator path(config, p);
        auto state = RunnerState::initial(config.x0, 0);
        std::size_t seen = 0;
        std::size_t taken = 0;
        for (std::size_t k = 1; taken < per_path && amplitudes.size() < count; ++k)
        {
            if (k > config.steps)
            {
                throw data_error("path " + std::to_string(p) + " ended after " + std::to_string(taken) +
                                 " overshoots; raise steps or lower per_path");
            }
            const double x = path.next();
            if (auto event = advance(state, delta, x, static_cast<std::int64_t>(k)))
            {
                if (seen++ >= warmup && event->overshoot_amplitude)
                {
                    amplitudes.push_back(std::abs(*event->overshoot_amplitude));
                    ++taken;
                }
            }
        }
    }
    return amplitudes;
}

[[nodiscard]] inline FitReport verify_fit(const SimConfig& config, double delta,
                                          std::size_t n_overshoots, std::size_t warmup = 2,
                                          std::size_t per_path = 20)
{
    const auto amplitudes = collect_overshoots(config, delta, n_overshoots, warmup, per_path);
    FitReport report;
    report.overshoots = amplitudes.size();
    report.mean_ratio = stats::mean(amplitudes) / delta;
    report.ks_statistic =
        stats::ks_statistic(amplitudes, [delta](double x) { return stats::exponential_cdf(x, delta); });
    report.ks_pvalue = stats::ks_pvalue(report.ks_statistic, report.overshoots);
    return report;
}

/// Transition counts observed on simulated paths.
class EmpiricalMatrix
{
public:
    static constexpr std::size_t max_history_size = 6;

    explicit EmpiricalMatrix(std::size_t n) : n_(n), counts_(state_count(n)), visits_(state_count(n))
    {
        if (n <= max_history_size)
        {
            history_.assign(state_count(n) * state_count(n) * 2, 0);
        }
    }

    void add(StateCode from, StateCode to)
    {
        const auto branch = branch_of(from, to);
        ++counts_[from][branch];
        ++visits_[from];
        ++total_;
    }

    /// Records a transition along with the state visited two transitions
    /// before `from`.
    void add(StateCode earlier, StateCode from, StateCode to)
    {
        add(from, to);
        if (!history_.empty())
        {
            ++history_[(earlier * state_count(n_) + from) * 2 + branch_of(from, to)];
        }
    }

    [[nodiscard]] std::size_t network_size() const noexcept { return n_; }
    [[nodiscard]] std::uint64_t total() const noexcept { return total_; }
    [[nodiscard]] std::uint64_t visits(StateCode s) const { return visits_.at(s); }
    [[nodiscard]] std::uint64_t count(StateCode from, StateCode to) const
    {
        return counts_.at(from)[branch_of(from, to)];
    }

    [[nodiscard]] double probability(StateCode from, StateCode to) const
    {
        const auto v = visits_.at(from);
        return v == 0 ? 0.0 : static_cast<double>(count(from, to)) / static_cast<double>(v);
    }

    /// Binomial standard error of probability(from, to).
    [[nodiscard]] double standard_error(StateCode from, StateCode to) const
    {
        const auto v = visits_.at(from);
        if (v == 0)
        {
            return 1.0;
        }
        const double p = probability(from, to);
        return std::sqrt(p * (1.0 - p) / static_cast<double>(v));
    }

    struct Conditional
    {
        double probability = 0.0;
        std::uint64_t visits = 0;
    };

    /// Frequency of from -> to among visits to `from` that were two
    /// transitions after a visit to `earlier`.
    [[nodiscard]] Conditional conditional(StateCode earlier, StateCode from, StateCode to) const
    {
        if (history_.empty())
        {
            throw invalid_input("history counts are kept only for n <= 6");
        }
        const auto base = (earlier * state_count(n_) + from) * 2;
        const auto v = history_[base] + history_[base + 1];
        const auto c = history_[base + branch_of(from, to)];
        return {v == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(v), v};
    }

    /// Frequencies as a matrix; every state must have been visited.
    [[nodiscard]] TransitionMatrix matrix() const
    {
        TransitionMatrix w(n_);
        for (StateCode s = 0; s < state_count(n_); ++s)
        {
            if (visits_[s] == 0)
            {
                throw data_error("state " + std::to_string(s) + " was never visited");
            }
            for (auto t : successors(s, n_))
            {
                w.set(s, t, probability(s, t));
            }
        }
        return w;
    }

private:
    [[nodiscard]] std::size_t branch_of(StateCode from, StateCode to) const
    {
        const auto succ = successors(from, n_);
        if (succ.states[0] == to)
        {
            return 0;
        }
        if (succ.count == 2 && succ.states[1] == to)
        {
            return 1;
        }
        throw data_error("illegal transition " + std::to_string(from) + " -> " + std::to_string(to));
    }

    std::size_t n_;
    std::vector<std::array<std::uint64_t, 2>> counts_;
    std::vector<std::uint64_t> visits_;
    std::vector<std::uint64_t> history_;
    std::uint64_t total_ = 0;
};

/// Replays simulated paths through the network until `n_transitions` are
/// counted. On each path, transitions count once every threshold has
/// confirmed at least `warmup` directional changes, and the path stops
/// after `per_path` counted transitions or `config.steps` steps.
[[nodiscard]] inline EmpiricalMatrix empirical_matrix(const SimConfig& config,
                                                      const ThresholdLadder& ladder,
                                                      std::uint64_t n_transitions,
                                                      std::size_t warmup = 2,
                                                      std::size_t per_path = 50)
{
    check_resolution(config, ladder[0]);
    const auto n = ladder.size();
    EmpiricalMatrix counts(n);
    for (std::uint64_t p = 0; counts.total() < n_transitions; ++p)
    {
        if (p >= max_simulated_paths)
        {
            throw data_error("insufficient transitions: " + std::to_string(counts.total()) +
                             " of " + std::to_string(n_transitions));
        }
        PathGenerator path(config, p);
        Dissector dissector(ladder);
        NetworkTracker tracker(n);
        std::vector<std::size_t> fired(n, 0);
        std::size_t warm = warmup == 0 ? n : 0;
        std::array<StateCode, 2> recent{};
        std::size_t seen = 0;
        std::size_t taken = 0;
        TransitionRecord record;
        dissector.push(config.x0, 0, [](const IntrinsicEvent&) {});
        for (std::size_t k = 1; k <= config.steps && taken < per_path && counts.total() < n_transitions; ++k)
        {
            dissector.push(path.next(), static_cast<std::int64_t>(k), [&](const IntrinsicEvent& e) {
                const bool emitted = tracker.push(e, record);
                if (fired[e.threshold_index] < warmup && ++fired[e.threshold_index] == warmup)
                {
                    ++warm;
                }
                if (!emitted)
                {
                    return;
                }
                if (warm == n && taken < per_path && counts.total() < n_transitions)
                {
                    ++taken;
                    if (seen >= 2)
                    {
                        counts.add(recent[0], record.from, record.to);
                    }
                    else
                    {
                        counts.add(record.from, record.to);
                    }
                }
                recent = {recent[1], record.from};
                ++seen;
            });
        }
    }
    return counts;
}

struct ProbabilityEstimate
{
    double probability = 0.0;
    double standard_error = 0.0;
    std::uint64_t samples = 0;
};

/// Monte Carlo for the chance that a Brownian path from 0 reaches +Delta
/// before dropping delta below its running maximum. Each step samples the
/// exact Brownian-bridge maximum and the bridge crossing probability of the
/// trailing barrier.
[[nodiscard]] inline ProbabilityEstimate
first_passage_probability(double Delta, double delta, double mu, double sigma,
                          std::uint64_t n_paths, std::uint64_t seed = 1, double dt = 0.0)
{
    if (!(Delta > 0.0) || !(delta > 0.0) || !(sigma > 0.0) || !std::isfinite(mu) || n_paths == 0)
    {
        throw invalid_input("first passage needs Delta, delta, sigma > 0 and at least one path");
    }
    const double resolution = std::min(Delta, delta) / 20.0;
    if (dt == 0.0)
    {
        dt = (resolution / sigma) * (resolution / sigma);
    }
    if (!(dt > 0.0) || sigma * std::sqrt(dt) > resolution * (1.0 + 1e-12))
    {
        throw invalid_input("resolution guard: sigma*sqrt(dt) must not exceed min(Delta, delta)/20");
    }
    const double drift = mu * dt;
    const double scale = sigma * std::sqrt(dt);
    const double variance = sigma * sigma * dt;
    constexpr std::uint64_t batch = 4096;

    std::uint64_t hits = 0;
    for (std::uint64_t b = 0; b * batch < n_paths; ++b)
    {
        auto engine = make_engine(seed, b);
        NormalDistribution normal;
        const auto end = std::min(n_paths, (b + 1) * batch);
        for (std::uint64_t p = b * batch; p < end; ++p)
        {
            double x = 0.0;
            double peak = 0.0;
            for (;;)
            {
                const double x1 = x + drift + scale * normal(engine);
                const double floor = peak - delta;
                bool lower = x1 <= floor;
                if (!lower)
                {
                    const double crossing = std::exp(-2.0 * (x - floor) * (x1 - floor) / variance);
                    lower = open_uniform(engine) <= crossing;
                }
                if (lower)
                {
                    break;
                }
                const double jump = x1 - x;
                const double bridge_max =
                    0.5 * (x + x1 + std::sqrt(jump * jump - 2.0 * variance * std::log(open_uniform(engine))));
                if (bridge_max >= Delta)
                {
                    ++hits;
                    break;
                }
                peak = std::max(peak, bridge_max);
                if (x1 <= peak - delta)
                {
                    break;
                }
                x = x1;
            }
        }
    }
    const double p = static_cast<double>(hits) / static_cast<double>(n_paths);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_paths)), n_paths};
}

} // namespace intrinsic
