#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "csv.hpp"
#include "dc_engine.hpp"
#include "error.hpp"
#include "network.hpp"

namespace intrinsic {

/// Parses `250ms`, `5s`, `1m`, `2h`, `1d` into milliseconds.
[[nodiscard]] inline std::int64_t parse_duration(std::string_view text)
{
    struct Unit
    {
        std::string_view suffix;
        std::int64_t ms;
    };
    static constexpr Unit units[] = {{"ms", 1}, {"s", 1000}, {"m", 60'000}, {"h", 3'600'000},
                                     {"d", 86'400'000}};
    for (const auto& unit : units)
    {
        if (text.size() > unit.suffix.size() && text.ends_with(unit.suffix))
        {
            const auto number = text.substr(0, text.size() - unit.suffix.size());
            if (unit.suffix == "s" && number.ends_with('m'))
            {
                continue;
            }
            const auto value = csv::parse_number<std::int64_t>(number);
            if (!value || *value <= 0)
            {
                break;
            }
            return *value * unit.ms;
        }
    }
    throw invalid_input("invalid duration '" + std::string(text) +
                        "' (expected a positive integer with ms, s, m, h or d)");
}

/// Largest unit that represents `ms` exactly.
[[nodiscard]] inline std::string format_duration(std::int64_t ms)
{
    if (ms > 0 && ms % 86'400'000 == 0)
    {
        return std::to_string(ms / 86'400'000) + "d";
    }
    if (ms > 0 && ms % 3'600'000 == 0)
    {
        return std::to_string(ms / 3'600'000) + "h";
    }
    if (ms > 0 && ms % 60'000 == 0)
    {
        return std::to_string(ms / 60'000) + "m";
    }
    if (ms > 0 && ms % 1000 == 0)
    {
        return std::to_string(ms / 1000) + "s";
    }
    return std::to_string(ms) + "ms";
}

[[nodiscard]] inline std::vector<double> parse_delta_list(std::string_view text)
{
    std::vector<double> deltas;
    for (auto field : csv::split(text))
    {
        const auto value = csv::parse_number<double>(field);
        if (!value)
        {
            throw invalid_input("invalid threshold '" + std::string(field) + "'");
        }
        deltas.push_back(*value);
    }
    return deltas;
}

/// Settings shared by every subcommand. The ladder is either an explicit
/// list or the geometric family (n, delta1, ratio).
struct RunConfig
{
    std::optional<std::vector<double>> deltas;
    std::size_t n = 12;
    double delta1 = 0.00025;
    double ratio = 2.0;
    std::int64_t window_ms = 86'400'000;
    std::int64_t cadence_ms = 60'000;
    std::size_t k_min = 30;
    std::uint64_t seed = 1;
    std::size_t h2_chain = 10'000'000;
    std::size_t h2_lag = 64;
    WarmupPolicy warmup = WarmupPolicy::seed_from_mode;
    Mode initial_mode = Mode::expect_up;

    [[nodiscard]] ThresholdLadder ladder() const
    {
        if (deltas)
        {
            return ThresholdLadder(*deltas);
        }
        return ThresholdLadder::geometric(delta1, ratio, n);
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void write_config(std::ostream& out, const RunConfig& config)
{
    if (config.deltas)
    {
        out << "deltas=";
        for (std::size_t i = 0; i < config.deltas->size(); ++i)
        {
            out << (i ? "," : "") << csv::format((*config.deltas)[i]);
        }
        out << '\n';
    }
    else
    {
        out << "n=" << config.n << '\n'
            << "delta1=" << csv::format(config.delta1) << '\n'
            << "ratio=" << csv::format(config.ratio) << '\n';
    }
    out << "window=" << format_duration(config.window_ms) << '\n'
        << "cadence=" << format_duration(config.cadence_ms) << '\n'
        << "k_min=" << config.k_min << '\n'
        << "seed=" << config.seed << '\n'
        << "h2_chain=" << config.h2_chain << '\n'
        << "h2_lag=" << config.h2_lag << '\n'
        << "warmup=" << to_string(config.warmup) << '\n'
        << "initial_mode=" << (config.initial_mode == Mode::expect_up ? "up" : "down") << '\n';
}

/// Key-value lines; `#` starts a comment. Keys absent from the text keep the
/// values already in `config`.
inline void apply_config(std::string_view text, RunConfig& config)
{
    std::map<std::string, std::string> seen;
    const auto rows = csv::lines(text);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        auto line = rows[i];
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
        {
            line = line.substr(0, hash);
        }
        if (line.find_first_not_of(" \t") == std::string_view::npos)
        {
            continue;
        }
        const auto line_no = std::to_string(i + 1);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
        {
            throw invalid_input("config line " + line_no + ": expected key=value");
        }
        auto trim = [](std::string_view v) {
            while (!v.empty() && (v.front() == ' ' || v.front() == '\t'))
            {
                v.remove_prefix(1);
            }
            while (!v.empty() && (v.back() == ' ' || v.back() == '\t'))
            {
                v.remove_suffix(1);
            }
            return v;
        };
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (!seen.emplace(key, value).second)
        {
            throw invalid_input("config line " + line_no + ": duplicate key '" + key + "'");
        }
        auto integer = [&]() {
            const auto v = csv::parse_number<std::uint64_t>(value);
            if (!v)
            {
                throw invalid_input("config line " + line_no + ": '" + key + "' needs an integer");
            }
            return *v;
        };
        auto real = [&]() {
            const auto v = csv::parse_number<double>(value);
            if (!v)
            {
                throw invalid_input("config line " + line_no + ": '" + key + "' needs a number");
            }
            return *v;
        };
        if (key == "deltas")
        {
            config.deltas = parse_delta_list(value);
        }
        else if (key == "n")
        {
            config.n = integer();
        }
        else if (key == "delta1")
        {
            config.delta1 = real();
        }
        else if (key == "ratio")
        {
            config.ratio = real();
        }
        else if (key == "window")
        {
            config.window_ms = parse_duration(value);
        }
        else if (key == "cadence")
        {
            config.cadence_ms = parse_duration(value);
        }
        else if (key == "k_min")
        {
            config.k_min = integer();
        }
        else if (key == "seed")
        {
            config.seed = integer();
        }
        else if (key == "h2_chain")
        {
            config.h2_chain = integer();
        }
        else if (key == "h2_lag")
        {
            config.h2_lag = integer();
        }
        else if (key == "warmup")
        {
            if (value == "seed")
            {
                config.warmup = WarmupPolicy::seed_from_mode;
            }
            else if (value == "discard")
            {
                config.warmup = WarmupPolicy::discard_until_confirmed;
            }
            else
            {
                throw invalid_input("config line " + line_no + ": warmup is 'seed' or 'discard'");
            }
        }
        else if (key == "initial_mode")
        {
            if (value == "up")
            {
                config.initial_mode = Mode::expect_up;
            }
            else if (value == "down")
            {
                config.initial_mode = Mode::expect_down;
            }
            else
            {
                throw invalid_input("config line " + line_no + ": initial_mode is 'up' or 'down'");
            }
        }
        else
        {
            throw invalid_input("config line " + line_no + ": unknown key '" + key + "'");
        }
    }
    if (config.deltas && (seen.contains("n") || seen.contains("delta1") || seen.contains("ratio")))
    {
        throw invalid_input("config gives both an explicit ladder and a geometric one");
    }
}

[[nodiscard]] inline RunConfig parse_config(std::string_view text)
{
    RunConfig config;
    apply_config(text, config);
    return config;
}

} // namespace intrinsic
