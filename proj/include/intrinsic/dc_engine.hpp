#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "ticks.hpp"

namespace intrinsic {

/// Strictly increasing positive relative thresholds, smallest first.
class ThresholdLadder
{
public:
    ThresholdLadder() = default;

    explicit ThresholdLadder(std::vector<double> deltas) : deltas_(std::move(deltas))
    {
        if (deltas_.empty())
        {
            throw invalid_input("threshold ladder must not be empty");
        }
        for (std::size_t i = 0; i < deltas_.size(); ++i)
        {
            if (!(deltas_[i] > 0.0) || !std::isfinite(deltas_[i]))
            {
                throw invalid_input("threshold ladder entries must be positive");
            }
            if (i > 0 && !(deltas_[i] > deltas_[i - 1]))
            {
                throw invalid_input("threshold ladder must be strictly increasing");
            }
        }
    }

    /// delta1, delta1*ratio, delta1*ratio^2, ...
    [[nodiscard]] static ThresholdLadder geometric(double delta1, double ratio, std::size_t n)
    {
        if (n == 0)
        {
            throw invalid_input("threshold ladder must not be empty");
        }
        std::vector<double> deltas(n);
        deltas[0] = delta1;
        for (std::size_t i = 1; i < n; ++i)
        {
            deltas[i] = deltas[i - 1] * ratio;
        }
        return ThresholdLadder(std::move(deltas));
    }

    [[nodiscard]] std::size_t size() const noexcept { return deltas_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return deltas_[i]; }
    [[nodiscard]] std::span<const double> deltas() const noexcept { return deltas_; }

    [[nodiscard]] ThresholdLadder scaled(double factor) const
    {
        auto deltas = deltas_;
        for (auto& d : deltas)
        {
            d *= factor;
        }
        return ThresholdLadder(std::move(deltas));
    }

    /// The ladder without its smallest threshold.
    [[nodiscard]] ThresholdLadder without_smallest() const
    {
        if (deltas_.size() < 2)
        {
            throw invalid_input("cannot drop the only threshold of a ladder");
        }
        return ThresholdLadder(std::vector<double>(deltas_.begin() + 1, deltas_.end()));
    }

    friend bool operator==(const ThresholdLadder&, const ThresholdLadder&) = default;

private:
    std::vector<double> deltas_;
};

/// Direction of the move that would confirm the next directional change.
enum class Mode : std::uint8_t
{
    expect_up,
    expect_down,
};

enum class EventKind : std::uint8_t
{
    dc_up,
    dc_down,
};

[[nodiscard]] constexpr std::string_view to_string(EventKind kind) noexcept
{
    return kind == EventKind::dc_up ? "up" : "down";
}

[[nodiscard]] inline std::optional<EventKind> parse_event_kind(std::string_view text) noexcept
{
    if (text == "up")
    {
        return EventKind::dc_up;
    }
    if (text == "down")
    {
        return EventKind::dc_down;
    }
    return std::nullopt;
}

struct RunnerState
{
    Mode mode = Mode::expect_up;
    double extreme = 0.0;
    std::int64_t extreme_time = 0;
    double last_dc_price = 0.0;
    std::int64_t last_dc_time = 0;
    bool has_dc = false;

    [[nodiscard]] static RunnerState initial(double price, std::int64_t time,
                                             Mode mode = Mode::expect_up) noexcept
    {
        RunnerState state;
        state.mode = mode;
        state.extreme = price;
        state.extreme_time = time;
        state.last_dc_price = price;
        state.last_dc_time = time;
        return state;
    }

    friend bool operator==(const RunnerState&, const RunnerState&) = default;
};

/// A confirmed directional change at one threshold, carrying the overshoot
/// that it terminated. The first event of a stream has no overshoot.
struct IntrinsicEvent
{
    std::size_t threshold_index = 0;
    EventKind kind = EventKind::dc_up;
    double confirm_price = 0.0;
    std::int64_t confirm_time = 0;
    /// Relative move from the previous confirmation to the extremum that
    /// preceded this reversal; positive for upward overshoots.
    std::optional<double> overshoot_amplitude;
    std::optional<std::int64_t> overshoot_duration_ms;
    /// Extremum from which this directional change was measured.
    double extreme_price = 0.0;
    /// Tick ordinal, used to keep simultaneous confirmations in tick order.
    std::uint64_t sequence = 0;

    friend bool operator==(const IntrinsicEvent&, const IntrinsicEvent&) = default;
};

/// Advances one runner by one price. Relative version of the classic
/// dissection loop: the extremum tracks the trend, and a reversal of at
/// least `delta` relative to it confirms a directional change.
inline std::optional<IntrinsicEvent> advance(RunnerState& state, double delta, double price,
                                             std::int64_t time)
{
    auto confirm = [&](EventKind kind, Mode next) {
        IntrinsicEvent event;
        event.kind = kind;
        event.confirm_price = price;
        event.confirm_time = time;
        event.extreme_price = state.extreme;
        if (state.has_dc)
        {
            event.overshoot_amplitude = state.extreme / state.last_dc_price - 1.0;
            event.overshoot_duration_ms = state.extreme_time - state.last_dc_time;
        }
        state.extreme = price;
        state.extreme_time = time;
        state.last_dc_price = price;
        state.last_dc_time = time;
        state.has_dc = true;
        state.mode = next;
        return event;
    };

    if (state.mode == Mode::expect_down)
    {
        if (price > state.extreme)
        {
            state.extreme = price;
            state.extreme_time = time;
        }
        else if (price / state.extreme - 1.0 <= -delta)
        {
            return confirm(EventKind::dc_down, Mode::expect_up);
        }
    }
    else
    {
        if (price < state.extreme)
        {
            state.extreme = price;
            state.extreme_time = time;
        }
        else if (price / state.extreme - 1.0 >= delta)
        {
            return confirm(EventKind::dc_up, Mode::expect_down);
        }
    }
    return std::nullopt;
}

struct RunnerStep
{
    RunnerState state;
    std::optional<IntrinsicEvent> event;
};

[[nodiscard]] inline RunnerStep runner_step(RunnerState state, double delta, double price,
                                            std::int64_t time)
{
    auto event = advance(state, delta, price, time);
    return {state, std::move(event)};
}

/// Streaming dissection over a whole ladder. Runners are independent; on a
/// tick that fires several thresholds the events are delivered smallest
/// threshold first.
class Dissector
{
public:
    explicit Dissector(ThresholdLadder ladder, Mode initial_mode = Mode::expect_up)
        : ladder_(std::move(ladder)), initial_mode_(initial_mode), states_(ladder_.size())
    {
    }

    template <typename Sink>
    void push(double price, std::int64_t time, Sink&& sink)
    {
        if (!started_)
        {
            for (auto& state : states_)
            {
                state = RunnerState::initial(price, time, initial_mode_);
            }
            started_ = true;
            ++sequence_;
            return;
        }
        for (std::size_t i = 0; i < states_.size(); ++i)
        {
            if (auto event = advance(states_[i], ladder_[i], price, time))
            {
                event->threshold_index = i;
                event->sequence = sequence_;
                sink(*event);
            }
        }
        ++sequence_;
    }

    [[nodiscard]] const ThresholdLadder& ladder() const noexcept { return ladder_; }
    [[nodiscard]] Mode initial_mode() const noexcept { return initial_mode_; }
    [[nodiscard]] std::span<const RunnerState> states() const noexcept { return states_; }

private:
    ThresholdLadder ladder_;
    Mode initial_mode_;
    std::vector<RunnerState> states_;
    bool started_ = false;
    std::uint64_t sequence_ = 0;
};

/// One event stream per threshold, each strictly time-ordered.
using EventStreams = std::vector<std::vector<IntrinsicEvent>>;

[[nodiscard]] inline EventStreams dissect(std::span<const Tick> ticks, const ThresholdLadder& ladder,
                                          Mode initial_mode = Mode::expect_up)
{
    if (ticks.empty())
    {
        throw data_error("cannot dissect an empty series");
    }
    EventStreams streams(ladder.size());
    Dissector dissector(ladder, initial_mode);
    for (const auto& tick : ticks)
    {
        dissector.push(midprice(tick), tick.timestamp_ms,
                       [&](const IntrinsicEvent& e) { streams[e.threshold_index].push_back(e); });
    }
    return streams;
}

[[nodiscard]] inline EventStreams dissect(const PriceSeries& series, const ThresholdLadder& ladder,
                                          Mode initial_mode = Mode::expect_up)
{
    return dissect(std::span<const Tick>(series.ticks), ladder, initial_mode);
}

/// All events in tick order, smallest threshold first within a tick.
[[nodiscard]] inline std::vector<IntrinsicEvent> merge_streams(const EventStreams& streams)
{
    std::vector<IntrinsicEvent> merged;
    for (const auto& stream : streams)
    {
        merged.insert(merged.end(), stream.begin(), stream.end());
    }
    std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
        if (a.confirm_time != b.confirm_time)
        {
            return a.confirm_time < b.confirm_time;
        }
        if (a.sequence != b.sequence)
        {
            return a.sequence < b.sequence;
        }
        return a.threshold_index < b.threshold_index;
    });
    return merged;
}

inline constexpr std::string_view events_header =
    "threshold_index,kind,confirm_time_ms,confirm_price,overshoot_amplitude,overshoot_duration_ms";

/// Writes the merged event table. Missing overshoots (first event of a
/// stream) are empty fields.
inline void write_events(std::ostream& out, const EventStreams& streams)
{
    out << events_header << '\n';
    for (const auto& e : merge_streams(streams))
    {
        out << e.threshold_index << ',' << to_string(e.kind) << ',' << e.confirm_time << ','
            << csv::format(e.confirm_price) << ',';
        if (e.overshoot_amplitude)
        {
            out << csv::format(*e.overshoot_amplitude);
        }
        out << ',';
        if (e.overshoot_duration_ms)
        {
            out << *e.overshoot_duration_ms;
        }
        out << '\n';
    }
}

/// Reads an event table back into per-threshold streams. Row order becomes
/// the event sequence, so a table written by write_events replays exactly
/// as the in-memory streams do.
[[nodiscard]] inline EventStreams parse_events(std::string_view text, std::size_t ladder_size)
{
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != events_header)
    {
        throw data_error("line 1: expected header '" + std::string(events_header) + "'");
    }
    EventStreams streams(ladder_size);
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        if (rows[i].empty())
        {
            continue;
        }
        const auto line_no = std::to_string(i + 1);
        const auto f = csv::split(rows[i]);
        if (f.size() != 6)
        {
            throw data_error("line " + line_no + ": malformed row, expected 6 fields");
        }
        IntrinsicEvent e;
        const auto index = csv::parse_number<std::size_t>(f[0]);
        const auto kind = parse_event_kind(f[1]);
        const auto time = csv::parse_number<std::int64_t>(f[2]);
        const auto price = csv::parse_number<double>(f[3]);
        if (!index || !kind || !time || !price)
        {
            throw data_error("line " + line_no + ": malformed row");
        }
        if (*index >= ladder_size)
        {
            throw data_error("line " + line_no + ": threshold index outside the ladder");
        }
        e.threshold_index = *index;
        e.kind = *kind;
        e.confirm_time = *time;
        e.confirm_price = *price;
        if (!f[4].empty())
        {
            e.overshoot_amplitude = csv::parse_number<double>(f[4]);
            if (!e.overshoot_amplitude)
            {
                throw data_error("line " + line_no + ": malformed overshoot amplitude");
            }
        }
        if (!f[5].empty())
        {
            e.overshoot_duration_ms = csv::parse_number<std::int64_t>(f[5]);
            if (!e.overshoot_duration_ms)
            {
                throw data_error("line " + line_no + ": malformed overshoot duration");
            }
        }
        e.sequence = i;
        auto& stream = streams[e.threshold_index];
        if (!stream.empty() && e.confirm_time < stream.back().confirm_time)
        {
            throw data_error("line " + line_no + ": events out of time order");
        }
        stream.push_back(e);
    }
    return streams;
}

} // namespace intrinsic
