#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csv.hpp"
#include "dc_engine.hpp"
#include "error.hpp"

namespace intrinsic {

/// Numeric state code: bit i-1 holds b_i, so s = sum b_i 2^(i-1).
using StateCode = std::uint32_t;

inline constexpr std::size_t max_network_size = 24;

[[nodiscard]] constexpr std::size_t state_count(std::size_t n) noexcept
{
    return std::size_t{1} << n;
}

/// Binary market state over an n-threshold ladder. b_i = 1 means the
/// overshoot at scale i is moving up.
class MarketState
{
public:
    MarketState() = default;

    MarketState(StateCode code, std::size_t n) : code_(code), n_(n)
    {
        if (n == 0 || n > max_network_size)
        {
            throw invalid_input("network size must be in 1.." + std::to_string(max_network_size));
        }
        if (code >= state_count(n))
        {
            throw invalid_input("state " + std::to_string(code) + " out of range for n=" +
                                std::to_string(n));
        }
    }

    [[nodiscard]] StateCode code() const noexcept { return code_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    /// b_i for 1-based i.
    [[nodiscard]] bool bit(std::size_t i) const noexcept { return (code_ >> (i - 1)) & 1U; }

    [[nodiscard]] std::vector<int> bits() const
    {
        std::vector<int> out(n_);
        for (std::size_t i = 0; i < n_; ++i)
        {
            out[i] = static_cast<int>((code_ >> i) & 1U);
        }
        return out;
    }

    [[nodiscard]] bool is_blind_spot() const noexcept
    {
        return code_ == 0 || code_ == state_count(n_) - 1;
    }

    friend bool operator==(const MarketState&, const MarketState&) = default;

private:
    StateCode code_ = 0;
    std::size_t n_ = 1;
};

[[nodiscard]] inline StateCode encode(std::span<const int> bits)
{
    if (bits.empty() || bits.size() > max_network_size)
    {
        throw invalid_input("bit vector length must be in 1.." + std::to_string(max_network_size));
    }
    StateCode s = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
    {
        if (bits[i] != 0 && bits[i] != 1)
        {
            throw invalid_input("state bits must be 0 or 1");
        }
        s |= static_cast<StateCode>(bits[i]) << i;
    }
    return s;
}

[[nodiscard]] inline StateCode encode(std::initializer_list<int> bits)
{
    return encode(std::span<const int>(bits.begin(), bits.size()));
}

[[nodiscard]] inline std::vector<int> decode(StateCode s, std::size_t n)
{
    return MarketState(s, n).bits();
}

/// Up to two successor codes.
struct Successors
{
    std::array<StateCode, 2> states{};
    std::size_t count = 0;

    [[nodiscard]] constexpr const StateCode* begin() const noexcept { return states.data(); }
    [[nodiscard]] constexpr const StateCode* end() const noexcept { return states.data() + count; }
    [[nodiscard]] constexpr bool contains(StateCode s) const noexcept
    {
        return (count > 0 && states[0] == s) || (count > 1 && states[1] == s);
    }
};

/// 0-based index of the first bit that differs from b_1, or n when every
/// bit equals b_1 (the blind spots).
[[nodiscard]] constexpr std::size_t first_differing_bit(StateCode s, std::size_t n) noexcept
{
    const StateCode mask = static_cast<StateCode>(state_count(n) - 1);
    const StateCode differs = ((s & 1U) ? ~s : s) & mask & ~StateCode{1};
    return differs == 0 ? n : static_cast<std::size_t>(std::countr_zero(differs));
}

/// Flip b_1 always; additionally flip the first bit differing from b_1.
/// Blind spots have only the first.
[[nodiscard]] constexpr Successors successors(StateCode s, std::size_t n) noexcept
{
    Successors out;
    out.states[out.count++] = s ^ 1U;
    const auto i = first_differing_bit(s, n);
    if (i < n)
    {
        out.states[out.count++] = s ^ (StateCode{1} << i);
    }
    return out;
}

[[nodiscard]] inline std::vector<MarketState> successors(const MarketState& state)
{
    std::vector<MarketState> out;
    for (auto s : successors(state.code(), state.size()))
    {
        out.emplace_back(s, state.size());
    }
    return out;
}

[[nodiscard]] constexpr bool is_legal_edge(StateCode from, StateCode to, std::size_t n) noexcept
{
    return successors(from, n).contains(to);
}

struct TransitionRecord
{
    std::int64_t time = 0;
    StateCode from = 0;
    StateCode to = 0;
    std::size_t trigger_threshold = 0;

    friend bool operator==(const TransitionRecord&, const TransitionRecord&) = default;
};

enum class WarmupPolicy : std::uint8_t
{
    /// Before a threshold's first confirmation its bit is the direction
    /// opposite to the initial mode, so records start with the first event.
    seed_from_mode,
    /// Records start only once every threshold has confirmed once.
    discard_until_confirmed,
};

[[nodiscard]] constexpr std::string_view to_string(WarmupPolicy policy) noexcept
{
    return policy == WarmupPolicy::seed_from_mode ? "seed" : "discard";
}

/// Streaming state machine fed with events in merged order.
class NetworkTracker
{
public:
    explicit NetworkTracker(std::size_t n, WarmupPolicy policy = WarmupPolicy::seed_from_mode,
                            Mode initial_mode = Mode::expect_up)
        : n_(n), policy_(policy), confirmed_(n, false)
    {
        if (n == 0 || n > max_network_size)
        {
            throw invalid_input("network size must be in 1.." + std::to_string(max_network_size));
        }
        if (initial_mode == Mode::expect_down)
        {
            state_ = static_cast<StateCode>(state_count(n) - 1);
        }
        unconfirmed_ = n;
    }

    /// Applies one event; returns true and fills `record` when a transition
    /// is emitted.
    bool push(const IntrinsicEvent& event, TransitionRecord& record)
    {
        const auto i = event.threshold_index;
        if (i >= n_)
        {
            throw data_error("event threshold index " + std::to_string(i) + " outside the ladder");
        }
        const StateCode mask = StateCode{1} << i;
        const bool up = event.kind == EventKind::dc_up;
        const bool current = (state_ & mask) != 0;
        if (confirmed_[i] && current == up)
        {
            throw data_error("threshold " + std::to_string(i) +
                             ": event kinds do not alternate at time " +
                             std::to_string(event.confirm_time));
        }
        const StateCode next = up ? (state_ | mask) : (state_ & ~mask);
        const bool was_live = live();
        if (!confirmed_[i])
        {
            confirmed_[i] = true;
            --unconfirmed_;
        }
        const StateCode from = state_;
        state_ = next;
        if (!was_live || next == from)
        {
            return false;
        }
        if (!is_legal_edge(from, next, n_))
        {
            throw data_error("illegal transition " + std::to_string(from) + " -> " +
                             std::to_string(next) + " at time " +
                             std::to_string(event.confirm_time));
        }
        record = TransitionRecord{event.confirm_time, from, next, i};
        return true;
    }

    [[nodiscard]] bool live() const noexcept
    {
        return policy_ == WarmupPolicy::seed_from_mode || unconfirmed_ == 0;
    }

    [[nodiscard]] StateCode state() const noexcept { return state_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_;
    WarmupPolicy policy_;
    StateCode state_ = 0;
    std::vector<bool> confirmed_;
    std::size_t unconfirmed_ = 0;
};

[[nodiscard]] inline std::vector<TransitionRecord>
replay(const EventStreams& streams, std::size_t n,
       WarmupPolicy policy = WarmupPolicy::seed_from_mode, Mode initial_mode = Mode::expect_up)
{
    if (streams.size() != n)
    {
        throw invalid_input("expected " + std::to_string(n) + " event streams, got " +
                            std::to_string(streams.size()));
    }
    NetworkTracker tracker(n, policy, initial_mode);
    std::vector<TransitionRecord> records;
    TransitionRecord record;
    for (const auto& event : merge_streams(streams))
    {
        if (tracker.push(event, record))
        {
            records.push_back(record);
        }
    }
    return records;
}

[[nodiscard]] inline std::vector<TransitionRecord>
replay(const EventStreams& streams, const ThresholdLadder& ladder,
       WarmupPolicy policy = WarmupPolicy::seed_from_mode, Mode initial_mode = Mode::expect_up)
{
    return replay(streams, ladder.size(), policy, initial_mode);
}

inline constexpr std::string_view transitions_header = "time_ms,from_state,to_state,trigger_threshold";

inline void write_transitions(std::ostream& out, std::span<const TransitionRecord> records)
{
    out << transitions_header << '\n';
    for (const auto& r : records)
    {
        out << r.time << ',' << r.from << ',' << r.to << ',' << r.trigger_threshold << '\n';
    }
}

/// Reads a transition table and checks every edge against the rule for an
/// n-threshold network.
[[nodiscard]] inline std::vector<TransitionRecord> parse_transitions(std::string_view text,
                                                                     std::size_t n)
{
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != transitions_header)
    {
        throw data_error("line 1: expected header '" + std::string(transitions_header) + "'");
    }
    std::vector<TransitionRecord> records;
    records.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        if (rows[i].empty())
        {
            continue;
        }
        const auto line_no = std::to_string(i + 1);
        const auto f = csv::split(rows[i]);
        if (f.size() != 4)
        {
            throw data_error("line " + line_no + ": malformed row, expected 4 fields");
        }
        const auto time = csv::parse_number<std::int64_t>(f[0]);
        const auto from = csv::parse_number<StateCode>(f[1]);
        const auto to = csv::parse_number<StateCode>(f[2]);
        const auto trigger = csv::parse_number<std::size_t>(f[3]);
        if (!time || !from || !to || !trigger)
        {
            throw data_error("line " + line_no + ": malformed row");
        }
        if (*from >= state_count(n) || *to >= state_count(n) || *trigger >= n)
        {
            throw data_error("line " + line_no + ": state or threshold out of range");
        }
        if (!is_legal_edge(*from, *to, n))
        {
            throw data_error("line " + line_no + ": illegal transition");
        }
        if (!records.empty() && *time < records.back().time)
        {
            throw data_error("line " + line_no + ": decreasing time");
        }
        records.push_back(TransitionRecord{*time, *from, *to, *trigger});
    }
    return records;
}

} // namespace intrinsic
