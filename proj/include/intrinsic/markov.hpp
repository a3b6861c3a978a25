#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "csv.hpp"
#include "dc_engine.hpp"
#include "error.hpp"
#include "network.hpp"

namespace intrinsic {

/// Row-stochastic matrix on the 2^n states of an intrinsic network. A row
/// has at most two entries, both on legal edges, so every size is stored
/// as compact rows.
class TransitionMatrix
{
public:
    struct Entry
    {
        StateCode to = 0;
        double prob = 0.0;

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    struct Row
    {
        std::array<Entry, 2> entries{};
        std::uint8_t count = 0;

        [[nodiscard]] const Entry* begin() const noexcept { return entries.data(); }
        [[nodiscard]] const Entry* end() const noexcept { return entries.data() + count; }

        friend bool operator==(const Row&, const Row&) = default;
    };

    TransitionMatrix() = default;

    explicit TransitionMatrix(std::size_t n) : n_(n)
    {
        if (n == 0 || n > max_network_size)
        {
            throw invalid_input("network size must be in 1.." + std::to_string(max_network_size));
        }
        rows_.resize(state_count(n));
    }

    [[nodiscard]] std::size_t network_size() const noexcept { return n_; }
    [[nodiscard]] std::size_t states() const noexcept { return rows_.size(); }
    [[nodiscard]] const Row& row(StateCode s) const { return rows_.at(s); }

    /// Sets P(from -> to); the edge must be legal.
    void set(StateCode from, StateCode to, double prob)
    {
        if (from >= states() || to >= states() || !is_legal_edge(from, to, n_))
        {
            throw invalid_input("illegal matrix entry " + std::to_string(from) + " -> " +
                                std::to_string(to));
        }
        auto& r = rows_[from];
        for (std::uint8_t k = 0; k < r.count; ++k)
        {
            if (r.entries[k].to == to)
            {
                r.entries[k].prob = prob;
                return;
            }
        }
        r.entries[r.count++] = Entry{to, prob};
        if (r.count == 2 && r.entries[0].to > r.entries[1].to)
        {
            std::swap(r.entries[0], r.entries[1]);
        }
    }

    [[nodiscard]] double operator()(StateCode from, StateCode to) const
    {
        for (const auto& e : rows_.at(from))
        {
            if (e.to == to)
            {
                return e.prob;
            }
        }
        return 0.0;
    }

    /// Throws unless every row sums to one within `tolerance`, entries are
    /// in [0,1], and blind-spot rows hold a single certain entry.
    void validate(double tolerance = 1e-12) const
    {
        for (StateCode s = 0; s < states(); ++s)
        {
            const auto& r = rows_[s];
            double sum = 0.0;
            for (const auto& e : r)
            {
                if (!(e.prob >= 0.0 && e.prob <= 1.0))
                {
                    throw data_error("row " + std::to_string(s) + ": probability outside [0,1]");
                }
                sum += e.prob;
            }
            if (std::abs(sum - 1.0) > tolerance)
            {
                throw data_error("row " + std::to_string(s) + " sums to " + csv::format(sum));
            }
            if (successors(s, n_).count == 1 && r.count != 1)
            {
                throw data_error("blind-spot row " + std::to_string(s) + " must have one entry");
            }
        }
    }

    [[nodiscard]] std::vector<std::vector<double>> to_dense() const
    {
        if (n_ > 12)
        {
            throw invalid_input("dense form is limited to n <= 12");
        }
        std::vector<std::vector<double>> dense(states(), std::vector<double>(states(), 0.0));
        for (StateCode s = 0; s < states(); ++s)
        {
            for (const auto& e : rows_[s])
            {
                dense[s][e.to] = e.prob;
            }
        }
        return dense;
    }

    friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<Row> rows_;
};

/// exp(-(d2-d1)/d1), the chance an overshoot at d1 stretches to d2.
[[nodiscard]] inline double reach_probability(double d1, double d2)
{
    return std::exp(-(d2 / d1 - 1.0));
}

[[nodiscard]] inline TransitionMatrix alternator()
{
    TransitionMatrix w(1);
    w.set(0, 1, 1.0);
    w.set(1, 0, 1.0);
    return w;
}

[[nodiscard]] inline TransitionMatrix two_threshold_matrix(double delta1, double delta2)
{
    if (!(delta1 > 0.0) || !(delta2 > delta1))
    {
        throw invalid_input("two-threshold matrix needs 0 < delta1 < delta2");
    }
    const double a = reach_probability(delta1, delta2);
    TransitionMatrix w(2);
    w.set(0, 1, 1.0);
    w.set(1, 3, a);
    w.set(1, 0, 1.0 - a);
    w.set(2, 0, a);
    w.set(2, 3, 1.0 - a);
    w.set(3, 2, 1.0);
    return w;
}

/// p[i] for 0-based i >= 1: probability that a state whose first bit
/// differing from b_1 is b_{i+1} flips that bit rather than b_1.
[[nodiscard]] inline std::vector<double> branch_probabilities(const ThresholdLadder& ladder)
{
    const auto n = ladder.size();
    std::vector<double> r(n, 1.0);
    for (std::size_t k = 1; k < n; ++k)
    {
        r[k] = reach_probability(ladder[k - 1], ladder[k]);
    }
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
    {
        double numerator = 1.0;
        for (std::size_t k = 1; k <= i; ++k)
        {
            numerator *= r[k];
        }
        double returns = 0.0;
        for (std::size_t k = 1; k < i; ++k)
        {
            double tail = 1.0;
            for (std::size_t j = k + 1; j <= i; ++j)
            {
                tail *= r[j];
            }
            returns += (1.0 - r[k]) * tail;
        }
        p[i] = numerator / (1.0 - returns);
    }
    return p;
}

inline constexpr std::size_t max_analytic_size = 20;

[[nodiscard]] inline TransitionMatrix analytic_matrix(const ThresholdLadder& ladder)
{
    const auto n = ladder.size();
    if (n == 0 || n > max_analytic_size)
    {
        throw invalid_input("analytic matrix supports 1 <= n <= " +
                            std::to_string(max_analytic_size));
    }
    const auto p = branch_probabilities(ladder);
    TransitionMatrix w(n);
    for (StateCode s = 0; s < state_count(n); ++s)
    {
        const auto i = first_differing_bit(s, n);
        if (i == n)
        {
            w.set(s, s ^ 1U, 1.0);
            continue;
        }
        w.set(s, s ^ (StateCode{1} << i), p[i]);
        w.set(s, s ^ 1U, 1.0 - p[i]);
    }
    return w;
}

/// Level-j island k: the pair of level-(j-1) states {2k, 2k+1}.
struct Island
{
    std::size_t level = 1;
    StateCode index = 0;

    [[nodiscard]] std::array<StateCode, 2> members() const noexcept
    {
        return {2 * index, 2 * index + 1};
    }

    /// The member entered from outside: its b_1 equals b_2.
    [[nodiscard]] StateCode entry() const noexcept { return 2 * index + (index & 1U); }
};

[[nodiscard]] inline Island island_of(StateCode s) noexcept
{
    return Island{1, s >> 1};
}

/// Removes the smallest threshold by summing the geometric series of
/// bounces inside each island.
[[nodiscard]] inline TransitionMatrix contract(const TransitionMatrix& w)
{
    const auto n = w.network_size();
    if (n < 2)
    {
        throw invalid_input("contraction needs at least two thresholds");
    }
    TransitionMatrix out(n - 1);
    for (StateCode k = 0; k < out.states(); ++k)
    {
        const Island island{1, k};
        const StateCode e = island.entry();
        const StateCode o = e ^ 1U;
        const double eo = w(e, o);
        const double denominator = 1.0 - eo * w(o, e);
        if (!(denominator > 0.0))
        {
            throw data_error("island " + std::to_string(k) + " never exits");
        }
        for (auto j : successors(k, n - 1))
        {
            const double direct = w(e, 2 * j + (e & 1U));
            const double via_partner = eo * w(o, 2 * j + (o & 1U));
            out.set(k, j, (direct + via_partner) / denominator);
        }
    }
    return out;
}

/// Probability that a path started at x reaches x + Delta before falling
/// delta below its running maximum, under drift mu and volatility sigma.
[[nodiscard]] inline double drifted_escape_probability(double Delta, double delta, double mu,
                                                       double sigma)
{
    if (!(Delta > 0.0) || !(delta > 0.0) || !(sigma > 0.0) || !std::isfinite(mu))
    {
        throw invalid_input("escape probability needs Delta, delta, sigma > 0");
    }
    const double s2 = sigma * sigma;
    if (mu == 0.0)
    {
        return std::exp(-Delta / delta);
    }
    const double a = 2.0 * delta * std::abs(mu) / s2;
    const double rate = mu > 0.0 ? 2.0 * mu / std::expm1(a) : 2.0 * -mu / -std::expm1(-a);
    return std::exp(-Delta / s2 * rate);
}

inline constexpr std::string_view matrix_header = "from,to,prob";

inline void write_matrix(std::ostream& out, const TransitionMatrix& w)
{
    out << matrix_header << '\n';
    for (StateCode s = 0; s < w.states(); ++s)
    {
        for (const auto& e : w.row(s))
        {
            out << s << ',' << e.to << ',' << csv::format(e.prob) << '\n';
        }
    }
}

/// Reads sparse triplets. The network size is the smallest n whose state
/// space holds every index; every row must be present and stochastic.
[[nodiscard]] inline TransitionMatrix parse_matrix(std::string_view text)
{
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != matrix_header)
    {
        throw data_error("line 1: expected header '" + std::string(matrix_header) + "'");
    }
    struct Triplet
    {
        StateCode from, to;
        double prob;
        std::size_t line;
    };
    std::vector<Triplet> triplets;
    StateCode largest = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        if (rows[i].empty())
        {
            continue;
        }
        const auto line_no = std::to_string(i + 1);
        const auto f = csv::split(rows[i]);
        if (f.size() != 3)
        {
            throw data_error("line " + line_no + ": malformed row, expected 3 fields");
        }
        const auto from = csv::parse_number<StateCode>(f[0]);
        const auto to = csv::parse_number<StateCode>(f[1]);
        const auto prob = csv::parse_number<double>(f[2]);
        if (!from || !to || !prob)
        {
            throw data_error("line " + line_no + ": malformed row");
        }
        largest = std::max({largest, *from, *to});
        triplets.push_back({*from, *to, *prob, i + 1});
    }
    std::size_t n = 1;
    while (state_count(n) <= largest)
    {
        ++n;
    }
    if (n > max_network_size)
    {
        throw data_error("matrix too large");
    }
    TransitionMatrix w(n);
    for (const auto& t : triplets)
    {
        if (!is_legal_edge(t.from, t.to, n))
        {
            throw data_error("line " + std::to_string(t.line) + ": illegal transition");
        }
        w.set(t.from, t.to, t.prob);
    }
    w.validate(1e-9);
    return w;
}

} // namespace intrinsic
