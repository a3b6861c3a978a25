#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "oracles.hpp"

#include <intrinsic/markov.hpp>
#include <intrinsic/random.hpp>

using namespace intrinsic;
using Catch::Approx;

namespace {

double max_difference(const TransitionMatrix& a, const TransitionMatrix& b)
{
    REQUIRE(a.states() == b.states());
    const auto da = a.to_dense();
    const auto db = b.to_dense();
    double worst = 0.0;
    for (std::size_t s = 0; s < da.size(); ++s)
    {
        for (std::size_t t = 0; t < da.size(); ++t)
        {
            worst = std::max(worst, std::abs(da[s][t] - db[s][t]));
        }
    }
    return worst;
}

ThresholdLadder random_geometric(Engine& engine, std::size_t n)
{
    UniformDistribution u;
    return ThresholdLadder::geometric(1e-4 + 0.01 * u(engine), 1.05 + 2.95 * u(engine), n);
}

} // namespace

TEST_CASE("two-threshold matrix entries")
{
    const auto w = two_threshold_matrix(0.01, 0.02);
    CHECK(w(1, 3) == Approx(0.367879441171).epsilon(1e-11));
    CHECK(w(1, 0) == Approx(1.0 - std::exp(-1.0)));
    CHECK(w(2, 0) == Approx(std::exp(-1.0)));
    CHECK(w(2, 3) == Approx(1.0 - std::exp(-1.0)));
    CHECK(w(0, 1) == 1.0);
    CHECK(w(3, 2) == 1.0);
    CHECK(two_threshold_matrix(1.0, 1.0 + 1e-12)(1, 3) == Approx(1.0));
    CHECK_THROWS_AS(two_threshold_matrix(0.02, 0.01), invalid_input);
    CHECK(max_difference(w, analytic_matrix(ThresholdLadder({0.01, 0.02}))) < 1e-15);
}

TEST_CASE("closed-form entries of larger ladders")
{
    const auto w3 = analytic_matrix(ThresholdLadder({1.0, 2.0, 4.0}));
    const double e1 = std::exp(-1.0);
    const double expected = std::exp(-2.0) / (1.0 - (1.0 - e1) * e1);
    CHECK(w3(encode({1, 1, 0}), encode({1, 1, 1})) == Approx(expected).epsilon(1e-14));
    CHECK(expected == Approx(0.17634).margin(1e-5));

    Engine engine = make_engine(5);
    for (std::size_t n = 2; n <= 8; ++n)
    {
        const auto ladder = random_geometric(engine, n);
        const auto w = analytic_matrix(ladder);
        w.validate(1e-12);
        const double eq11 = std::exp(-(ladder[1] - ladder[0]) / ladder[0]);
        CHECK(w(1, 3) == Approx(eq11).epsilon(1e-13));
        for (StateCode s = 0; s < w.states(); ++s)
        {
            const auto& row = w.row(s);
            REQUIRE(row.count == successors(s, n).count);
            if (MarketState(s, n).is_blind_spot())
            {
                REQUIRE(row.entries[0].prob == 1.0);
            }
        }
    }
}

TEST_CASE("the matrix depends only on threshold ratios")
{
    Engine engine = make_engine(6);
    UniformDistribution u;
    for (std::size_t n = 2; n <= 8; ++n)
    {
        std::vector<double> deltas{0.001};
        for (std::size_t i = 1; i < n; ++i)
        {
            deltas.push_back(deltas.back() * (1.1 + 2.0 * u(engine)));
        }
        const ThresholdLadder ladder(deltas);
        for (double c : {0.37, 3.0, 1234.5})
        {
            CHECK(max_difference(analytic_matrix(ladder), analytic_matrix(ladder.scaled(c))) <= 1e-12);
        }
    }
}

TEST_CASE("contraction reproduces the smaller ladder")
{
    Engine engine = make_engine(7);
    for (std::size_t n = 2; n <= 8; ++n)
    {
        for (int trial = 0; trial < 10; ++trial)
        {
            const auto ladder = random_geometric(engine, n);
            CHECK(max_difference(contract(analytic_matrix(ladder)),
                                 analytic_matrix(ladder.without_smallest())) <= 1e-12);
        }
    }
    // non-geometric ladders too
    const ThresholdLadder uneven({0.001, 0.0013, 0.0031, 0.0035, 0.009});
    CHECK(max_difference(contract(analytic_matrix(uneven)), analytic_matrix(uneven.without_smallest())) <=
          1e-12);
}

TEST_CASE("iterated contraction ends at the alternator")
{
    auto w = analytic_matrix(ThresholdLadder::geometric(0.001, 2.0, 6));
    while (w.network_size() > 1)
    {
        w = contract(w);
        w.validate(1e-12);
    }
    CHECK(max_difference(w, alternator()) <= 1e-12);
    CHECK(max_difference(contract(two_threshold_matrix(1.0, 2.0)), alternator()) <= 1e-15);
    CHECK_THROWS_AS(contract(alternator()), invalid_input);
}

TEST_CASE("islands")
{
    CHECK(Island{1, 7}.members() == std::array<StateCode, 2>{14, 15});
    CHECK(Island{1, 0}.members() == std::array<StateCode, 2>{0, 1});
    CHECK(island_of(15).index == 7);
    CHECK(Island{1, 7}.entry() == 15);
    CHECK(Island{1, 6}.entry() == 12);
}

TEST_CASE("drifted escape probability")
{
    CHECK(drifted_escape_probability(1.0, 1.0, 0.0, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(drifted_escape_probability(1.0, 1.0, 1e-12, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(drifted_escape_probability(1.0, 1.0, -1e-12, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(drifted_escape_probability(1.0, 1.0, 200.0, 1.0) == Approx(1.0).margin(1e-12));
    CHECK(drifted_escape_probability(1.0, 1.0, -50.0, 1.0) < 1e-20);
    for (double mu : {-2.0, -0.5, -0.01, 0.3, 0.5, 3.0})
    {
        for (double delta : {0.5, 1.0, 2.0})
        {
            CHECK(drifted_escape_probability(1.3, delta, mu, 0.8) ==
                  Approx(oracle::escape_by_scale_function(1.3, delta, mu, 0.8)).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(drifted_escape_probability(0.0, 1.0, 0.0, 1.0), invalid_input);
    CHECK_THROWS_AS(drifted_escape_probability(1.0, 1.0, 0.0, -1.0), invalid_input);
}

TEST_CASE("matrix tables round-trip")
{
    const auto w = analytic_matrix(ThresholdLadder::geometric(0.001, 1.7, 5));
    std::ostringstream out;
    write_matrix(out, w);
    CHECK(parse_matrix(out.str()) == w);
    CHECK_THROWS_AS(parse_matrix("from,to,prob\n0,1,1\n1,0,0.5\n"), data_error);
    CHECK_THROWS_AS(parse_matrix("from,to,prob\n0,3,1\n"), data_error);
}
