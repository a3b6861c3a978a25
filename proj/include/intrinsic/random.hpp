#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace intrinsic {

/// Mersenne Twister seeded from (seed, stream). Distinct streams give
/// independent, reproducible sequences, so batches can run in any order.
using Engine = std::mt19937_64;

[[nodiscard]] inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    return Engine(seq);
}

using NormalDistribution = boost::random::normal_distribution<double>;
using UniformDistribution = boost::random::uniform_01<double>;

/// Uniform on (0, 1], safe to take the logarithm of.
[[nodiscard]] inline double open_uniform(Engine& engine)
{
    UniformDistribution u;
    return 1.0 - u(engine);
}

} // namespace intrinsic
