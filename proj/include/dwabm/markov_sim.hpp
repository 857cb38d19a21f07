#pragma once

#include "dwabm/estimators.hpp"
#include "dwabm/rng.hpp"

namespace dwabm {

enum class ChainStatus { running, absorbed_D, reached_S };

// Theta_n = (H_{n-1}, H_n)
struct ChainState {
    double x = 0;
    double y = 0;
    ChainStatus status = ChainStatus::running;
};

ChainState chain_start(double x, double y);
ChainState step_chain(const ChainState& s, CounterRng& rng);

// Fraction of chains started at (x, y) that reach the diagonal before y >= 1.
Estimate absorption_mc(double x, double y, std::size_t trials, std::uint64_t seed,
                       int threads = 0);

} // namespace dwabm
