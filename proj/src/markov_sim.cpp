#include "dwabm/markov_sim.hpp"

#include "dwabm/analytic.hpp"

#include <stdexcept>

namespace dwabm {

ChainState chain_start(double x, double y)
{
    if (!(x > 0 && x <= y)) throw std::invalid_argument("chain state needs 0 < x <= y");
    ChainState s{x, y, ChainStatus::running};
    if (y >= 1) s.status = ChainStatus::reached_S;
    return s;
}

ChainState step_chain(const ChainState& s, CounterRng& rng)
{
    if (s.status != ChainStatus::running) throw std::logic_error("step on a finished chain");
    const auto z = sample_next({s.x, s.y}, rng.uniform());
    if (!z) return {s.x, s.y, ChainStatus::absorbed_D};
    ChainState n{s.y, *z, ChainStatus::running};
    if (n.y >= 1) n.status = ChainStatus::reached_S;
    return n;
}

Estimate absorption_mc(double x, double y, std::size_t trials, std::uint64_t seed, int threads)
{
    if (!(x > 0 && x <= y && y < 1)) throw std::invalid_argument("absorption needs 0 < x <= y < 1");
    return run_trials(trials, seed, threads, [&](std::size_t i) {
        CounterRng rng(seed, i);
        ChainState s = chain_start(x, y);
        while (s.status == ChainStatus::running) s = step_chain(s, rng);
        return s.status == ChainStatus::absorbed_D ? Outcome::success : Outcome::failure;
    });
}

} // namespace dwabm
