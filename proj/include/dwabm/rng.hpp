#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace dwabm {

// splitmix64 finalizer; the whole library derives randomness from keyed hashes
// so that values do not depend on evaluation order.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t golden64 = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t hash_key(std::uint64_t a, std::uint64_t b)
{
    return mix64(a + golden64 + mix64(b + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t hash_key(std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    return hash_key(hash_key(a, b), c);
}

// uniform on the open interval (0,1)
inline double to_unit(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// standard normal as a pure function of a key (Box-Muller)
inline double normal_from_key(std::uint64_t key)
{
    const double u1 = to_unit(mix64(key + golden64));
    const double u2 = to_unit(mix64(key + 2 * golden64));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Counter-based stream. Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(hash_key(seed, stream)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        state_ += golden64;
        return mix64(state_);
    }

    double uniform() { return to_unit((*this)()); }

    double normal()
    {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace dwabm
