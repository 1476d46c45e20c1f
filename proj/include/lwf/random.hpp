#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lwf {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t default_seed = 20240917ULL;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_name(std::string_view s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Stream seed for one replicate of one experiment.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view experiment, std::uint64_t replicate)
{
    return splitmix64(splitmix64(master ^ hash_name(experiment)) + splitmix64(replicate + 0x632BE59BD9B4E019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b)
{
    return splitmix64(splitmix64(master + 0x1F123BB5ULL * a) ^ splitmix64(b + 0x5851F42DULL));
}

/// Maps 64 random bits to a double in [0,1).
inline double to_unit(std::uint64_t bits)
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform01(Rng& rng)
{
    return to_unit(rng());
}

/// Counter-based level variables U(1), U(2), ...; U(j) is random access.
/// Levels above `split` may be drawn from a second seed.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed) : seed_(seed), tail_seed_(seed) {}
    UniformStream(std::uint64_t seed, std::size_t split, std::uint64_t tail_seed)
        : seed_(seed), tail_seed_(tail_seed), split_(split)
    {
    }

    double operator()(std::size_t level) const
    {
        std::uint64_t s = level > split_ ? tail_seed_ : seed_;
        return to_unit(splitmix64(splitmix64(s) ^ (0xD1B54A32D192ED03ULL * level)));
    }

    UniformStream with_resampled_tail(std::size_t keep, std::uint64_t tail_seed) const
    {
        return UniformStream(seed_, keep, tail_seed);
    }

private:
    std::uint64_t seed_;
    std::uint64_t tail_seed_;
    std::size_t split_ = static_cast<std::size_t>(-1);
};

inline double exponential(Rng& rng, double rate)
{
    return -std::log1p(-uniform01(rng)) / rate;
}

inline double sample_beta(Rng& rng, double a, double b)
{
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    double x = ga(rng), y = gb(rng);
    return x / (x + y);
}

/// Number of trials up to and including the first success, success probability q.
inline std::uint64_t geometric_trials(Rng& rng, double q)
{
    if (q >= 1.0)
        return 1;
    double u = 1.0 - uniform01(rng);
    double g = std::floor(std::log(u) / std::log1p(-q));
    if (!(g < 4.0e18))
        return static_cast<std::uint64_t>(4.0e18);
    return 1 + static_cast<std::uint64_t>(g);
}

/// Draws `m` distinct values from {0..n-1}, returned sorted.
inline std::vector<std::size_t> sample_distinct(Rng& rng, std::size_t n, std::size_t m, std::vector<std::size_t> out = {})
{
    out.clear();
    if (m * 3 >= n) {
        for (std::size_t i = 0; i < n && out.size() < m; ++i) {
            std::uniform_int_distribution<std::size_t> u(0, n - i - 1);
            if (u(rng) < m - out.size())
                out.push_back(i);
        }
        return out;
    }
    for (std::size_t j = n - m; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> u(0, j);
        std::size_t t = u(rng);
        if (std::find(out.begin(), out.end(), t) == out.end())
            out.push_back(t);
        else
            out.push_back(j);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace lwf
