#pragma once

#include "lwf/lambda_measure.hpp"
#include "lwf/random.hpp"
#include "lwf/stats.hpp"

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace lwf {

/// Lineage counts per type 1..d, or the cemetery.
struct DualState {
    bool dead = false;
    std::vector<int> n;

    static DualState cemetery() { return {true, {}}; }
    static DualState counts(std::vector<int> n) { return {false, std::move(n)}; }

    int size() const
    {
        int s = 0;
        for (int v : n)
            s += v;
        return s;
    }
    bool operator==(const DualState&) const = default;
};

/// x^n; zero at the cemetery.
inline double duality_function(const SimplexPoint& x, const DualState& s)
{
    if (s.dead)
        return 0.0;
    double h = 1.0;
    for (std::size_t i = 0; i < s.n.size(); ++i)
        if (s.n[i] > 0)
            h *= std::pow(x.freq(static_cast<int>(i) + 1), s.n[i]);
    return h;
}

struct DualTransition {
    DualState target;
    double rate;
};

inline std::vector<DualTransition> dual_rates(const ModelParams& p, const DualState& s)
{
    std::vector<DualTransition> out;
    if (s.dead)
        return out;
    if (static_cast<int>(s.n.size()) != p.d)
        throw DomainError("dual state dimension differs from d");
    const double c = p.lambda.kingman_mass;
    const int total = s.size();
    const bool multi = p.lambda.positive_mass() > 0.0;

    for (int i = 0; i < p.d; ++i) {
        const int ni = s.n[i];
        for (int k = 2; k <= ni; ++k) {
            double r = multi ? binom(ni, k) * lambda_rate(p.lambda, total, k) : 0.0;
            if (k == 2)
                r += c * binom(ni, 2);
            if (r > 0.0) {
                auto t = s.n;
                t[i] -= k - 1;
                out.push_back({DualState::counts(std::move(t)), r});
            }
        }
    }

    CompensatedSum kill;
    for (int i = 0; i < p.d; ++i)
        for (int j = i + 1; j < p.d; ++j)
            kill += c * s.n[i] * s.n[j];
    if (multi) {
        for (int k = 2; k <= total; ++k) {
            double same = 0.0;
            for (int i = 0; i < p.d; ++i)
                same += binom(s.n[i], k);
            double cross = binom(total, k) - same;
            if (cross > 0.0)
                kill += cross * lambda_rate(p.lambda, total, k);
        }
    }

    if (p.theta > 0.0) {
        for (int i = 0; i < p.d; ++i) {
            if (s.n[i] == 0)
                continue;
            double nui = p.nu_of(i + 1);
            if (nui > 0.0) {
                auto t = s.n;
                t[i] -= 1;
                out.push_back({DualState::counts(std::move(t)), p.theta * s.n[i] * nui});
            }
            kill += p.theta * s.n[i] * (1.0 - nui);
        }
    }
    if (kill.value() > 0.0)
        out.push_back({DualState::cemetery(), kill.value()});
    return out;
}

inline DualState simulate_dual(const ModelParams& p, DualState s, double t, Rng& rng)
{
    double clock = 0.0;
    while (!s.dead) {
        auto moves = dual_rates(p, s);
        double total = 0.0;
        for (auto& m : moves)
            total += m.rate;
        if (!(total > 0.0))
            break;
        clock += exponential(rng, total);
        if (clock > t)
            break;
        double u = uniform01(rng) * total;
        std::size_t idx = 0;
        while (idx + 1 < moves.size() && u >= moves[idx].rate) {
            u -= moves[idx].rate;
            ++idx;
        }
        s = std::move(moves[idx].target);
    }
    return s;
}

inline DualState simulate_dual(const ModelParams& p, const DualState& n0, double t, std::uint64_t seed)
{
    Rng rng(seed);
    return simulate_dual(p, n0, t, rng);
}

/// Monte Carlo estimates of E[H(x, A_t)] for each x, all from the same dual paths.
inline std::vector<Estimate> dual_moments(const ModelParams& p, const std::vector<SimplexPoint>& xs,
                                          const DualState& n0, double t, std::int64_t replicates,
                                          std::uint64_t seed, unsigned workers = 1)
{
    p.validate();
    auto finals = parallel_map<DualState>(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        Rng rng(derive_seed(seed, "dual", r));
        return simulate_dual(p, n0, t, rng);
    });
    std::vector<Estimate> out;
    for (auto& x : xs) {
        std::vector<double> h(finals.size());
        for (std::size_t r = 0; r < finals.size(); ++r)
            h[r] = duality_function(x, finals[r]);
        out.push_back(Estimate::from_samples(h));
    }
    return out;
}

inline Estimate dual_moment(const ModelParams& p, const SimplexPoint& x, const DualState& n0, double t,
                            std::int64_t replicates, std::uint64_t seed, unsigned workers = 1)
{
    return dual_moments(p, {x}, n0, t, replicates, seed, workers).front();
}

} // namespace lwf
