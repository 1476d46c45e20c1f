#pragma once

#include "lwf/lambda_measure.hpp"
#include "lwf/random.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <vector>

namespace lwf {

inline constexpr std::int64_t infinite_level = std::numeric_limits<std::int64_t>::max() / 4;

struct FixationLineJump {
    double time;
    std::int64_t level;
    bool operator==(const FixationLineJump&) const = default;
};

struct FixationLinePath {
    std::int64_t start_level = 0;
    std::vector<FixationLineJump> jumps;
    std::int64_t truncation_level = 0;

    std::int64_t level_at(double t) const
    {
        std::int64_t lvl = start_level;
        for (auto& j : jumps) {
            if (j.time > t)
                break;
            lvl = j.level;
        }
        return lvl;
    }

    void write_csv(std::ostream& out) const
    {
        out << "time,level\n0," << start_level << "\n";
        for (auto& j : jumps)
            out << format_double(j.time) << "," << j.level << "\n";
    }
};

struct ExplosionSample {
    double elapsed = 0.0;
    double tail_bound = 0.0;
    bool exact = false;
};

/// First time the path reaches a level >= n.
inline double inverse_time(const FixationLinePath& path, std::int64_t n)
{
    if (n <= path.start_level)
        return 0.0;
    if (n > path.truncation_level)
        throw DomainError("inverse_time: level beyond truncation");
    for (auto& j : path.jumps)
        if (j.level >= n)
            return j.time;
    return std::numeric_limits<double>::infinity();
}

/// Sum over n >= k of independent Exp(c binom(n+1,2) + theta (n+1)) times.
class KingmanExplosionSampler {
public:
    KingmanExplosionSampler(double c, double theta, std::int64_t cutoff = 512) : c_(c), theta_(theta), cutoff_(cutoff)
    {
        if (!(c > 0.0))
            throw UnsupportedError("exact explosion sampling needs a Kingman component");
    }

    double rate(std::int64_t n) const
    {
        double nd = static_cast<double>(n);
        return 0.5 * c_ * nd * (nd + 1.0) + theta_ * (nd + 1.0);
    }

    double mean(std::int64_t k) const
    {
        CompensatedSum s;
        for (std::int64_t n = k; n < cutoff_; ++n)
            s += 1.0 / rate(n);
        s += k < cutoff_ ? tail().mean : tail_sum(k, 1);
        return s.value();
    }

    double sample(std::int64_t k, Rng& rng) const
    {
        if (rate(k) <= 0.0)
            throw UnsupportedError("level 0 is absorbing without mutation");
        double t = 0.0;
        for (std::int64_t n = k; n < cutoff_; ++n)
            t += exponential(rng, rate(n));
        double mu = k < cutoff_ ? tail().mean : tail_sum(k, 1);
        double var = k < cutoff_ ? tail().var : tail_sum(k, 2);
        std::gamma_distribution<double> g(mu * mu / var, var / mu);
        return t + g(rng);
    }

private:
    double c_, theta_;
    std::int64_t cutoff_;

    struct Tail {
        std::once_flag once;
        double mean = 0.0, var = 0.0;
    };
    std::shared_ptr<Tail> tail_ = std::make_shared<Tail>();

    const Tail& tail() const
    {
        std::call_once(tail_->once, [this] {
            tail_->mean = tail_sum(cutoff_, 1);
            tail_->var = tail_sum(cutoff_, 2);
        });
        return *tail_;
    }

    /// Sum over n >= from of rate(n)^(-power), power in {1,2}.
    double tail_sum(std::int64_t from, int power) const
    {
        const std::int64_t span = 100000;
        CompensatedSum s;
        for (std::int64_t n = from; n < from + span; ++n)
            s += std::pow(rate(n), -power);
        double N = static_cast<double>(from + span);
        double a = 2.0 * theta_ / c_;
        double f = std::pow(rate(from + span), -power);
        if (power == 1) {
            double z = (a - 1.0) / (N + 1.0);
            double integral = (2.0 / c_) / (N + 1.0) * (z == 0.0 ? 1.0 : std::log1p(z) / z);
            s += integral + 0.5 * f;
        } else {
            s += (4.0 / (c_ * c_)) / (3.0 * N * N * N) + 0.5 * f;
        }
        return s.value();
    }
};

/// CTMC sampler for the fixation line with per-level rate tables.
class FixationLineSampler {
public:
    explicit FixationLineSampler(ModelParams params, std::int64_t table_levels = 0) : p_(std::move(params))
    {
        p_.validate();
        ncomp_ = 2 + p_.lambda.atoms.size();
        if (table_levels > 0)
            build_table(table_levels);
        if (pure_kingman())
            kingman_.emplace(p_.lambda.kingman_mass, p_.theta);
    }

    const ModelParams& params() const { return p_; }

    bool pure_kingman() const
    {
        return p_.lambda.kingman_mass > 0.0 && !p_.lambda.beta && p_.lambda.atoms.empty();
    }

    /// Component rates at level n: [unit jumps, beta, atoms...]; returns the total.
    double component_rates(std::int64_t n, double* out) const
    {
        if (n < table_size_) {
            const double* row = &table_[static_cast<std::size_t>(n) * ncomp_];
            double t = 0.0;
            for (std::size_t i = 0; i < ncomp_; ++i)
                t += (out[i] = row[i]);
            return t;
        }
        return compute_rates(n, out);
    }

    /// Walks from level k until a level >= M; calls on_jump(time, level). Returns elapsed time,
    /// or infinity when the chain is stuck below M.
    template <class OnJump>
    double walk(std::int64_t k, std::int64_t M, Rng& rng, OnJump&& on_jump) const
    {
        std::vector<double> w(ncomp_);
        double t = 0.0;
        std::int64_t n = k;
        while (n < M) {
            double total = component_rates(n, w.data());
            if (!(total > 0.0))
                return std::numeric_limits<double>::infinity();
            t += exponential(rng, total);
            double u = uniform01(rng) * total;
            std::size_t c = 0;
            while (c + 1 < ncomp_ && u >= w[c]) {
                u -= w[c];
                ++c;
            }
            std::int64_t l = jump_size(c, n, rng);
            n = (l >= infinite_level - n) ? infinite_level : n + l;
            on_jump(t, n);
        }
        return t;
    }

    FixationLinePath simulate_path(std::int64_t k, std::int64_t M, Rng& rng) const
    {
        if (M <= k)
            throw DomainError("simulate_path requires M > k");
        FixationLinePath path{k, {}, M};
        walk(k, M, rng, [&](double t, std::int64_t lvl) { path.jumps.push_back({t, lvl}); });
        return path;
    }

    ExplosionSample sample_explosion(std::int64_t k, std::int64_t M, Rng& rng) const
    {
        if (!comes_down_from_infinity(p_.lambda))
            throw UnsupportedError("measure does not come down from infinity");
        if (k == 0 && p_.theta == 0.0)
            throw UnsupportedError("level 0 is absorbing without mutation");
        if (kingman_)
            return {kingman_->sample(k, rng), 0.0, true};
        if (M <= k)
            return {0.0, explosion_tail_bound(p_, k), false};
        double t = walk(k, M, rng, [](double, std::int64_t) {});
        return {t, explosion_tail_bound(p_, M), false};
    }

    std::set<std::int64_t> range(std::int64_t k, std::int64_t M, Rng& rng) const
    {
        std::set<std::int64_t> visited{k};
        walk(k, M, rng, [&](double, std::int64_t lvl) {
            if (lvl < M)
                visited.insert(lvl);
        });
        return visited;
    }

private:
    ModelParams p_;
    std::size_t ncomp_ = 2;
    std::int64_t table_size_ = 0;
    std::vector<double> table_;
    std::vector<double> beta_cdf_;
    std::optional<KingmanExplosionSampler> kingman_;

    double compute_rates(std::int64_t n, double* out) const
    {
        double nd = static_cast<double>(n);
        out[0] = p_.lambda.kingman_mass * 0.5 * nd * (nd + 1.0) + p_.theta * (nd + 1.0);
        out[1] = 0.0;
        if (p_.lambda.beta && n >= 1) {
            double a = p_.lambda.beta->alpha;
            out[1] = p_.lambda.beta->scale * std::exp(std::lgamma(nd + a) - std::lgamma(nd) - std::log(a) - std::lgamma(a));
        }
        double t = out[0] + out[1];
        for (std::size_t i = 0; i < p_.lambda.atoms.size(); ++i) {
            auto& at = p_.lambda.atoms[i];
            out[2 + i] = at.w * detail::atom_two_marks_over_r2(at.r, n + 1);
            t += out[2 + i];
        }
        return t;
    }

    void build_table(std::int64_t levels)
    {
        table_size_ = levels;
        table_.resize(static_cast<std::size_t>(levels) * ncomp_);
        for (std::int64_t n = 0; n < levels; ++n)
            compute_rates(n, &table_[static_cast<std::size_t>(n) * ncomp_]);
        if (p_.lambda.beta) {
            // jump law of the Beta part does not depend on the level
            double a = p_.lambda.beta->alpha;
            double c0 = std::log(a) - std::lgamma(2.0 - a);
            beta_cdf_.resize(static_cast<std::size_t>(levels));
            double acc = 0.0;
            for (std::int64_t l = 1; l <= levels; ++l) {
                double ld = static_cast<double>(l);
                acc += std::exp(c0 + std::lgamma(ld + 1.0 - a) - std::lgamma(ld + 2.0));
                beta_cdf_[static_cast<std::size_t>(l - 1)] = acc;
            }
        }
    }

    std::int64_t jump_size(std::size_t comp, std::int64_t n, Rng& rng) const
    {
        if (comp == 0)
            return 1;
        if (comp == 1) {
            double a = p_.lambda.beta->alpha;
            if (!beta_cdf_.empty()) {
                double u = uniform01(rng);
                if (u < beta_cdf_.back())
                    return static_cast<std::int64_t>(std::upper_bound(beta_cdf_.begin(), beta_cdf_.end(), u) -
                                                     beta_cdf_.begin()) + 1;
                // given l > L the mixing variable is Beta(2 - a + L, a) and the overshoot is geometric
                const auto cap = static_cast<std::int64_t>(beta_cdf_.size());
                double r = sample_beta(rng, 2.0 - a + static_cast<double>(cap), a);
                return cap + static_cast<std::int64_t>(geometric_trials(rng, 1.0 - r));
            }
            double r = sample_beta(rng, 2.0 - a, a);
            return static_cast<std::int64_t>(geometric_trials(rng, 1.0 - r));
        }
        auto& at = p_.lambda.atoms[comp - 2];
        if (at.r >= 1.0)
            return infinite_level;
        return negative_binomial_at_least_two(n, at.r, rng) - 1;
    }

    /// Failures before the n-th success (failure probability r), conditioned on >= 2.
    static std::int64_t negative_binomial_at_least_two(std::int64_t n, double r, Rng& rng)
    {
        double nd = static_cast<double>(n);
        double p_ge2 = r * r * detail::atom_two_marks_over_r2(r, n + 1);
        if (p_ge2 > 0.25) {
            std::negative_binomial_distribution<std::int64_t> nb(n, 1.0 - r);
            while (true) {
                auto m = nb(rng);
                if (m >= 2)
                    return m;
            }
        }
        double target = uniform01(rng) * p_ge2;
        double pmf = std::exp(log_binom(nd + 1.0, 2.0) + 2.0 * std::log(r) + nd * std::log1p(-r));
        std::int64_t m = 2;
        while (target >= pmf && pmf > 0.0) {
            target -= pmf;
            pmf *= r * (nd + static_cast<double>(m)) / static_cast<double>(m + 1);
            ++m;
        }
        return m;
    }
};

inline FixationLinePath simulate_path(const ModelParams& p, std::int64_t k, std::int64_t M, std::uint64_t seed)
{
    Rng rng(seed);
    return FixationLineSampler(p).simulate_path(k, M, rng);
}

inline ExplosionSample sample_explosion(const ModelParams& p, std::int64_t k, std::int64_t M, std::uint64_t seed)
{
    Rng rng(seed);
    return FixationLineSampler(p).sample_explosion(k, M, rng);
}

inline std::set<std::int64_t> range_indicator(const ModelParams& p, std::int64_t k, std::int64_t M, std::uint64_t seed)
{
    Rng rng(seed);
    return FixationLineSampler(p).range(k, M, rng);
}

/// Smallest power-of-two multiple of 1000 whose tail bound is below rel * reference.
inline std::int64_t default_truncation(const ModelParams& p, double reference, double rel = 1e-3,
                                       std::int64_t cap = 1 << 24)
{
    std::int64_t M = 1000;
    while (M < cap && explosion_tail_bound(p, M) >= rel * reference)
        M *= 2;
    return M;
}

} // namespace lwf
