#pragma once

#include "lwf/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace lwf {

struct Estimate {
    double mean = 0.0;
    double stderr = 0.0;
    std::int64_t n = 0;
    std::pair<double, double> ci95{0.0, 0.0};

    static Estimate from_moments(double mean, double sd, std::int64_t n)
    {
        Estimate e;
        e.mean = mean;
        e.n = n;
        e.stderr = n > 0 ? sd / std::sqrt(static_cast<double>(n)) : 0.0;
        e.ci95 = {mean - 1.96 * e.stderr, mean + 1.96 * e.stderr};
        return e;
    }

    static Estimate from_samples(const std::vector<double>& xs)
    {
        const auto n = static_cast<std::int64_t>(xs.size());
        if (n == 0)
            return {};
        CompensatedSum s;
        for (double v : xs)
            s += v;
        double mean = s.value() / static_cast<double>(n);
        CompensatedSum q;
        for (double v : xs)
            q += (v - mean) * (v - mean);
        double var = n > 1 ? q.value() / static_cast<double>(n - 1) : 0.0;
        return from_moments(mean, std::sqrt(var), n);
    }
};

/// Estimate of a probability from a count of successes.
inline Estimate proportion(std::int64_t hits, std::int64_t n)
{
    double p = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
    return Estimate::from_moments(p, std::sqrt(p * (1.0 - p) * (n > 1 ? double(n) / double(n - 1) : 1.0)), n);
}

inline double z_score(double formula, const Estimate& e)
{
    double diff = e.mean - formula;
    if (e.stderr == 0.0)
        return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    return diff / e.stderr;
}

inline unsigned default_workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = fn(i) for i < n, computed on `workers` threads; results are placed by index.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned workers, Fn&& fn)
{
    std::vector<T> out(n);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < n;)
                    out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = n;
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
    return out;
}

/// Kolmogorov distribution tail P(K > x).
inline double kolmogorov_tail(double x)
{
    if (x <= 0.0)
        return 1.0;
    if (x < 0.3)
        return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double t = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? 2.0 : -2.0) * t;
        if (t < 1e-18)
            break;
    }
    return std::clamp(s, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0; // sup |F_a - F_b|, or sup (F_a - F_b) for the one-sided test
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test. With one_sided, tests H1: a stochastically smaller than b
/// using D+ = sup (F_a - F_b).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, bool one_sided = false)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double v = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
        while (i < a.size() && a[i] <= v)
            ++i;
        while (j < b.size() && b[j] <= v)
            ++j;
        double diff = i / na - j / nb;
        d = std::max(d, one_sided ? diff : std::abs(diff));
    }
    double ne = na * nb / (na + nb);
    KsResult r;
    r.statistic = d;
    r.p_value = one_sided ? std::exp(-2.0 * ne * d * d) : kolmogorov_tail(std::sqrt(ne) * d);
    return r;
}

} // namespace lwf
