#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace lwf {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

inline constexpr double euler_gamma = 0.57721566490153286060651209;

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double v)
    {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
        abs_ += std::abs(v);
    }
    CompensatedSum& operator+=(double v)
    {
        add(v);
        return *this;
    }
    double value() const { return sum_ + comp_; }
    /// Sum of |terms|; ratio to |value()| is the cancellation condition number.
    double magnitude() const { return abs_; }

private:
    double sum_ = 0.0, comp_ = 0.0, abs_ = 0.0;
};

inline double log_binom(double n, double k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Binomial coefficient for integer arguments; zero outside 0 <= k <= n.
inline double binom(std::int64_t n, std::int64_t k)
{
    if (k < 0 || n < 0 || k > n)
        return 0.0;
    if (k > n - k)
        k = n - k;
    if (n < 60) {
        double r = 1.0;
        for (std::int64_t i = 1; i <= k; ++i)
            r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
        return std::round(r);
    }
    return std::exp(log_binom(static_cast<double>(n), static_cast<double>(k)));
}

inline double log_beta(double a, double b)
{
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

struct KronrodRule {
    static constexpr std::array<double, 8> xk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b)
{
    using R = KronrodRule;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double resk = fc * R::wk[7];
    double resg = fc * R::wg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * R::xk[j];
        double s = f(c - dx) + f(c + dx);
        resk += R::wk[j] * s;
        if (j % 2 == 1)
            resg += R::wg[j / 2] * s;
    }
    return {a, b, resk * h, std::abs((resk - resg) * h)};
}

} // namespace detail

/// Adaptive Gauss-Kronrod (7/15) on [a,b]; endpoints are never evaluated.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {})
{
    if (!(b > a))
        return {};
    std::priority_queue<detail::Panel> heap;
    const int initial = 8;
    double value = 0.0, error = 0.0;
    for (int i = 0; i < initial; ++i) {
        double lo = a + (b - a) * i / initial;
        double hi = (i + 1 == initial) ? b : a + (b - a) * (i + 1) / initial;
        auto p = detail::gauss_kronrod_15(f, lo, hi);
        value += p.value;
        error += p.error;
        heap.push(p);
    }
    int n = initial;
    while (error > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value))) {
        if (n >= cfg.max_subdivisions)
            throw NumericError("quadrature did not converge: estimate " + std::to_string(value) +
                               ", error " + std::to_string(error));
        auto p = heap.top();
        heap.pop();
        double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            heap.push(p);
            break;
        }
        auto l = detail::gauss_kronrod_15(f, p.a, mid);
        auto r = detail::gauss_kronrod_15(f, mid, p.b);
        value += l.value + r.value - p.value;
        error += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
        ++n;
    }
    if (!std::isfinite(value))
        throw NumericError("quadrature produced a non-finite value");
    // recompute from panels to shed accumulated rounding
    CompensatedSum v, e;
    while (!heap.empty()) {
        v += heap.top().value;
        e += heap.top().error;
        heap.pop();
    }
    return {v.value(), e.value(), n};
}

/// Enumerates all size-m subsets of {0..n-1} as index vectors.
template <class F>
void for_each_subset(int n, int m, F&& f)
{
    if (m < 0 || m > n)
        return;
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i)
        idx[i] = i;
    while (true) {
        f(static_cast<const std::vector<int>&>(idx));
        int i = m - 1;
        while (i >= 0 && idx[i] == n - m + i)
            --i;
        if (i < 0)
            return;
        ++idx[i];
        for (int j = i + 1; j < m; ++j)
            idx[j] = idx[j - 1] + 1;
    }
}

} // namespace lwf
