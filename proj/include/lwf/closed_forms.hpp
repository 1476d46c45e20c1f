#pragma once

#include "lwf/lambda_measure.hpp"
#include "lwf/numerics.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

namespace lwf {

struct SeriesConfig {
    double tail_tol = 1e-10;
    std::int64_t max_terms = 10'000'000;
};

inline constexpr int max_subset_types = 26;

namespace detail {

/// Sum over l = 1..k of (-1)^(k-l) binom(d-l, k-l) times the sum over size-l subsets I of [d+1]
/// of g(S_I, 1 - S_I), with 1 - S_I computed from the complement.
template <class G>
CompensatedSum inclusion_exclusion(const SimplexPoint& x, int k, G&& g)
{
    const int d = x.d();
    if (d + 1 > max_subset_types)
        throw DomainError("subset enumeration is limited to d <= 25");
    auto f = x.all();
    CompensatedSum total;
    std::vector<char> in(d + 1);
    for (int l = 1; l <= k; ++l) {
        double coef = binom(d - l, k - l);
        if (coef == 0.0)
            continue;
        if ((k - l) % 2)
            coef = -coef;
        for_each_subset(d + 1, l, [&](const std::vector<int>& idx) {
            std::fill(in.begin(), in.end(), 0);
            CompensatedSum s, rest;
            for (int i : idx) {
                in[i] = 1;
                s += f[i];
            }
            for (int i = 0; i <= d; ++i)
                if (!in[i])
                    rest += f[i];
            total += coef * g(s.value(), rest.value());
        });
    }
    return total;
}

inline double guard_probability(const CompensatedSum& s, const char* what)
{
    double v = s.value();
    if (v < -1e-9 || v > 1.0 + 1e-9)
        throw NumericError(std::string(what) + ": cancellation produced " + std::to_string(v) + " (term magnitude " +
                           std::to_string(s.magnitude()) + ")");
    return std::clamp(v, 0.0, 1.0);
}

inline void check_k(const SimplexPoint& x, int k)
{
    if (k < 1 || k > x.d() + 1)
        throw DomainError("k must lie in 1..d+1");
}

inline void check_alpha(double alpha)
{
    if (!(alpha > 1.0 && alpha < 2.0))
        throw DomainError("alpha must lie in (1,2)");
}

/// 1 - (1-u)^... helper: y(u) = 1 - u^beta.
inline double one_minus_pow(double u, double beta)
{
    return -std::expm1(beta * std::log(u));
}

} // namespace detail

/// P(V_k = p): the (k+1)-th distinct type first appears at level p.
inline double coupon_pmf(const SimplexPoint& x, int k, std::int64_t p)
{
    detail::check_k(x, k);
    if (p < 2)
        throw DomainError("coupon_pmf needs p >= 2");
    if (k == x.d() + 1)
        return 0.0;
    auto s = detail::inclusion_exclusion(x, k, [&](double S, double rest) {
        if (S == 0.0)
            return 0.0;
        return std::pow(S, static_cast<double>(p - 1)) * rest;
    });
    return detail::guard_probability(s, "coupon_pmf");
}

/// P(V_k < infinity).
inline double coupon_mass(const SimplexPoint& x, int k)
{
    detail::check_k(x, k);
    if (k == x.d() + 1)
        return 0.0;
    auto s = detail::inclusion_exclusion(x, k, [](double S, double rest) { return rest > 0.0 ? S : 0.0; });
    return detail::guard_probability(s, "coupon_mass");
}

/// Probability that types are lost in the order i_{d+1} first, ..., i_1 last; order = (i_1, ..., i_{d+1}).
inline double disappearance_order_prob(const SimplexPoint& x, const std::vector<int>& order)
{
    const int n = x.d() + 1;
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> iota(n);
    std::iota(iota.begin(), iota.end(), 1);
    if (sorted != iota)
        throw DomainError("order must be a permutation of 1..d+1");
    double prob = 1.0;
    for (int k = 0; k < n; ++k) {
        CompensatedSum denom;
        for (int l = k; l < n; ++l)
            denom += x.freq(order[l]);
        if (denom.value() <= 0.0)
            return 0.0;
        prob *= x.freq(order[k]) / denom.value();
    }
    return prob;
}

/// Probability that type eta is the first to disappear.
inline double first_to_disappear_prob(const SimplexPoint& x, int eta)
{
    const int n = x.d() + 1;
    if (eta < 1 || eta > n)
        throw DomainError("type out of range");
    std::vector<int> rest;
    for (int i = 1; i <= n; ++i)
        if (i != eta)
            rest.push_back(i);
    CompensatedSum s;
    do {
        auto order = rest;
        order.push_back(eta);
        s += disappearance_order_prob(x, order);
    } while (std::next_permutation(rest.begin(), rest.end()));
    return s.value();
}

inline double mean_explosion_kingman(std::int64_t p, double c)
{
    if (p < 1 || !(c > 0.0))
        throw DomainError("mean_explosion_kingman needs p >= 1 and c > 0");
    return 2.0 / (c * static_cast<double>(p));
}

/// Mean time until only k types remain, pure Kingman part with mass c.
inline double mean_fixation_kingman(const SimplexPoint& x, int k, double c = 1.0)
{
    detail::check_k(x, k);
    if (!(c > 0.0))
        throw DomainError("kingman mass must be positive");
    if (k == x.d() + 1)
        return 0.0;
    auto s = detail::inclusion_exclusion(x, k, [](double, double rest) {
        return rest > 0.0 ? rest * std::log(rest) : 0.0;
    });
    double v = -2.0 / c * s.value();
    if (v < -1e-9)
        throw NumericError("mean_fixation_kingman: cancellation produced a negative mean");
    return std::max(v, 0.0);
}

/// E[I^k(infinity)] for the Beta(2-alpha, alpha) measure times scale.
inline double mean_explosion_beta(std::int64_t k, double alpha, double scale = 1.0, const QuadratureConfig& cfg = {})
{
    detail::check_alpha(alpha);
    if (k < 1)
        throw DomainError("mean_explosion_beta needs k >= 1");
    const double beta = 1.0 / (alpha - 1.0);
    const double kd = static_cast<double>(k);
    auto r = integrate(
        [&](double u) {
            double y = detail::one_minus_pow(u, beta);
            return std::exp(kd * std::log(y)) / (1.0 - u);
        },
        0.0, 1.0, cfg);
    return alpha * r.value / scale;
}

/// Mean fixation time for the Beta measure via the displayed closed form.
inline double mean_fixation_beta(const SimplexPoint& x, int k, double alpha, double scale = 1.0,
                                 const QuadratureConfig& cfg = {})
{
    detail::check_alpha(alpha);
    detail::check_k(x, k);
    if (k == x.d() + 1)
        return 0.0;
    const double beta = 1.0 / (alpha - 1.0);
    auto s = detail::inclusion_exclusion(x, k, [&](double S, double rest) {
        if (S <= 0.0 || rest <= 0.0)
            return 0.0;
        auto r = integrate(
            [&](double u) {
                double ub = std::exp(beta * std::log(u));
                double y = detail::one_minus_pow(u, beta);
                return y / ((rest + S * ub) * (1.0 - u));
            },
            0.0, 1.0, cfg);
        return rest * S * r.value;
    });
    double v = alpha * s.value() / scale;
    if (v < -1e-9)
        throw NumericError("mean_fixation_beta: cancellation produced a negative mean");
    return std::max(v, 0.0);
}

/// Mean fixation time as the mixture of explosion means over the law of V_k.
inline double mean_fixation_beta_mixture(const SimplexPoint& x, int k, double alpha, double scale = 1.0,
                                         const QuadratureConfig& cfg = {}, double tol = 1e-13)
{
    detail::check_alpha(alpha);
    detail::check_k(x, k);
    if (k == x.d() + 1)
        return 0.0;
    auto f = x.all();
    double head = mean_explosion_beta(1, alpha, scale, cfg);
    CompensatedSum total;
    for (std::int64_t p = 2;; ++p) {
        total += mean_explosion_beta(p - 1, alpha, scale, cfg) * coupon_pmf(x, k, p);
        double bound = 0.0;
        for_each_subset(static_cast<int>(f.size()), k, [&](const std::vector<int>& idx) {
            double S = 0.0;
            for (int i : idx)
                S += f[i];
            bound += std::pow(std::min(S, 1.0), static_cast<double>(p));
        });
        if (head * bound < tol * std::max(total.value(), 1e-300) || bound == 0.0)
            break;
        if (p > 1'000'000)
            throw NumericError("mean_fixation_beta_mixture: series did not converge");
    }
    return total.value();
}

/// Generating function of the range of the Beta fixation line (j = 0) and its weighted versions.
inline double phi_generating(int j, double s, double alpha, const QuadratureConfig& cfg = {})
{
    detail::check_alpha(alpha);
    if (j < 0 || !(s > 0.0 && s <= 1.0))
        throw DomainError("phi_generating needs j >= 0 and s in (0,1]");
    auto phi0_c = [alpha](double z, double one_minus_z) {
        if (z < 1e-8)
            return 1.0 + 0.5 * alpha * z;
        return (alpha - 1.0) * z / (one_minus_z * -std::expm1((alpha - 1.0) * std::log(one_minus_z)));
    };
    if (j == 0) {
        if (s >= 1.0)
            return std::numeric_limits<double>::infinity();
        return phi0_c(s, 1.0 - s);
    }
    if (j == 1)
        return std::numeric_limits<double>::infinity();
    const double beta = 1.0 / (alpha - 1.0);
    auto r = integrate(
        [&](double u) {
            double ub = std::exp(beta * std::log(u));
            double y = detail::one_minus_pow(u, beta);
            double one_minus_z = (1.0 - s) + s * ub;
            double z = y * s;
            double phi_times_ub;
            if (z < 1e-8)
                phi_times_ub = ub * (1.0 + 0.5 * alpha * z);
            else
                phi_times_ub = (alpha - 1.0) * z * (ub / one_minus_z) /
                               -std::expm1((alpha - 1.0) * std::log(one_minus_z));
            return std::pow(y, j - 2) * beta * phi_times_ub;
        },
        0.0, 1.0, cfg);
    return std::pow(s, j) * alpha * r.value;
}

/// E[exp(i t T)] for the time until k types remain, Kingman mass c.
inline std::complex<double> fixation_charfunc_kingman(const SimplexPoint& x, int k, double t, double c = 1.0)
{
    detail::check_k(x, k);
    if (!(c > 0.0))
        throw DomainError("kingman mass must be positive");
    if (k == x.d() + 1 || t == 0.0)
        return {1.0, 0.0};
    using cd = std::complex<double>;
    auto f = x.all();
    double smax = 0.0;
    for_each_subset(static_cast<int>(f.size()), k, [&](const std::vector<int>& idx) {
        double S = 0.0;
        for (int i : idx)
            S += f[i];
        if (S < 1.0 - 1e-15)
            smax = std::max(smax, S);
    });
    std::int64_t P = 2;
    if (smax > 0.0)
        P = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::log(1e-17) / std::log(smax)) + 2, 2, 5'000'000);
    const std::int64_t R = std::max<std::int64_t>(P + 1, 2000);
    auto z = [&](std::int64_t r) { return 2.0 * t / (c * static_cast<double>(r) * static_cast<double>(r + 1)); };
    // G[p] = sum over r >= p of log(1 - i z_r)
    std::vector<cd> G(static_cast<std::size_t>(P) + 1);
    double Rd = static_cast<double>(R);
    double zsum = 2.0 * t / (c * Rd);
    double z2sum = 4.0 * t * t / (c * c) / (3.0 * Rd * Rd * Rd);
    cd acc(0.5 * z2sum, -zsum);
    for (std::int64_t r = R - 1; r >= 1; --r) {
        acc += std::log(cd(1.0, -z(r)));
        if (r <= P)
            G[static_cast<std::size_t>(r)] = acc;
    }
    cd total(0.0, 0.0);
    double mass = 0.0;
    for (int l = 1; l <= k; ++l) {
        double coef = binom(x.d() - l, k - l);
        if (coef == 0.0)
            continue;
        if ((k - l) % 2)
            coef = -coef;
        for_each_subset(static_cast<int>(f.size()), l, [&](const std::vector<int>& idx) {
            double S = 0.0, rest = 0.0;
            std::vector<char> in(f.size(), 0);
            for (int i : idx) {
                S += f[i];
                in[i] = 1;
            }
            for (std::size_t i = 0; i < f.size(); ++i)
                if (!in[i])
                    rest += f[i];
            if (S <= 0.0 || rest <= 0.0)
                return;
            cd series(0.0, 0.0);
            double sp = 1.0;
            for (std::int64_t p = 1; p <= P; ++p) {
                sp *= S;
                if (sp < 1e-300)
                    break;
                series += sp * std::exp(-G[static_cast<std::size_t>(p)]);
            }
            total += coef * rest * series;
            mass += coef * S;
        });
    }
    return total + cd(1.0 - mass, 0.0);
}

/// Mean strong stationary time, series form.
inline double stationary_time_mean(double c, double theta)
{
    if (!(c > 0.0))
        throw DomainError("stationary_time_mean needs c > 0");
    if (!(theta > 0.0))
        throw DomainError("stationary_time_mean needs theta > 0");
    const double a = 2.0 * theta / c;
    const int J = 2000;
    CompensatedSum s;
    for (int j = 0; j < J; ++j)
        s += 1.0 / ((j + 1.0) * (j + a));
    const double x = J;
    const double z = (a - 1.0) / (x + 1.0);
    const double integral = (z == 0.0 ? 1.0 : std::log1p(z) / z) / (x + 1.0);
    const double f = 1.0 / ((x + 1.0) * (x + a));
    const double fp = -((x + a) + (x + 1.0)) * f * f;
    s += integral + 0.5 * f - fp / 12.0;
    return 2.0 / c * s.value();
}

/// Mean strong stationary time, digamma form; undefined at theta = c/2.
inline double stationary_time_mean_digamma(double c, double theta)
{
    if (!(c > 0.0) || !(theta > 0.0))
        throw DomainError("stationary_time_mean_digamma needs c > 0 and theta > 0");
    if (theta == 0.5 * c)
        throw DomainError("digamma form is 0/0 at theta = c/2");
    return (boost::math::digamma(2.0 * theta / c) + euler_gamma) / (theta - 0.5 * c);
}

} // namespace lwf
