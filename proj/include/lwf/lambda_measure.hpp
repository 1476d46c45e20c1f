#pragma once

#include "lwf/kv.hpp"
#include "lwf/numerics.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace lwf {

/// Beta(2-alpha, alpha) probability density times `scale`.
struct BetaComponent {
    double alpha = 1.5;
    double scale = 1.0;
    bool operator==(const BetaComponent&) const = default;
};

struct Atom {
    double r = 1.0;
    double w = 1.0;
    bool operator==(const Atom&) const = default;
};

/// Finite measure on [0,1]: an atom at 0, an optional Beta part and finitely many atoms in (0,1].
struct LambdaSpec {
    double kingman_mass = 0.0;
    std::optional<BetaComponent> beta;
    std::vector<Atom> atoms;

    bool operator==(const LambdaSpec&) const = default;

    static LambdaSpec kingman(double c)
    {
        LambdaSpec s;
        s.kingman_mass = c;
        return s;
    }
    static LambdaSpec beta_measure(double alpha, double scale = 1.0)
    {
        LambdaSpec s;
        s.beta = BetaComponent{alpha, scale};
        return s;
    }

    void validate() const
    {
        if (!(kingman_mass >= 0.0) || !std::isfinite(kingman_mass))
            throw DomainError("kingman mass must be finite and nonnegative");
        if (beta) {
            if (!(beta->alpha > 1.0 && beta->alpha < 2.0))
                throw DomainError("beta alpha must lie in (1,2)");
            if (!(beta->scale > 0.0) || !std::isfinite(beta->scale))
                throw DomainError("beta scale must be positive");
        }
        for (auto& a : atoms) {
            if (!(a.r > 0.0 && a.r <= 1.0))
                throw DomainError("atom location must lie in (0,1]");
            if (!(a.w > 0.0) || !std::isfinite(a.w))
                throw DomainError("atom weight must be positive");
        }
    }

    /// Mass on (0,1].
    double positive_mass() const
    {
        CompensatedSum s;
        if (beta)
            s += beta->scale;
        for (auto& a : atoms)
            s += a.w;
        return s.value();
    }

    double total_mass() const { return kingman_mass + positive_mass(); }
};

/// Point of the simplex; holds d coordinates, the (d+1)-th is implied.
class SimplexPoint {
public:
    SimplexPoint() = default;
    explicit SimplexPoint(std::vector<double> x) : x_(std::move(x))
    {
        if (x_.empty())
            throw DomainError("simplex point needs d >= 1 coordinates");
        CompensatedSum s;
        for (double v : x_) {
            if (!(v >= 0.0 && v <= 1.0))
                throw DomainError("simplex coordinates must lie in [0,1]");
            s += v;
        }
        if (s.value() > 1.0 + 1e-12)
            throw DomainError("simplex coordinates sum above 1");
        rest_ = std::max(0.0, 1.0 - s.value());
    }

    int d() const { return static_cast<int>(x_.size()); }
    /// Frequency of type i in 1..d+1.
    double freq(int i) const { return i == d() + 1 ? rest_ : x_.at(i - 1); }
    const std::vector<double>& coords() const { return x_; }
    std::vector<double> all() const
    {
        auto v = x_;
        v.push_back(rest_);
        return v;
    }
    bool operator==(const SimplexPoint& o) const { return x_ == o.x_; }

private:
    std::vector<double> x_;
    double rest_ = 1.0;
};

struct ModelParams {
    int d = 1;
    LambdaSpec lambda;
    double theta = 0.0;
    std::vector<double> nu;
    bool allow_boundary_nu = false;

    bool operator==(const ModelParams&) const = default;

    void validate() const
    {
        if (d < 1)
            throw DomainError("d must be positive");
        lambda.validate();
        if (!(theta >= 0.0) || !std::isfinite(theta))
            throw DomainError("theta must be finite and nonnegative");
        if (theta > 0.0) {
            if (static_cast<int>(nu.size()) != d)
                throw DomainError("nu must have d entries");
            CompensatedSum s;
            for (double v : nu) {
                if (v < 0.0 || (!allow_boundary_nu && v <= 0.0))
                    throw DomainError("nu entries must be positive");
                s += v;
            }
            if (s.value() > 1.0 + 1e-12 || (!allow_boundary_nu && s.value() >= 1.0))
                throw DomainError("nu must lie in the interior of the simplex");
        }
    }

    double nu_of(int type) const
    {
        if (nu.empty())
            return type == d + 1 ? 1.0 : 0.0;
        if (type == d + 1) {
            double s = 0.0;
            for (double v : nu)
                s += v;
            return std::max(0.0, 1.0 - s);
        }
        return nu.at(type - 1);
    }
};

namespace detail {

inline double beta_norm_log(double alpha)
{
    return log_beta(2.0 - alpha, alpha);
}

/// P(Bin(n,r) >= 2) / r^2.
inline double atom_two_marks_over_r2(double r, std::int64_t n)
{
    if (n < 2)
        return 0.0;
    if (r >= 1.0)
        return 1.0;
    double nd = static_cast<double>(n);
    if (nd * r < 0.2) {
        CompensatedSum s;
        double lr = std::log(r), l1 = std::log1p(-r);
        for (std::int64_t k = 2; k <= n; ++k) {
            double t = std::exp(log_binom(nd, static_cast<double>(k)) + (k - 2) * lr + (nd - k) * l1);
            s += t;
            if (t < 1e-18 * s.value())
                break;
        }
        return s.value();
    }
    double l1 = std::log1p(-r);
    double p0 = std::exp(nd * l1);
    double p1 = nd * r * std::exp((nd - 1.0) * l1);
    return (1.0 - p0 - p1) / (r * r);
}

} // namespace detail

/// lambda_{n,k}: integral of r^(k-2) (1-r)^(n-k) over (0,1]; the atom at 0 does not contribute.
inline double lambda_rate(const LambdaSpec& spec, std::int64_t n, std::int64_t k)
{
    if (k < 2 || k > n)
        throw DomainError("lambda_rate requires 2 <= k <= n");
    CompensatedSum s;
    if (spec.beta) {
        double a = spec.beta->alpha;
        s += spec.beta->scale *
             std::exp(log_beta(k - a, static_cast<double>(n - k) + a) - detail::beta_norm_log(a));
    }
    for (auto& at : spec.atoms) {
        if (at.r >= 1.0)
            s += k == n ? at.w : 0.0;
        else
            s += at.w * std::exp((k - 2) * std::log(at.r) + (n - k) * std::log1p(-at.r));
    }
    return s.value();
}

/// binom(n,k) * lambda_{n,k}: rate of a multiple merger of exactly k out of n lineages.
inline double merger_rate(const LambdaSpec& spec, std::int64_t n, std::int64_t k)
{
    if (k < 2 || k > n)
        return 0.0;
    double nd = static_cast<double>(n), kd = static_cast<double>(k);
    CompensatedSum s;
    if (spec.beta) {
        double a = spec.beta->alpha;
        s += spec.beta->scale *
             std::exp(log_binom(nd, kd) + log_beta(kd - a, nd - kd + a) - detail::beta_norm_log(a));
    }
    for (auto& at : spec.atoms) {
        if (at.r >= 1.0)
            s += k == n ? at.w : 0.0;
        else
            s += at.w * std::exp(log_binom(nd, kd) + (kd - 2) * std::log(at.r) + (nd - kd) * std::log1p(-at.r));
    }
    return s.value();
}

/// Total rate of events marking at least two of n levels (Kingman part excluded).
inline double multi_merger_total(const LambdaSpec& spec, std::int64_t n)
{
    if (n < 2)
        return 0.0;
    CompensatedSum s;
    if (spec.beta) {
        double a = spec.beta->alpha;
        double m = static_cast<double>(n - 1);
        s += spec.beta->scale * std::exp(std::lgamma(m + a) - std::lgamma(m) - std::log(a) - std::lgamma(a));
    }
    for (auto& at : spec.atoms)
        s += at.w * detail::atom_two_marks_over_r2(at.r, n);
    return s.value();
}

/// Rate at which the fixation line jumps from n to n + l.
inline double fixation_jump_rate(const ModelParams& p, std::int64_t n, std::int64_t l)
{
    if (n < 0 || l < 1)
        throw DomainError("fixation_jump_rate requires n >= 0, l >= 1");
    CompensatedSum s;
    double nd = static_cast<double>(n), ld = static_cast<double>(l);
    if (l == 1)
        s += p.lambda.kingman_mass * binom(n + 1, 2) + p.theta * (nd + 1.0);
    if (n == 0)
        return s.value();
    const auto& spec = p.lambda;
    if (spec.beta) {
        double a = spec.beta->alpha;
        s += spec.beta->scale * std::exp(std::lgamma(ld + 1.0 - a) + std::lgamma(nd + a) - std::lgamma(ld + 2.0) -
                                         std::lgamma(nd) - detail::beta_norm_log(a));
    }
    for (auto& at : spec.atoms) {
        if (at.r >= 1.0)
            continue;
        s += at.w * std::exp(log_binom(nd + ld, ld + 1.0) + (ld - 1.0) * std::log(at.r) + nd * std::log1p(-at.r));
    }
    return s.value();
}

/// Sum over l of fixation_jump_rate(n, l).
inline double total_up_rate(const ModelParams& p, std::int64_t n)
{
    if (n < 0)
        throw DomainError("total_up_rate requires n >= 0");
    double nd = static_cast<double>(n);
    return p.lambda.kingman_mass * binom(n + 1, 2) + p.theta * (nd + 1.0) + multi_merger_total(p.lambda, n + 1);
}

/// True iff the measure has a Kingman part or a Beta part; finitely many atoms alone never come down.
inline bool comes_down_from_infinity(const LambdaSpec& spec)
{
    return spec.kingman_mass > 0.0 || spec.beta.has_value();
}

/// Upper bound on the sum over n >= M of 1 / total_up_rate(n).
inline double explosion_tail_bound(const ModelParams& p, std::int64_t M)
{
    if (!comes_down_from_infinity(p.lambda))
        throw UnsupportedError("measure does not come down from infinity");
    double best = std::numeric_limits<double>::infinity();
    double Md = static_cast<double>(std::max<std::int64_t>(M, 1));
    if (p.lambda.kingman_mass > 0.0)
        best = std::min(best, 2.0 / (p.lambda.kingman_mass * Md));
    if (p.lambda.beta) {
        double a = p.lambda.beta->alpha;
        double v = std::exp(std::log(a) + std::lgamma(a) + std::lgamma(Md) - std::lgamma(Md + a - 1.0)) /
                   (p.lambda.beta->scale * (a - 1.0));
        best = std::min(best, v);
    }
    return best;
}

/// Applies one `kingman`, `beta` or `atoms` entry; returns false for other keys.
inline bool apply_lambda_key(LambdaSpec& spec, const std::string& key, const ConfigValue& v)
{
    if (key == "kingman") {
        spec.kingman_mass = v.as_number(key);
        return true;
    }
    if (key == "beta") {
        if (v.kind != ConfigValue::Kind::table)
            throw ConfigError("beta: expected {alpha = ..., scale = ...}");
        BetaComponent b;
        bool have_alpha = false;
        for (auto& [k, fv] : v.fields) {
            if (k == "alpha") {
                b.alpha = fv.as_number("beta.alpha");
                have_alpha = true;
            } else if (k == "scale") {
                b.scale = fv.as_number("beta.scale");
            } else {
                throw ConfigError("beta: unknown field " + k);
            }
        }
        if (!have_alpha)
            throw ConfigError("beta: alpha is required");
        spec.beta = b;
        return true;
    }
    if (key == "atoms") {
        if (v.kind != ConfigValue::Kind::list)
            throw ConfigError("atoms: expected [[r, w], ...]");
        spec.atoms.clear();
        for (auto& item : v.items) {
            auto rw = item.as_numbers("atoms");
            if (rw.size() != 2)
                throw ConfigError("atoms: each entry must be [r, w]");
            spec.atoms.push_back({rw[0], rw[1]});
        }
        return true;
    }
    return false;
}

inline std::string to_config_block(const LambdaSpec& spec)
{
    std::string s = "kingman = " + format_double(spec.kingman_mass) + "\n";
    if (spec.beta)
        s += "beta = {alpha = " + format_double(spec.beta->alpha) + ", scale = " + format_double(spec.beta->scale) +
             "}\n";
    s += "atoms = [";
    for (std::size_t i = 0; i < spec.atoms.size(); ++i)
        s += (i ? ", [" : "[") + format_double(spec.atoms[i].r) + ", " + format_double(spec.atoms[i].w) + "]";
    return s + "]\n";
}

inline LambdaSpec parse_lambda_block(const std::string& text)
{
    auto doc = ConfigDocument::parse(text);
    LambdaSpec spec;
    for (auto& key : doc.keys())
        if (!apply_lambda_key(spec, key, doc.at(key)))
            throw ConfigError("unknown key " + key);
    spec.validate();
    return spec;
}

} // namespace lwf
