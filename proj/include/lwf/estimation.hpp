#pragma once

#include "lwf/closed_forms.hpp"
#include "lwf/dual.hpp"
#include "lwf/fixation_line.hpp"
#include "lwf/lookdown.hpp"
#include "lwf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace lwf {

struct ComparisonReport {
    std::string experiment;
    std::string label;
    double formula = 0.0;
    Estimate estimate;
    double z = 0.0;
    double threshold = 4.0;
    bool pass = false;
};

inline ComparisonReport make_report(std::string experiment, std::string label, double formula, const Estimate& est,
                                    double threshold = 4.0)
{
    ComparisonReport r{std::move(experiment), std::move(label), formula, est, z_score(formula, est), threshold, false};
    r.pass = std::abs(r.z) <= threshold;
    return r;
}

/// For estimators biased low by at most `bias`: z is the distance from the formula to [mean, mean + bias] in
/// standard errors.
inline ComparisonReport make_bracket_report(std::string experiment, std::string label, double formula,
                                            const Estimate& est, double bias, double threshold = 4.0)
{
    ComparisonReport r{std::move(experiment), std::move(label), formula, est, 0.0, threshold, false};
    double lo = est.mean, hi = est.mean + bias;
    double gap = formula < lo ? lo - formula : (formula > hi ? hi - formula : 0.0);
    if (gap != 0.0)
        r.z = est.stderr > 0.0 ? gap / est.stderr : std::copysign(std::numeric_limits<double>::infinity(), gap);
    r.pass = std::abs(r.z) <= threshold;
    return r;
}

/// Report whose pass flag comes from a p-value; estimate holds the p-value, formula the level.
inline ComparisonReport make_pvalue_report(std::string experiment, std::string label, double p_value,
                                           double level = 0.01)
{
    ComparisonReport r{std::move(experiment), std::move(label), level, Estimate{}, 0.0, 0.0, p_value > level};
    r.estimate.mean = p_value;
    return r;
}

inline void write_report_csv(std::ostream& out, const std::vector<ComparisonReport>& reports)
{
    out << "experiment,label,formula,estimate,stderr,z,pass\n";
    for (auto& r : reports)
        out << r.experiment << "," << r.label << "," << format_double(r.formula) << ","
            << format_double(r.estimate.mean) << "," << format_double(r.estimate.stderr) << ","
            << format_double(r.z) << "," << (r.pass ? "true" : "false") << "\n";
}

inline bool all_pass(const std::vector<ComparisonReport>& reports)
{
    return std::all_of(reports.begin(), reports.end(), [](auto& r) { return r.pass; });
}

// ---------------------------------------------------------------------------------------------
// explosion and fixation times

struct TimeSamples {
    std::vector<double> samples;
    double tail_bias = 0.0; // mean truncation bound; the true mean lies in [mean, mean + tail_bias]
    bool exact = false;

    Estimate estimate() const { return Estimate::from_samples(samples); }
};

inline std::int64_t truncation_for(std::int64_t M)
{
    return M > 0 ? M : 10'000;
}

/// I^k(infinity) samples, truncated at level M when no exact sampler exists.
inline TimeSamples sample_explosions(const ModelParams& p, std::int64_t k, std::int64_t replicates,
                                     std::uint64_t seed, unsigned workers = 1, std::int64_t M = 0)
{
    M = truncation_for(M);
    FixationLineSampler sampler(p, p.lambda.beta || !p.lambda.atoms.empty() ? M : 0);
    auto draws = parallel_map<ExplosionSample>(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        Rng rng(derive_seed(seed, "explosion", r));
        return sampler.sample_explosion(k, M, rng);
    });
    TimeSamples out;
    out.exact = true;
    CompensatedSum tail;
    for (auto& d : draws) {
        out.samples.push_back(d.elapsed);
        tail += d.tail_bound;
        out.exact = out.exact && d.exact;
    }
    out.tail_bias = draws.empty() ? 0.0 : tail.value() / static_cast<double>(draws.size());
    return out;
}

/// V_k samples; 0 when at most k types ever appear.
inline std::vector<std::int64_t> sample_coupon_levels(const SimplexPoint& x, int k, std::int64_t replicates,
                                                      std::uint64_t seed, unsigned workers = 1)
{
    return parallel_map<std::int64_t>(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        UniformStream U(derive_seed(seed, "coupon", r));
        auto c = coupon_levels(x, std::nullopt, U, k);
        return c.v_k ? static_cast<std::int64_t>(*c.v_k) : std::int64_t{0};
    });
}

/// Fixation-time samples I^{V_k - 1}(infinity) with V_k and the explosion drawn independently.
inline TimeSamples sample_fixation_times(const ModelParams& p, const SimplexPoint& x, int k, std::int64_t replicates,
                                         std::uint64_t seed, unsigned workers = 1, std::int64_t M = 0)
{
    if (p.theta != 0.0)
        throw DomainError("fixation times need theta = 0");
    if (x.d() != p.d)
        throw DomainError("initial condition dimension differs from d");
    if (!comes_down_from_infinity(p.lambda))
        throw UnsupportedError("measure does not come down from infinity");
    M = truncation_for(M);
    FixationLineSampler sampler(p, p.lambda.beta || !p.lambda.atoms.empty() ? M : 0);
    auto draws = parallel_map<ExplosionSample>(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        UniformStream U(derive_seed(seed, "fixation-levels", r));
        auto c = coupon_levels(x, std::nullopt, U, k);
        if (!c.v_k)
            return ExplosionSample{0.0, 0.0, true};
        Rng rng(derive_seed(seed, "fixation", r));
        return sampler.sample_explosion(static_cast<std::int64_t>(*c.v_k) - 1, M, rng);
    });
    TimeSamples out;
    out.exact = true;
    CompensatedSum tail;
    for (auto& d : draws) {
        out.samples.push_back(d.elapsed);
        tail += d.tail_bound;
        out.exact = out.exact && d.exact;
    }
    out.tail_bias = draws.empty() ? 0.0 : tail.value() / static_cast<double>(draws.size());
    return out;
}

struct FixationEstimate {
    Estimate estimate;
    double tail_bias = 0.0;
};

inline FixationEstimate estimate_fixation_time(const ModelParams& p, const SimplexPoint& x, int k,
                                               std::int64_t replicates, std::uint64_t seed, unsigned workers = 1,
                                               std::int64_t M = 0)
{
    auto s = sample_fixation_times(p, x, k, replicates, seed, workers, M);
    return {s.estimate(), s.tail_bias};
}

/// Closed-form mean fixation time for a pure Kingman or pure Beta measure.
inline double mean_fixation(const ModelParams& p, const SimplexPoint& x, int k)
{
    const auto& l = p.lambda;
    if (l.kingman_mass > 0.0 && !l.beta && l.atoms.empty())
        return mean_fixation_kingman(x, k, l.kingman_mass);
    if (l.kingman_mass == 0.0 && l.beta && l.atoms.empty())
        return mean_fixation_beta(x, k, l.beta->alpha, l.beta->scale);
    throw UnsupportedError("closed-form mean fixation time needs a pure Kingman or pure Beta measure");
}

// ---------------------------------------------------------------------------------------------
// order of disappearance

enum class OrderMode { levels, lookdown };

struct OrderDistribution {
    std::vector<std::vector<int>> orders; // (i_1, ..., i_{d+1}); i_1 survives, i_{d+1} is lost first
    std::vector<std::int64_t> counts;
    std::int64_t n = 0;

    Estimate at(std::size_t i) const { return proportion(counts.at(i), n); }
    std::size_t index_of(const std::vector<int>& order) const
    {
        auto it = std::find(orders.begin(), orders.end(), order);
        if (it == orders.end())
            throw DomainError("not a permutation of the types");
        return static_cast<std::size_t>(it - orders.begin());
    }
};

namespace detail {

inline std::vector<int> order_from_first_levels(const std::vector<std::size_t>& m)
{
    std::vector<int> order(m.size());
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return m[a - 1] < m[b - 1]; });
    return order;
}

inline std::vector<int> lookdown_order(const ModelParams& p, const SimplexPoint& x, std::size_t N, std::uint64_t seed)
{
    LookdownSimulator sim(p, N, {x}, seed);
    const int types = p.d + 1;
    std::vector<std::size_t> first(types, std::numeric_limits<std::size_t>::max());
    for (std::size_t j = N; j >= 1; --j)
        first[sim.type_at(0, j) - 1] = j;
    std::vector<char> lost(types, 0);
    std::vector<int> lost_order;
    auto collect = [&] {
        std::vector<int> fresh;
        auto& c = sim.type_counts(0);
        for (int i = 0; i < types; ++i)
            if (!lost[i] && c[i] == 0) {
                lost[i] = 1;
                fresh.push_back(i + 1);
            }
        std::sort(fresh.begin(), fresh.end(), [&](int a, int b) { return first[a - 1] > first[b - 1]; });
        lost_order.insert(lost_order.end(), fresh.begin(), fresh.end());
    };
    collect();
    while (static_cast<int>(lost_order.size()) < types - 1) {
        if (!sim.step())
            throw NumericError("lookdown stalled before fixation");
        collect();
    }
    std::vector<int> order;
    for (int i = 0; i < types; ++i)
        if (!lost[i])
            order.push_back(i + 1);
    for (auto it = lost_order.rbegin(); it != lost_order.rend(); ++it)
        if (static_cast<int>(order.size()) < types)
            order.push_back(*it);
    return order;
}

} // namespace detail

inline OrderDistribution estimate_disappearance_order(const ModelParams& p, const SimplexPoint& x,
                                                      std::int64_t replicates, std::uint64_t seed,
                                                      OrderMode mode = OrderMode::levels, std::size_t N = 200,
                                                      unsigned workers = 1)
{
    if (p.theta != 0.0)
        throw DomainError("disappearance order needs theta = 0");
    if (x.d() != p.d)
        throw DomainError("initial condition dimension differs from d");
    for (int i = 1; i <= x.d() + 1; ++i)
        if (!(x.freq(i) > 0.0))
            throw DomainError("disappearance order needs every type present");
    OrderDistribution out;
    std::vector<int> perm(p.d + 1);
    std::iota(perm.begin(), perm.end(), 1);
    do
        out.orders.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    out.counts.assign(out.orders.size(), 0);
    auto idx = parallel_map<std::size_t>(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        if (mode == OrderMode::levels) {
            UniformStream U(derive_seed(seed, "order-levels", r));
            auto c = coupon_levels(x, std::nullopt, U, p.d + 1);
            std::vector<std::size_t> m;
            for (auto& f : c.first_level)
                m.push_back(*f);
            return out.index_of(detail::order_from_first_levels(m));
        }
        return out.index_of(detail::lookdown_order(p, x, N, derive_seed(seed, "order-lookdown", r)));
    });
    for (auto i : idx)
        ++out.counts[i];
    out.n = replicates;
    return out;
}

// ---------------------------------------------------------------------------------------------
// stationary time

struct StationaryDiagnostics {
    std::vector<double> times;          // finite-N proxy of I^0(infinity)
    std::vector<double> x_at_time;      // X(1) at that time
    std::vector<double> x_at_horizon;   // X(1) at the fixed horizon
    double horizon = 0.0;
    KsResult independence;
    KsResult stationarity;
};

struct StationaryTimeResult {
    Estimate estimate;
    double tail_bias = 0.0;
    std::optional<StationaryDiagnostics> diagnostics;
};

/// Runs coupled lookdowns until every level carries a mutant; compares X(1) below and above the median time,
/// and X(1) at that time against X(1) at the horizon (2 x mean by default).
inline StationaryDiagnostics stationary_diagnostics(const ModelParams& p, const SimplexPoint& x, std::size_t N,
                                                    std::int64_t pairs, std::uint64_t seed, double horizon = 0.0,
                                                    unsigned workers = 1)
{
    if (!(p.theta > 0.0))
        throw DomainError("stationary time needs theta > 0");
    if (horizon <= 0.0) {
        if (!(p.lambda.kingman_mass > 0.0) || p.lambda.beta || !p.lambda.atoms.empty())
            throw DomainError("default horizon needs a pure Kingman measure");
        horizon = 2.0 * stationary_time_mean(p.lambda.kingman_mass, p.theta);
    }
    struct Pair {
        double time, x_time, x_horizon;
    };
    auto rows = parallel_map<Pair>(static_cast<std::size_t>(pairs), workers, [&](std::size_t r) {
        LookdownSimulator sim(p, N, {x}, derive_seed(seed, "stationary", r),
                              std::vector<std::size_t>{0});
        Pair out{0.0, 0.0, 0.0};
        bool got_time = sim.fixation_level(0) >= N, got_h = false;
        if (got_time)
            out = {0.0, sim.frequencies(0)[0], 0.0};
        while (!(got_time && got_h)) {
            if (!got_h && sim.next_event_time() > horizon) {
                sim.advance_to(horizon);
                out.x_horizon = sim.frequencies(0)[0];
                got_h = true;
                continue;
            }
            if (!sim.step())
                throw NumericError("lookdown stalled");
            if (!got_time && sim.fixation_level(0) >= N) {
                out.time = sim.time();
                out.x_time = sim.frequencies(0)[0];
                got_time = true;
            }
        }
        return out;
    });
    StationaryDiagnostics d;
    d.horizon = horizon;
    for (auto& r : rows) {
        d.times.push_back(r.time);
        d.x_at_time.push_back(r.x_time);
        d.x_at_horizon.push_back(r.x_horizon);
    }
    auto sorted = d.times;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    double median = sorted[sorted.size() / 2];
    std::vector<double> low, high;
    for (auto& r : rows)
        (r.time < median ? low : high).push_back(r.x_time);
    d.independence = ks_two_sample(low, high);
    d.stationarity = ks_two_sample(d.x_at_time, d.x_at_horizon);
    return d;
}

inline StationaryTimeResult estimate_stationary_time(const ModelParams& p, std::int64_t replicates,
                                                     std::uint64_t seed, unsigned workers = 1,
                                                     std::int64_t diagnostic_pairs = 0, std::size_t N = 200,
                                                     std::int64_t M = 0)
{
    if (!(p.theta > 0.0))
        throw DomainError("stationary time needs theta > 0");
    auto s = sample_explosions(p, 0, replicates, seed, workers, M);
    StationaryTimeResult out{s.estimate(), s.tail_bias, std::nullopt};
    if (diagnostic_pairs > 0) {
        std::vector<double> x(p.d, 1.0 / (p.d + 1));
        out.diagnostics = stationary_diagnostics(p, SimplexPoint(x), N, diagnostic_pairs, seed, 0.0, workers);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// duality

/// Type counts at time t over N levels, one row per replicate and initial condition.
using CountSamples = std::vector<std::vector<std::vector<std::int64_t>>>;

inline CountSamples sample_forward_counts(const ModelParams& p, std::size_t N, const std::vector<SimplexPoint>& xs,
                                          double t, std::int64_t replicates, std::uint64_t seed,
                                          unsigned workers = 1)
{
    AncestralSampler sampler(p, N);
    return parallel_map<std::vector<std::vector<std::int64_t>>>(
        static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
            Rng rng(derive_seed(seed, "forward-events", r));
            UniformStream U(derive_seed(seed, "forward-levels", r));
            return sampler.sample_counts(t, xs, rng, U);
        });
}

/// Unbiased estimate of E[X^n]: falling-factorial moments of the exchangeable counts.
inline Estimate falling_factorial_moment(const CountSamples& s, std::size_t ic, const std::vector<int>& n,
                                         std::size_t N)
{
    int total = 0;
    for (int v : n)
        total += v;
    double denom = 1.0;
    for (int j = 0; j < total; ++j)
        denom *= static_cast<double>(N - j);
    std::vector<double> h;
    h.reserve(s.size());
    for (auto& row : s) {
        double v = 1.0;
        for (std::size_t i = 0; i < n.size(); ++i)
            for (int j = 0; j < n[i]; ++j)
                v *= static_cast<double>(row[ic][i] - j);
        h.push_back(v / denom);
    }
    return Estimate::from_samples(h);
}

/// Plain moment E[(X^N)^n] of the empirical frequencies.
inline Estimate plain_moment(const CountSamples& s, std::size_t ic, const std::vector<int>& n, std::size_t N)
{
    std::vector<double> h;
    h.reserve(s.size());
    for (auto& row : s) {
        double v = 1.0;
        for (std::size_t i = 0; i < n.size(); ++i)
            v *= std::pow(static_cast<double>(row[ic][i]) / static_cast<double>(N), n[i]);
        h.push_back(v);
    }
    return Estimate::from_samples(h);
}

struct DualityCase {
    std::string label;
    ModelParams params;
    SimplexPoint x;
    std::vector<int> n0;
    double t;
};

/// z-score between the forward moment at finite N and the dual moment.
inline ComparisonReport duality_check(const ModelParams& p, const SimplexPoint& x, const std::vector<int>& n0,
                                      double t, std::int64_t replicates, std::uint64_t seed, std::size_t N = 200,
                                      unsigned workers = 1, std::string label = "")
{
    int total = 0;
    for (int v : n0)
        total += v;
    if (total > 4)
        throw DomainError("duality_check is limited to |n| <= 4");
    if (static_cast<int>(n0.size()) != p.d || x.d() != p.d)
        throw DomainError("dimension mismatch in duality_check");
    if (label.empty())
        label = "t=" + format_double(t);
    auto dual = dual_moment(p, x, DualState::counts(n0), t, replicates, derive_seed(seed, "dual-side", 0), workers);
    Estimate fwd;
    if (t == 0.0) {
        fwd = Estimate::from_moments(duality_function(x, DualState::counts(n0)), 0.0, replicates);
    } else {
        auto s = sample_forward_counts(p, N, {x}, t, replicates, derive_seed(seed, "forward-side", 0), workers);
        fwd = falling_factorial_moment(s, 0, n0, N);
    }
    Estimate combined = fwd;
    combined.stderr = std::hypot(fwd.stderr, dual.stderr);
    combined.ci95 = {combined.mean - 1.96 * combined.stderr, combined.mean + 1.96 * combined.stderr};
    return make_report("duality", label, dual.mean, combined);
}

// ---------------------------------------------------------------------------------------------
// coalescence

struct CoalescenceRun {
    double coincidence_time = 0.0; // first time the coupled frequencies agree
    double saturation_time = 0.0;  // first time the embedded fixation line started at D - 1 reaches N
    std::size_t d_xy = 0;
};

inline CoalescenceRun coalescence_run(const ModelParams& p, std::size_t N, const SimplexPoint& x,
                                      const SimplexPoint& y, std::uint64_t seed)
{
    UniformStream U(derive_seed(seed, "levels", 0));
    auto c = coupon_levels(x, y, U, 1);
    CoalescenceRun out;
    out.d_xy = c.d_xy ? *c.d_xy : std::numeric_limits<std::size_t>::max();
    if (out.d_xy > N)
        return out;
    if (out.d_xy == 1 && p.theta == 0.0) {
        // level 1 is never replaced, so the two systems stay apart forever
        out.coincidence_time = out.saturation_time = std::numeric_limits<double>::infinity();
        return out;
    }
    LookdownSimulator sim(p, N, {x, y}, seed, U, {out.d_xy - 1});
    bool coincide = false, saturated = false;
    auto check = [&] {
        if (!coincide && sim.type_counts(0) == sim.type_counts(1)) {
            coincide = true;
            out.coincidence_time = sim.time();
        }
        if (!saturated && sim.fixation_level(0) >= N) {
            saturated = true;
            out.saturation_time = sim.time();
        }
    };
    check();
    while (!(coincide && saturated)) {
        if (!sim.step())
            throw NumericError("lookdown stalled before coalescence");
        check();
    }
    return out;
}

inline std::vector<CoalescenceRun> coalescence_experiment(const ModelParams& p, std::size_t N,
                                                          const SimplexPoint& x, const SimplexPoint& y,
                                                          std::int64_t runs, std::uint64_t seed,
                                                          unsigned workers = 1)
{
    return parallel_map<CoalescenceRun>(static_cast<std::size_t>(runs), workers, [&](std::size_t r) {
        return coalescence_run(p, N, x, y, derive_seed(seed, "coalescence", r));
    });
}

// ---------------------------------------------------------------------------------------------
// heatmaps

struct HeatmapPanel {
    std::string name;
    LambdaSpec lambda;
};

/// Kingman with unit mass and the Beta(2-alpha, alpha) probability measures for alpha = 1.8, 1.5, 1.2.
inline std::vector<HeatmapPanel> default_panels()
{
    return {{"kingman", LambdaSpec::kingman(1.0)},
            {"beta-1.8", LambdaSpec::beta_measure(1.8, 1.0)},
            {"beta-1.5", LambdaSpec::beta_measure(1.5, 1.0)},
            {"beta-1.2", LambdaSpec::beta_measure(1.2, 1.0)}};
}

struct HeatmapCell {
    double x1, x2, value;
};

inline std::vector<HeatmapCell> heatmap_grid(const ModelParams& p, int k, int m)
{
    if (p.d != 2)
        throw DomainError("heatmaps need d = 2");
    if (p.theta != 0.0)
        throw DomainError("heatmaps need theta = 0");
    if (m < 1)
        throw DomainError("grid resolution must be positive");
    std::vector<HeatmapCell> out;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; i + j <= m; ++j) {
            double x1 = static_cast<double>(i) / m, x2 = static_cast<double>(j) / m;
            double x3 = static_cast<double>(m - i - j) / m;
            std::vector<double> x{x1, x2};
            SimplexPoint pt(x);
            int present = (x1 > 0) + (x2 > 0) + (x3 > 0);
            double v = present <= k ? 0.0 : mean_fixation(p, pt, k);
            out.push_back({x1, x2, v});
        }
    return out;
}

inline void write_heatmap_csv(std::ostream& out, const std::vector<HeatmapCell>& cells)
{
    out << "x1,x2,value\n";
    for (auto& c : cells)
        out << format_double(c.x1) << "," << format_double(c.x2) << "," << format_double(c.value) << "\n";
}

// ---------------------------------------------------------------------------------------------
// suites

struct SuiteOptions {
    std::uint64_t seed = default_seed;
    unsigned workers = 1;
    double scale = 1.0; // multiplies every replicate count
};

namespace detail {

inline std::int64_t reps(const SuiteOptions& o, std::int64_t n)
{
    return std::max<std::int64_t>(10, static_cast<std::int64_t>(std::llround(o.scale * static_cast<double>(n))));
}

inline ModelParams kingman_params(int d, double c, double theta = 0.0, std::vector<double> nu = {})
{
    ModelParams p;
    p.d = d;
    p.lambda = LambdaSpec::kingman(c);
    p.theta = theta;
    p.nu = nu.empty() ? std::vector<double>(d, 0.0) : nu;
    if (theta > 0.0 && nu.empty())
        p.nu.assign(d, 1.0 / (d + 1));
    return p;
}

inline ModelParams beta_params(int d, double alpha)
{
    ModelParams p;
    p.d = d;
    p.lambda = LambdaSpec::beta_measure(alpha, 1.0);
    p.theta = 0.0;
    p.nu.assign(d, 0.0);
    return p;
}

} // namespace detail

inline std::vector<ComparisonReport> suite_formulas(const SuiteOptions& o)
{
    std::vector<ComparisonReport> out;
    auto seed = [&](std::string_view name) { return derive_seed(o.seed, name, 0); };
    {
        auto p = detail::kingman_params(1, 1.0);
        auto s = sample_fixation_times(p, SimplexPoint({0.5}), 1, detail::reps(o, 20000), seed("fix-k-d1"), o.workers);
        out.push_back(make_report("fixation-kingman", "d=1 x=0.5 k=1", 2.0 * std::log(2.0), s.estimate()));
    }
    {
        auto p = detail::kingman_params(2, 1.0);
        SimplexPoint x({1.0 / 3, 1.0 / 3});
        auto s = sample_fixation_times(p, x, 1, detail::reps(o, 20000), seed("fix-k-d2"), o.workers);
        out.push_back(make_report("fixation-kingman", "d=2 center k=1", 4.0 * std::log(1.5), s.estimate()));
    }
    for (double c : {1.0, 2.0})
        for (int q : {1, 2, 5, 10}) {
            auto p = detail::kingman_params(1, c);
            auto s = sample_explosions(p, q, detail::reps(o, 10000), seed("explosion-kingman") ^ (q * 131 + int(c)),
                                       o.workers);
            out.push_back(make_report("explosion-kingman", "c=" + format_double(c) + " level=" + std::to_string(q),
                                      mean_explosion_kingman(q, c), s.estimate(), 3.0));
        }
    {
        auto p = detail::beta_params(1, 1.5);
        auto s = sample_explosions(p, 1, detail::reps(o, 5000), seed("explosion-beta"), o.workers, 10'000);
        out.push_back(
            make_bracket_report("explosion-beta", "alpha=1.5 level=1", mean_explosion_beta(1, 1.5), s.estimate(),
                                s.tail_bias));
    }
    {
        SimplexPoint x({0.5, 0.3});
        auto v = sample_coupon_levels(x, 1, detail::reps(o, 20000), seed("coupon"), o.workers);
        for (int q : {2, 3, 4}) {
            std::int64_t hits = std::count(v.begin(), v.end(), q);
            out.push_back(make_report("coupon-pmf", "x=(0.5,0.3) k=1 level=" + std::to_string(q),
                                      coupon_pmf(x, 1, q), proportion(hits, static_cast<std::int64_t>(v.size()))));
        }
    }
    {
        auto p = detail::kingman_params(2, 1.0);
        SimplexPoint x({0.5, 0.3});
        auto dist = estimate_disappearance_order(p, x, detail::reps(o, 20000), seed("order"), OrderMode::levels, 0,
                                                 o.workers);
        for (std::size_t i = 0; i < dist.orders.size(); ++i) {
            std::string lbl = "order=";
            for (int t : dist.orders[i])
                lbl += std::to_string(t);
            out.push_back(make_report("disappearance-order", lbl, disappearance_order_prob(x, dist.orders[i]),
                                      dist.at(i)));
        }
    }
    for (auto [c, theta] : {std::pair{2.0, 2.0}, std::pair{2.0, 1.0}}) {
        auto p = detail::kingman_params(1, c, theta, {0.5});
        auto s = sample_explosions(p, 0, detail::reps(o, 20000), seed("stationary") ^ int(theta), o.workers);
        out.push_back(make_report("stationary-time", "c=" + format_double(c) + " theta=" + format_double(theta),
                                  stationary_time_mean(c, theta), s.estimate(), 3.0));
    }
    return out;
}

inline std::vector<DualityCase> default_duality_cases()
{
    std::vector<DualityCase> cases;
    auto k1 = detail::kingman_params(1, 1.0);
    auto k1m = detail::kingman_params(1, 1.0, 0.5, {0.4});
    auto k2m = detail::kingman_params(2, 1.0, 0.5, {0.3, 0.3});
    auto b1 = detail::beta_params(1, 1.5);
    for (double t : {0.25, 1.0}) {
        auto ts = " t=" + format_double(t);
        cases.push_back({"kingman d=1 n=(2)" + ts, k1, SimplexPoint({0.5}), {2}, t});
        cases.push_back({"kingman d=1 n=(3)" + ts, k1, SimplexPoint({0.3}), {3}, t});
        cases.push_back({"kingman-mutation d=1 n=(2)" + ts, k1m, SimplexPoint({0.5}), {2}, t});
        cases.push_back({"kingman-mutation d=2 n=(1,1)" + ts, k2m, SimplexPoint({0.4, 0.35}), {1, 1}, t});
        cases.push_back({"kingman-mutation d=2 n=(2,1)" + ts, k2m, SimplexPoint({0.4, 0.35}), {2, 1}, t});
        cases.push_back({"beta d=1 n=(2)" + ts, b1, SimplexPoint({0.5}), {2}, t});
    }
    return cases;
}

inline std::vector<ComparisonReport> suite_duality(const SuiteOptions& o, std::size_t N = 200)
{
    std::vector<ComparisonReport> out;
    std::uint64_t i = 0;
    for (auto& c : default_duality_cases())
        out.push_back(duality_check(c.params, c.x, c.n0, c.t, detail::reps(o, 20000),
                                    derive_seed(o.seed, "duality-suite", i++), N, o.workers, c.label));
    return out;
}

inline ComparisonReport coalescence_report(const std::vector<CoalescenceRun>& runs)
{
    std::int64_t same = 0;
    for (auto& r : runs)
        same += r.coincidence_time == r.saturation_time;
    auto est = proportion(same, static_cast<std::int64_t>(runs.size()));
    ComparisonReport r{"coalescence", "coincidence equals saturation", 1.0, est, 0.0, 0.0,
                       same == static_cast<std::int64_t>(runs.size())};
    r.z = r.pass ? 0.0 : std::numeric_limits<double>::infinity();
    return r;
}

inline std::vector<ComparisonReport> suite_coalescence(const SuiteOptions& o)
{
    auto p = detail::kingman_params(1, 1.0);
    auto runs = coalescence_experiment(p, 100, SimplexPoint({0.3}), SimplexPoint({0.7}), detail::reps(o, 1000),
                                       derive_seed(o.seed, "coalescence-suite", 0), o.workers);
    return {coalescence_report(runs)};
}

inline std::vector<ComparisonReport> suite_stationarity(const SuiteOptions& o)
{
    std::vector<ComparisonReport> out;
    for (auto [c, theta] : {std::pair{2.0, 2.0}, std::pair{2.0, 1.0}}) {
        auto p = detail::kingman_params(1, c, theta, {0.5});
        auto s = estimate_stationary_time(p, detail::reps(o, 20000), derive_seed(o.seed, "stationary-suite", int(theta)),
                                          o.workers);
        out.push_back(make_report("stationary-time", "c=" + format_double(c) + " theta=" + format_double(theta),
                                  stationary_time_mean(c, theta), s.estimate, 3.0));
    }
    auto p = detail::kingman_params(1, 1.0, 1.0, {0.5});
    auto d = stationary_diagnostics(p, SimplexPoint({0.5}), 200, detail::reps(o, 2000),
                                    derive_seed(o.seed, "stationary-diagnostics", 0), 0.0, o.workers);
    out.push_back(make_pvalue_report("stationary-independence", "ks p-value N=200", d.independence.p_value));
    out.push_back(make_pvalue_report("stationary-distribution", "ks p-value N=200", d.stationarity.p_value));
    return out;
}

inline const std::vector<std::string>& suite_names()
{
    static const std::vector<std::string> names{"formulas", "duality", "coalescence", "stationarity", "all"};
    return names;
}

inline std::vector<ComparisonReport> run_suite(const std::string& name, const SuiteOptions& o)
{
    if (name == "formulas")
        return suite_formulas(o);
    if (name == "duality")
        return suite_duality(o);
    if (name == "coalescence")
        return suite_coalescence(o);
    if (name == "stationarity")
        return suite_stationarity(o);
    if (name == "all") {
        std::vector<ComparisonReport> out;
        for (auto* n : {"formulas", "duality", "coalescence", "stationarity"}) {
            auto r = run_suite(n, o);
            out.insert(out.end(), r.begin(), r.end());
        }
        return out;
    }
    throw DomainError("unknown suite: " + name);
}

} // namespace lwf
