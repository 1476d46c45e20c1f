#pragma once

#include "lwf/fixation_line.hpp"
#include "lwf/lambda_measure.hpp"
#include "lwf/random.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lwf {

/// Minimal i in 1..d+1 with x(1) + ... + x(i) > u.
inline int type_of(double u, const SimplexPoint& x)
{
    double s = 0.0;
    for (int i = 1; i <= x.d(); ++i) {
        s += x.freq(i);
        if (s > u)
            return i;
    }
    return x.d() + 1;
}

struct Origin {
    bool mutant = false;
    std::size_t index = 0; // initial level (1-based) or mutation id
    bool operator==(const Origin&) const = default;
};

struct IndividualLabel {
    Origin origin;
    double u = 0.0;
};

enum class EventKind { pair, large, mutation };

/// Levels are 1-based. `pair`: (i, j) with i < j. `large`: sorted marks in [N]. `mutation`: level i and mark u.
struct LookdownEvent {
    EventKind kind = EventKind::pair;
    double time = 0.0;
    std::size_t i = 0, j = 0;
    std::vector<std::size_t> marks;
    double u = 0.0;
};

/// N labels stored as compact origin ids; ids at or above `mutant_base` are mutants.
struct LookdownState {
    static constexpr std::uint32_t mutant_base = 1u << 31;

    double time = 0.0;
    std::vector<std::uint32_t> levels;
    std::vector<double> mutant_u;
    std::vector<double> initial_u; // initial_u[j-1] = U(j)
    std::vector<LookdownEvent> event_log;

    std::size_t size() const { return levels.size(); }

    IndividualLabel label(std::size_t level) const
    {
        auto id = levels.at(level - 1);
        if (id >= mutant_base)
            return {{true, id - mutant_base}, mutant_u[id - mutant_base]};
        return {{false, id}, initial_u[id - 1]};
    }

    static LookdownState initial(std::size_t N, const UniformStream& U)
    {
        LookdownState s;
        s.levels.resize(N);
        s.initial_u.resize(N);
        for (std::size_t j = 1; j <= N; ++j) {
            s.levels[j - 1] = static_cast<std::uint32_t>(j);
            s.initial_u[j - 1] = U(j);
        }
        return s;
    }
};

namespace detail {

inline void validate_event(const LookdownEvent& e, std::size_t N)
{
    switch (e.kind) {
    case EventKind::pair:
        if (!(e.i >= 1 && e.i < e.j && e.j <= N))
            throw DomainError("pair event needs 1 <= i < j <= N");
        break;
    case EventKind::large:
        if (e.marks.size() < 2 || !std::is_sorted(e.marks.begin(), e.marks.end()) ||
            std::adjacent_find(e.marks.begin(), e.marks.end()) != e.marks.end() || e.marks.front() < 1 ||
            e.marks.back() > N)
            throw DomainError("large event needs at least two distinct sorted marks in [1,N]");
        break;
    case EventKind::mutation:
        if (!(e.i >= 1 && e.i <= N) || !(e.u >= 0.0 && e.u <= 1.0))
            throw DomainError("mutation event needs a level in [1,N] and u in [0,1]");
        break;
    }
}

/// Applies the event in place; calls on_drop(id) for labels pushed above N and on_copy(id) for new copies.
template <class Drop, class Copy>
void apply_event(LookdownState& s, const LookdownEvent& e, std::vector<std::uint32_t>& scratch, Drop&& on_drop,
                 Copy&& on_copy)
{
    auto& L = s.levels;
    const std::size_t N = L.size();
    switch (e.kind) {
    case EventKind::pair: {
        on_drop(L[N - 1]);
        std::uint32_t parent = L[e.i - 1];
        std::memmove(&L[e.j], &L[e.j - 1], (N - e.j) * sizeof(std::uint32_t));
        L[e.j - 1] = parent;
        on_copy(parent);
        break;
    }
    case EventKind::large: {
        const std::size_t m1 = e.marks.front();
        std::uint32_t parent = L[m1 - 1];
        scratch.assign(L.begin() + static_cast<std::ptrdiff_t>(m1), L.end());
        std::size_t next = 0, mk = 1;
        for (std::size_t n = m1 + 1; n <= N; ++n) {
            if (mk < e.marks.size() && e.marks[mk] == n) {
                L[n - 1] = parent;
                on_copy(parent);
                ++mk;
            } else {
                L[n - 1] = scratch[next++];
            }
        }
        for (; next < scratch.size(); ++next)
            on_drop(scratch[next]);
        break;
    }
    case EventKind::mutation: {
        on_drop(L[N - 1]);
        auto id = static_cast<std::uint32_t>(LookdownState::mutant_base + s.mutant_u.size());
        s.mutant_u.push_back(e.u);
        std::memmove(&L[e.i], &L[e.i - 1], (N - e.i) * sizeof(std::uint32_t));
        L[e.i - 1] = id;
        on_copy(id);
        break;
    }
    }
    s.time = std::max(s.time, e.time);
}

} // namespace detail

/// Pure transition: returns the state after the event.
inline LookdownState step_event(LookdownState state, const LookdownEvent& event)
{
    detail::validate_event(event, state.size());
    std::vector<std::uint32_t> scratch;
    detail::apply_event(state, event, scratch, [](std::uint32_t) {}, [](std::uint32_t) {});
    state.event_log.push_back(event);
    return state;
}

/// Cumulative tables of binom(n,k) lambda_{n,k} over k = 2..n.
class MergerTable {
public:
    MergerTable() = default;
    MergerTable(const LambdaSpec& spec, std::size_t max_n, bool all_sizes)
    {
        if (spec.positive_mass() <= 0.0)
            return;
        rows_.resize(max_n + 1);
        for (std::size_t n = all_sizes ? 2 : max_n; n <= max_n; ++n) {
            auto& row = rows_[n];
            row.resize(n - 1);
            double acc = 0.0;
            for (std::size_t k = 2; k <= n; ++k) {
                acc += merger_rate(spec, static_cast<std::int64_t>(n), static_cast<std::int64_t>(k));
                row[k - 2] = acc;
            }
        }
    }

    double total(std::size_t n) const
    {
        if (n < 2 || n >= rows_.size() || rows_[n].empty())
            return 0.0;
        return rows_[n].back();
    }

    std::size_t sample_size(std::size_t n, Rng& rng) const
    {
        const auto& row = rows_[n];
        double u = uniform01(rng) * row.back();
        auto it = std::upper_bound(row.begin(), row.end(), u);
        if (it == row.end())
            --it;
        return static_cast<std::size_t>(it - row.begin()) + 2;
    }

private:
    std::vector<std::vector<double>> rows_;
};

struct CoupledFrequencies {
    double time = 0.0;
    std::vector<std::vector<double>> x; // x[ic] has d entries
};

/// Forward finite-N lookdown under the grand coupling.
class LookdownSimulator {
public:
    LookdownSimulator(ModelParams params, std::size_t N, std::vector<SimplexPoint> ics, std::uint64_t seed,
                      std::vector<std::size_t> fixation_ks = {}, bool record_events = false)
        : LookdownSimulator(std::move(params), N, std::move(ics), seed,
                            UniformStream(derive_seed(seed, "levels", 0)), std::move(fixation_ks), record_events)
    {
    }

    LookdownSimulator(ModelParams params, std::size_t N, std::vector<SimplexPoint> ics, std::uint64_t seed,
                      UniformStream U, std::vector<std::size_t> fixation_ks = {}, bool record_events = false)
        : p_(std::move(params)), N_(N), ics_(std::move(ics)), rng_(derive_seed(seed, "events", 0)), U_(U),
          ks_(std::move(fixation_ks)), record_(record_events)
    {
        p_.validate();
        if (N_ < 2)
            throw DomainError("lookdown needs N >= 2");
        for (auto& x : ics_)
            if (x.d() != p_.d)
                throw DomainError("initial condition dimension differs from d");
        if (p_.theta > 0.0)
            nu_point_ = SimplexPoint(p_.nu);
        state_ = LookdownState::initial(N_, U_);
        table_ = MergerTable(p_.lambda, N_, false);
        pair_rate_ = p_.lambda.kingman_mass * binom(static_cast<std::int64_t>(N_), 2);
        large_rate_ = table_.total(N_);
        mut_rate_ = p_.theta * static_cast<double>(N_);
        total_rate_ = pair_rate_ + large_rate_ + mut_rate_;

        init_types_.resize(ics_.size());
        counts_.assign(ics_.size(), std::vector<std::int64_t>(p_.d + 1, 0));
        for (std::size_t c = 0; c < ics_.size(); ++c) {
            init_types_[c].resize(N_);
            for (std::size_t j = 0; j < N_; ++j) {
                init_types_[c][j] = type_of(state_.initial_u[j], ics_[c]);
                ++counts_[c][init_types_[c][j] - 1];
            }
        }
        origin_counts_.assign(N_ + 1, 1);
        origin_counts_[0] = 0;
        fix_.assign(ks_.size(), 0);
        for (std::size_t i = 0; i < ks_.size(); ++i) {
            fix_[i] = std::min(ks_[i], N_);
            line_paths_.push_back({static_cast<std::int64_t>(ks_[i]), {}, static_cast<std::int64_t>(N_)});
        }
        update_fixation_lines();
        draw_next_time();
    }

    const ModelParams& params() const { return p_; }
    std::size_t N() const { return N_; }
    double time() const { return state_.time; }
    double next_event_time() const { return next_time_; }
    const LookdownState& state() const { return state_; }
    const UniformStream& level_stream() const { return U_; }
    const LookdownEvent& last_event() const { return event_; }
    double total_rate() const { return total_rate_; }

    /// Applies the pending event; returns false when no event can ever occur.
    bool step()
    {
        if (!(total_rate_ > 0.0))
            return false;
        event_ = sample_event(next_time_);
        apply(event_);
        draw_next_time();
        return true;
    }

    /// Applies all events up to time t and sets the clock to t.
    template <class OnEvent>
    void advance_to(double t, OnEvent&& on_event)
    {
        while (next_time_ <= t) {
            if (!step())
                break;
            on_event(*this);
        }
        state_.time = std::max(state_.time, t);
    }
    void advance_to(double t)
    {
        advance_to(t, [](const LookdownSimulator&) {});
    }

    int type_at(std::size_t ic, std::size_t level) const { return type_of_id(ic, state_.levels[level - 1]); }

    const std::vector<std::int64_t>& type_counts(std::size_t ic) const { return counts_[ic]; }

    std::vector<double> frequencies(std::size_t ic) const
    {
        std::vector<double> f(p_.d);
        for (int i = 0; i < p_.d; ++i)
            f[i] = static_cast<double>(counts_[ic][i]) / static_cast<double>(N_);
        return f;
    }

    CoupledFrequencies coupled_frequencies() const
    {
        CoupledFrequencies cf{state_.time, {}};
        for (std::size_t c = 0; c < ics_.size(); ++c)
            cf.x.push_back(frequencies(c));
        return cf;
    }

    /// Level of the fixation line started at the given index into fixation_ks.
    std::size_t fixation_level(std::size_t idx) const { return fix_.at(idx); }
    const FixationLinePath& fixation_path(std::size_t idx) const { return line_paths_.at(idx); }

    /// p^j for j = 1..N at the current time (index j-1).
    std::vector<double> descendant_frequencies() const
    {
        std::vector<double> p(N_);
        for (std::size_t j = 1; j <= N_; ++j)
            p[j - 1] = static_cast<double>(origin_counts_[j]) / static_cast<double>(N_);
        return p;
    }
    double mutant_fraction() const { return static_cast<double>(mutant_count_) / static_cast<double>(N_); }
    std::int64_t origin_count(std::size_t j) const { return origin_counts_.at(j); }

private:
    ModelParams p_;
    std::size_t N_;
    std::vector<SimplexPoint> ics_;
    Rng rng_;
    UniformStream U_;
    std::vector<std::size_t> ks_;
    bool record_;
    std::optional<SimplexPoint> nu_point_;
    LookdownState state_;
    MergerTable table_;
    double pair_rate_ = 0, large_rate_ = 0, mut_rate_ = 0, total_rate_ = 0;
    double next_time_ = 0;
    LookdownEvent event_;
    std::vector<std::vector<int>> init_types_;
    std::vector<int> mutant_types_;
    std::vector<std::vector<std::int64_t>> counts_;
    std::vector<std::int64_t> origin_counts_;
    std::int64_t mutant_count_ = 0;
    std::vector<std::size_t> fix_;
    std::vector<FixationLinePath> line_paths_;
    std::vector<std::uint32_t> scratch_;
    std::vector<std::size_t> marks_buf_;

    int type_of_id(std::size_t ic, std::uint32_t id) const
    {
        if (id >= LookdownState::mutant_base)
            return mutant_types_[id - LookdownState::mutant_base];
        return init_types_[ic][id - 1];
    }

    void draw_next_time()
    {
        next_time_ = total_rate_ > 0.0 ? state_.time + exponential(rng_, total_rate_)
                                       : std::numeric_limits<double>::infinity();
    }

    LookdownEvent sample_event(double t)
    {
        LookdownEvent e;
        e.time = t;
        double u = uniform01(rng_) * total_rate_;
        if (u < pair_rate_) {
            std::uniform_int_distribution<std::size_t> lvl(1, N_);
            std::size_t a = lvl(rng_), b = lvl(rng_);
            while (b == a)
                b = lvl(rng_);
            e.kind = EventKind::pair;
            e.i = std::min(a, b);
            e.j = std::max(a, b);
        } else if (u < pair_rate_ + large_rate_) {
            e.kind = EventKind::large;
            std::size_t K = table_.sample_size(N_, rng_);
            marks_buf_ = sample_distinct(rng_, N_, K, std::move(marks_buf_));
            e.marks.resize(K);
            for (std::size_t i = 0; i < K; ++i)
                e.marks[i] = marks_buf_[i] + 1;
        } else {
            e.kind = EventKind::mutation;
            std::uniform_int_distribution<std::size_t> lvl(1, N_);
            e.i = lvl(rng_);
            e.u = uniform01(rng_);
        }
        return e;
    }

    void apply(const LookdownEvent& e)
    {
        if (e.kind == EventKind::mutation)
            mutant_types_.push_back(type_of(e.u, *nu_point_));
        detail::apply_event(
            state_, e, scratch_, [&](std::uint32_t id) { adjust(id, -1); }, [&](std::uint32_t id) { adjust(id, +1); });
        if (record_)
            state_.event_log.push_back(e);
        update_fixation_lines();
    }

    void adjust(std::uint32_t id, int delta)
    {
        for (std::size_t c = 0; c < ics_.size(); ++c)
            counts_[c][type_of_id(c, id) - 1] += delta;
        if (id >= LookdownState::mutant_base)
            mutant_count_ += delta;
        else
            origin_counts_[id] += delta;
    }

    void update_fixation_lines()
    {
        for (std::size_t i = 0; i < ks_.size(); ++i) {
            std::size_t f = fix_[i];
            while (f < N_) {
                auto id = state_.levels[f];
                if (id >= LookdownState::mutant_base || id <= ks_[i])
                    ++f;
                else
                    break;
            }
            if (f != fix_[i] || (line_paths_[i].jumps.empty() && f != ks_[i])) {
                fix_[i] = f;
                line_paths_[i].jumps.push_back({state_.time, static_cast<std::int64_t>(f)});
            }
        }
    }
};

struct RunOptions {
    std::vector<double> sample_times;
    bool sample_at_events = false;
    bool record_events = false;
    std::vector<std::size_t> fixation_ks;
};

struct LookdownRun {
    std::vector<CoupledFrequencies> trajectory;
    std::vector<std::vector<double>> descendants; // p^j at each sample time
    std::vector<LookdownEvent> event_log;
    std::vector<std::size_t> fixation_ks;
    std::vector<FixationLinePath> fixation_lines;
};

inline LookdownRun run(const ModelParams& params, std::size_t N, double horizon,
                       const std::vector<SimplexPoint>& ics, std::uint64_t seed, RunOptions opt = {})
{
    if (!(horizon > 0.0))
        throw DomainError("run needs a positive horizon");
    LookdownSimulator sim(params, N, ics, seed, opt.fixation_ks, opt.record_events);
    LookdownRun out;
    auto times = opt.sample_times;
    std::sort(times.begin(), times.end());
    auto snapshot = [&](const LookdownSimulator& s) {
        out.trajectory.push_back(s.coupled_frequencies());
        out.descendants.push_back(s.descendant_frequencies());
    };
    snapshot(sim);
    for (double t : times) {
        if (t > horizon)
            break;
        sim.advance_to(t, [&](const LookdownSimulator& s) {
            if (opt.sample_at_events)
                snapshot(s);
        });
        if (t > 0.0)
            snapshot(sim);
    }
    sim.advance_to(horizon, [&](const LookdownSimulator& s) {
        if (opt.sample_at_events)
            snapshot(s);
    });
    out.event_log = sim.state().event_log;
    out.fixation_ks = opt.fixation_ks;
    for (std::size_t i = 0; i < opt.fixation_ks.size(); ++i)
        out.fixation_lines.push_back(sim.fixation_path(i));
    return out;
}

inline FixationLinePath embedded_fixation_line(const LookdownRun& r, std::size_t k)
{
    for (std::size_t i = 0; i < r.fixation_ks.size(); ++i)
        if (r.fixation_ks[i] == k)
            return r.fixation_lines[i];
    throw DomainError("fixation line " + std::to_string(k) + " was not tracked in this run");
}

/// p^j at the last recorded snapshot not after t.
inline std::vector<double> descendant_frequencies(const LookdownRun& r, double t)
{
    std::size_t idx = 0;
    for (std::size_t i = 0; i < r.trajectory.size(); ++i)
        if (r.trajectory[i].time <= t)
            idx = i;
    return r.descendants.at(idx);
}

inline void write_trajectory_csv(std::ostream& out, const LookdownRun& r, int d)
{
    out << "time,ic_index";
    for (int i = 1; i <= d; ++i)
        out << ",x" << i;
    out << "\n";
    for (auto& snap : r.trajectory)
        for (std::size_t c = 0; c < snap.x.size(); ++c) {
            out << format_double(snap.time) << "," << c;
            for (double v : snap.x[c])
                out << "," << format_double(v);
            out << "\n";
        }
}

/// Exact law of the type counts on levels 1..N at a fixed time, obtained by tracing the
/// ancestral levels of all N levels back through the Poisson events.
class AncestralSampler {
public:
    AncestralSampler(ModelParams params, std::size_t N) : p_(std::move(params)), N_(N)
    {
        p_.validate();
        if (N_ < 2)
            throw DomainError("ancestral sampler needs N >= 2");
        table_ = MergerTable(p_.lambda, N_, true);
        if (p_.theta > 0.0)
            nu_point_ = SimplexPoint(p_.nu);
    }

    /// counts[ic][type-1] over the N levels at time t.
    std::vector<std::vector<std::int64_t>> sample_counts(double t, const std::vector<SimplexPoint>& ics, Rng& rng,
                                                         const UniformStream& U) const
    {
        std::vector<std::int32_t> groups(N_, 1);
        std::vector<std::int64_t> mutant(p_.d + 1, 0);
        std::vector<std::size_t> marks;
        const double c = p_.lambda.kingman_mass;
        double remaining = t;
        while (!groups.empty()) {
            std::size_t L = groups.size();
            double pair = c * 0.5 * static_cast<double>(L) * static_cast<double>(L - 1);
            double large = table_.total(L);
            double mut = p_.theta * static_cast<double>(L);
            double total = pair + large + mut;
            if (!(total > 0.0))
                break;
            remaining -= exponential(rng, total);
            if (remaining < 0.0)
                break;
            double u = uniform01(rng) * total;
            if (u < pair) {
                std::uniform_int_distribution<std::size_t> lvl(0, L - 1);
                std::size_t a = lvl(rng), b = lvl(rng);
                while (b == a)
                    b = lvl(rng);
                if (a > b)
                    std::swap(a, b);
                groups[a] += groups[b];
                groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(b));
            } else if (u < pair + large) {
                std::size_t K = table_.sample_size(L, rng);
                marks = sample_distinct(rng, L, K, std::move(marks));
                std::size_t out = marks[0] + 1, mk = 1;
                for (std::size_t n = marks[0] + 1; n < L; ++n) {
                    if (mk < marks.size() && marks[mk] == n) {
                        groups[marks[0]] += groups[n];
                        ++mk;
                    } else {
                        groups[out++] = groups[n];
                    }
                }
                groups.resize(out);
            } else {
                std::uniform_int_distribution<std::size_t> lvl(0, L - 1);
                std::size_t i = lvl(rng);
                mutant[type_of(uniform01(rng), *nu_point_) - 1] += groups[i];
                groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
        std::vector<std::vector<std::int64_t>> counts(ics.size(), mutant);
        for (std::size_t j = 0; j < groups.size(); ++j) {
            double uj = U(j + 1);
            for (std::size_t ic = 0; ic < ics.size(); ++ic)
                counts[ic][type_of(uj, ics[ic]) - 1] += groups[j];
        }
        return counts;
    }

    CoupledFrequencies sample(double t, const std::vector<SimplexPoint>& ics, std::uint64_t seed) const
    {
        Rng rng(derive_seed(seed, "events", 0));
        UniformStream U(derive_seed(seed, "levels", 0));
        auto counts = sample_counts(t, ics, rng, U);
        CoupledFrequencies cf{t, {}};
        for (auto& c : counts) {
            std::vector<double> f(p_.d);
            for (int i = 0; i < p_.d; ++i)
                f[i] = static_cast<double>(c[i]) / static_cast<double>(N_);
            cf.x.push_back(f);
        }
        return cf;
    }

    std::size_t N() const { return N_; }

private:
    ModelParams p_;
    std::size_t N_;
    MergerTable table_;
    std::optional<SimplexPoint> nu_point_;
};

inline constexpr std::size_t coupon_scan_cap = 10'000'000;

struct CouponLevels {
    std::vector<std::optional<std::size_t>> first_level; // m_i for types i = 1..d+1 (index i-1)
    std::optional<std::size_t> v_k;
    std::optional<std::size_t> d_xy;
};

/// First-occurrence levels of types, the level V_k where a (k+1)-th type first appears, and D_{x,y}.
inline CouponLevels coupon_levels(const SimplexPoint& x, const std::optional<SimplexPoint>& y, const UniformStream& U,
                                  int k)
{
    const int d = x.d();
    if (k < 1 || k > d + 1)
        throw DomainError("coupon_levels needs 1 <= k <= d+1");
    CouponLevels out;
    out.first_level.assign(d + 1, std::nullopt);
    int positive = 0;
    for (int i = 1; i <= d + 1; ++i)
        positive += x.freq(i) > 0.0;
    bool need_d = y.has_value() && !(*y == x);
    if (y && y->d() != d)
        throw DomainError("coupon_levels: dimension mismatch");
    bool need_v = positive > k;
    int found = 0;
    for (std::size_t lvl = 1; found < positive || need_v || need_d; ++lvl) {
        if (lvl > coupon_scan_cap)
            throw OverflowError("coupon_levels: level not reached within the scan cap");
        double u = U(lvl);
        int t = type_of(u, x);
        if (!out.first_level[t - 1]) {
            out.first_level[t - 1] = lvl;
            ++found;
            if (need_v && found == k + 1) {
                out.v_k = lvl;
                need_v = false;
            }
        }
        if (need_d && type_of(u, *y) != t) {
            out.d_xy = lvl;
            need_d = false;
        }
    }
    return out;
}

} // namespace lwf
