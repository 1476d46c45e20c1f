#include "lwf/dual.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace lwf;

namespace {

ModelParams make(int d, LambdaSpec l, double theta = 0.0, std::vector<double> nu = {})
{
    ModelParams p;
    p.d = d;
    p.lambda = std::move(l);
    p.theta = theta;
    p.nu = nu.empty() ? std::vector<double>(d, 0.0) : nu;
    return p;
}

double rate_to(const std::vector<DualTransition>& moves, const DualState& target)
{
    double r = 0.0;
    for (auto& m : moves)
        if (m.target == target)
            r += m.rate;
    return r;
}

double outflow(const std::vector<DualTransition>& moves)
{
    double r = 0.0;
    for (auto& m : moves)
        r += m.rate;
    return r;
}

} // namespace

TEST(DualityFunction, CemeteryAndEmpty)
{
    SimplexPoint x({0.3, 0.5});
    EXPECT_EQ(duality_function(x, DualState::cemetery()), 0.0);
    EXPECT_EQ(duality_function(x, DualState::counts({0, 0})), 1.0);
    EXPECT_NEAR(duality_function(x, DualState::counts({2, 1})), 0.09 * 0.5, 1e-15);
}

TEST(DualRates, Examples)
{
    auto k1 = make(1, LambdaSpec::kingman(1.0));
    auto m = dual_rates(k1, DualState::counts({2}));
    EXPECT_EQ(rate_to(m, DualState::counts({1})), 1.0);
    EXPECT_EQ(rate_to(m, DualState::cemetery()), 0.0);

    auto k2 = make(2, LambdaSpec::kingman(1.0));
    m = dual_rates(k2, DualState::counts({1, 1}));
    EXPECT_EQ(rate_to(m, DualState::cemetery()), 1.0);
    EXPECT_EQ(outflow(m), 1.0);

    auto mut = make(1, LambdaSpec{}, 1.0, {0.6});
    m = dual_rates(mut, DualState::counts({2}));
    EXPECT_NEAR(rate_to(m, DualState::counts({1})), 1.2, 1e-15);
    EXPECT_NEAR(rate_to(m, DualState::cemetery()), 0.8, 1e-15);

    EXPECT_TRUE(dual_rates(k1, DualState::cemetery()).empty());
    EXPECT_THROW(dual_rates(k1, DualState::counts({1, 1})), DomainError);
}

TEST(DualRates, TotalOutflowMatchesGeneratorParts)
{
    LambdaSpec l = LambdaSpec::beta_measure(1.5, 0.7);
    l.kingman_mass = 0.4;
    l.atoms = {{0.6, 0.3}};
    auto p = make(3, l, 0.8, {0.2, 0.3, 0.1});
    for (auto n : {std::vector<int>{1, 0, 0}, {2, 1, 0}, {3, 2, 1}, {0, 4, 4}, {5, 1, 2}}) {
        int total = 0;
        for (int v : n)
            total += v;
        // every subset of at least two lineages merges at rate lambda_{|n|,k}
        double expected = 0.0;
        for (int k = 2; k <= total; ++k)
            expected += binom(total, k) * lambda_rate(l, total, k);
        for (int i = 0; i < 3; ++i) {
            expected += 0.4 * binom(n[i], 2) + 0.8 * n[i];
            for (int j = i + 1; j < 3; ++j)
                expected += 0.4 * n[i] * n[j];
        }
        EXPECT_NEAR(outflow(dual_rates(p, DualState::counts(n))), expected, 1e-10 * expected);
    }
}

TEST(DualRates, MutationToRemainingTypeKills)
{
    auto p = make(2, LambdaSpec{}, 2.0, {0.25, 0.35});
    auto m = dual_rates(p, DualState::counts({1, 2}));
    EXPECT_NEAR(rate_to(m, DualState::counts({0, 2})), 0.5, 1e-15);
    EXPECT_NEAR(rate_to(m, DualState::counts({1, 1})), 1.4, 1e-15);
    EXPECT_NEAR(rate_to(m, DualState::cemetery()), 2.0 * (0.75 + 2 * 0.65), 1e-14);
}

TEST(SimulateDual, AbsorbingStates)
{
    auto p = make(2, LambdaSpec::kingman(1.0), 0.5, {0.3, 0.3});
    EXPECT_EQ(simulate_dual(p, DualState::counts({0, 0}), 10.0, 1), DualState::counts({0, 0}));
    EXPECT_EQ(simulate_dual(p, DualState::cemetery(), 10.0, 1), DualState::cemetery());
}

TEST(SimulateDual, SizeNeverIncreases)
{
    LambdaSpec l = LambdaSpec::beta_measure(1.3);
    l.kingman_mass = 1.0;
    auto p = make(2, l, 0.5, {0.3, 0.3});
    for (std::uint64_t r = 0; r < 500; ++r) {
        DualState s = DualState::counts({4, 3});
        Rng rng(r);
        int last = s.size();
        for (double t = 0.05; t < 3.0 && !s.dead; t += 0.05) {
            s = simulate_dual(p, s, 0.05, rng);
            if (!s.dead) {
                ASSERT_LE(s.size(), last);
                last = s.size();
            }
        }
    }
}

TEST(SimulateDual, PairSurvivalIsExponential)
{
    auto p = make(1, LambdaSpec::kingman(1.0));
    for (double t : {0.3, 1.0, 2.0}) {
        std::int64_t still = 0;
        const int n = 100000;
        for (int r = 0; r < n; ++r)
            still += simulate_dual(p, DualState::counts({2}), t, derive_seed(1, "pair", r)) == DualState::counts({2});
        EXPECT_LE(std::abs(z_score(std::exp(-t), proportion(still, n))), 3.0) << t;
    }
}

TEST(DualMoment, TimeZeroIsExact)
{
    auto p = make(2, LambdaSpec::kingman(1.0), 0.5, {0.3, 0.3});
    auto e = dual_moment(p, SimplexPoint({0.4, 0.35}), DualState::counts({2, 1}), 0.0, 100, 1);
    EXPECT_NEAR(e.mean, 0.16 * 0.35, 1e-15);
    EXPECT_EQ(e.stderr, 0.0);
}

TEST(DualMoment, CornerHasNoKilling)
{
    LambdaSpec l = LambdaSpec::beta_measure(1.5);
    l.kingman_mass = 1.0;
    auto p = make(1, l);
    auto e = dual_moment(p, SimplexPoint({1.0}), DualState::counts({3}), 2.0, 2000, 2);
    EXPECT_EQ(e.mean, 1.0);
}

TEST(DualMoment, TwoStateValue)
{
    double exact = std::exp(-1.0) * 0.25 + (1 - std::exp(-1.0)) * 0.5;
    EXPECT_NEAR(exact, 0.4080, 1e-4);
    auto p = make(1, LambdaSpec::kingman(1.0));
    EXPECT_NEAR(oracle::dual_moment_exact(p, {0.5, 0.5}, {2}, 1.0), exact, 1e-12);
    auto e = dual_moment(p, SimplexPoint({0.5}), DualState::counts({2}), 1.0, 50000, 3);
    EXPECT_LE(std::abs(z_score(exact, e)), 3.0);
}

TEST(DualMoment, MatchesExactGeneratorExponential)
{
    LambdaSpec mix = LambdaSpec::beta_measure(1.5, 0.8);
    mix.kingman_mass = 0.6;
    struct Case {
        ModelParams p;
        std::vector<double> x;
        std::vector<int> n0;
        double t;
    };
    std::vector<Case> cases{
        {make(1, LambdaSpec::beta_measure(1.5)), {0.5}, {3}, 0.5},
        {make(2, LambdaSpec::kingman(1.0), 0.5, {0.3, 0.3}), {0.4, 0.35}, {1, 1}, 0.5},
        {make(2, mix, 0.3, {0.2, 0.5}), {0.3, 0.3}, {2, 1}, 0.8},
        {make(3, mix, 0.0), {0.2, 0.3, 0.4}, {1, 1, 1}, 0.2},
    };
    std::uint64_t seed = 10;
    for (auto& c : cases) {
        auto full = c.x;
        double s = 0;
        for (double v : c.x)
            s += v;
        full.push_back(1 - s);
        double exact = oracle::dual_moment_exact(c.p, full, c.n0, c.t);
        auto e = dual_moment(c.p, SimplexPoint(c.x), DualState::counts(c.n0), c.t, 40000, seed++);
        EXPECT_LE(std::abs(z_score(exact, e)), 4.0) << exact << " " << e.mean;
    }
}

TEST(DualMoment, IndependentOfWorkerCount)
{
    auto p = make(2, LambdaSpec::kingman(1.0), 0.5, {0.3, 0.3});
    auto a = dual_moment(p, SimplexPoint({0.4, 0.35}), DualState::counts({2, 1}), 0.5, 3000, 5, 1);
    auto b = dual_moment(p, SimplexPoint({0.4, 0.35}), DualState::counts({2, 1}), 0.5, 3000, 5, 4);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stderr, b.stderr);
}
