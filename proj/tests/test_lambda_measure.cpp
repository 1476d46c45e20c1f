#include "lwf/lambda_measure.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lwf;

namespace {

ModelParams with_lambda(LambdaSpec s, double theta = 0.0)
{
    ModelParams p;
    p.lambda = std::move(s);
    p.theta = theta;
    if (theta > 0.0)
        p.nu = {0.5};
    return p;
}

LambdaSpec mixed()
{
    LambdaSpec s = LambdaSpec::beta_measure(1.7, 0.5);
    s.kingman_mass = 1.0;
    s.atoms = {{0.2, 0.3}, {0.45, 1.5}};
    return s;
}

double rel(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace

TEST(LambdaRate, UnitIntegrandGivesPositiveMass)
{
    for (double a : {1.1, 1.5, 1.9})
        EXPECT_NEAR(lambda_rate(LambdaSpec::beta_measure(a), 2, 2), 1.0, 1e-12);
    LambdaSpec s;
    s.atoms = {{0.3, 0.25}, {0.8, 0.75}};
    EXPECT_NEAR(lambda_rate(s, 2, 2), 1.0, 1e-15);
    EXPECT_EQ(lambda_rate(LambdaSpec::kingman(3.0), 2, 2), 0.0);
}

TEST(LambdaRate, AtomAtOneOnlyHitsFullMerger)
{
    LambdaSpec s;
    s.atoms = {{1.0, 2.5}};
    EXPECT_EQ(lambda_rate(s, 5, 5), 2.5);
    for (int k = 2; k < 5; ++k)
        EXPECT_EQ(lambda_rate(s, 5, k), 0.0);
}

TEST(LambdaRate, BetaClosedFormSmallCase)
{
    double expected = std::beta(0.5, 2.5) / std::beta(0.5, 1.5);
    EXPECT_LT(rel(lambda_rate(LambdaSpec::beta_measure(1.5), 3, 2), expected), 1e-12);
    EXPECT_LT(rel(lambda_rate(LambdaSpec::beta_measure(1.5), 3, 2), oracle::lambda_nk(LambdaSpec::beta_measure(1.5), 3, 2)),
              1e-8);
}

TEST(LambdaRate, RejectsOutOfRangeK)
{
    auto s = LambdaSpec::beta_measure(1.5);
    EXPECT_THROW(lambda_rate(s, 5, 1), DomainError);
    EXPECT_THROW(lambda_rate(s, 5, 6), DomainError);
}

TEST(LambdaRate, BetaMatchesQuadratureOnGrid)
{
    const std::array<std::array<double, 3>, 20> grid{{{2, 2, 1.05}, {3, 2, 1.5},  {3, 3, 1.2},  {4, 2, 1.95},
                                                      {5, 3, 1.3},  {5, 5, 1.7},  {7, 4, 1.1},  {8, 2, 1.6},
                                                      {10, 2, 1.5}, {10, 7, 1.4}, {12, 12, 1.8}, {15, 3, 1.25},
                                                      {20, 2, 1.9}, {20, 10, 1.5}, {25, 5, 1.35}, {30, 2, 1.05},
                                                      {30, 30, 1.5}, {40, 20, 1.75}, {50, 3, 1.15}, {60, 8, 1.55}}};
    for (auto& g : grid) {
        auto s = LambdaSpec::beta_measure(g[2], 1.0);
        int n = static_cast<int>(g[0]), k = static_cast<int>(g[1]);
        EXPECT_LT(rel(lambda_rate(s, n, k), oracle::lambda_nk(s, n, k)), 1e-8) << n << " " << k << " " << g[2];
    }
}

TEST(LambdaRate, NonincreasingInN)
{
    for (auto s : {LambdaSpec::beta_measure(1.3), LambdaSpec::beta_measure(1.8), mixed()})
        for (int k = 2; k <= 20; ++k)
            for (int n = k; n < 20; ++n)
                EXPECT_LE(lambda_rate(s, n + 1, k), lambda_rate(s, n, k) * (1 + 1e-12)) << n << " " << k;
}

TEST(LambdaRate, MergerTotalsAgree)
{
    for (auto s : {LambdaSpec::beta_measure(1.4), mixed()})
        for (int n : {2, 3, 10, 40}) {
            CompensatedSum acc;
            for (int k = 2; k <= n; ++k) {
                EXPECT_LT(rel(merger_rate(s, n, k), binom(n, k) * lambda_rate(s, n, k)), 1e-12);
                acc += merger_rate(s, n, k);
            }
            EXPECT_LT(rel(multi_merger_total(s, n), acc.value()), 1e-10) << n;
        }
}

TEST(FixationJumpRate, KingmanAndMutationExamples)
{
    EXPECT_EQ(fixation_jump_rate(with_lambda(LambdaSpec::kingman(1.0)), 1, 1), 1.0);
    EXPECT_EQ(fixation_jump_rate(with_lambda(LambdaSpec::kingman(1.0), 2.0), 0, 1), 2.0);
    EXPECT_EQ(fixation_jump_rate(with_lambda(LambdaSpec::kingman(1.0)), 3, 2), 0.0);
    EXPECT_THROW(fixation_jump_rate(with_lambda(LambdaSpec::kingman(1.0)), -1, 1), DomainError);
    EXPECT_THROW(fixation_jump_rate(with_lambda(LambdaSpec::kingman(1.0)), 1, 0), DomainError);
}

TEST(TotalUpRate, BetaMatchesGammaRatio)
{
    for (double a : {1.1, 1.5, 1.9}) {
        auto p = with_lambda(LambdaSpec::beta_measure(a));
        EXPECT_NEAR(total_up_rate(p, 1), 1.0, 1e-12);
        for (int k : {1, 2, 5, 100, 100000}) {
            double expected = std::exp(std::lgamma(k + a) - std::lgamma(k) - std::lgamma(a)) / a;
            EXPECT_LT(rel(total_up_rate(p, k), expected), 1e-10) << a << " " << k;
        }
    }
}

TEST(TotalUpRate, KingmanWithMutation)
{
    auto p = with_lambda(LambdaSpec::kingman(0.7), 1.3);
    for (int n = 0; n <= 10; ++n)
        EXPECT_NEAR(total_up_rate(p, n), 0.7 * n * (n + 1) / 2 + 1.3 * (n + 1), 1e-12);
}

TEST(TotalUpRate, BetaFirstJumpIsUnitWithProbabilityHalfAlpha)
{
    for (double a : {1.2, 1.5, 1.8}) {
        auto p = with_lambda(LambdaSpec::beta_measure(a));
        EXPECT_NEAR(fixation_jump_rate(p, 1, 1) / total_up_rate(p, 1), a / 2, 1e-12);
    }
}

TEST(TotalUpRate, EqualsSumOfJumpRates)
{
    LambdaSpec atoms_only;
    atoms_only.kingman_mass = 0.5;
    atoms_only.atoms = {{0.3, 2.0}, {0.5, 1.0}};
    for (auto [spec, theta] : {std::pair{LambdaSpec::kingman(2.0), 0.7}, std::pair{atoms_only, 0.0},
                               std::pair{atoms_only, 0.4}}) {
        auto p = with_lambda(spec, theta);
        for (int n = 0; n <= 50; ++n) {
            CompensatedSum s;
            for (int l = 1; l <= 200; ++l)
                s += fixation_jump_rate(p, n, l);
            EXPECT_LT(rel(s.value(), total_up_rate(p, n)), 1e-8) << n;
        }
    }
}

TEST(TotalUpRate, BetaSumWithTelescopedTail)
{
    // tail of l -> Gamma(l+1-a)/Gamma(l+2) beyond L sums to Gamma(L+2-a)/(a Gamma(L+2))
    for (double a : {1.3, 1.7}) {
        auto p = with_lambda(LambdaSpec::beta_measure(a, 2.0));
        for (int n = 1; n <= 50; ++n) {
            CompensatedSum s;
            for (int l = 1; l <= 200; ++l)
                s += fixation_jump_rate(p, n, l);
            double per = 2.0 * std::exp(std::lgamma(n + a) - std::lgamma(n) - std::lgamma(2 - a) - std::lgamma(a));
            s += per * std::exp(std::lgamma(202 - a) - std::lgamma(202)) / a;
            EXPECT_LT(rel(s.value(), total_up_rate(p, n)), 1e-8) << n;
        }
    }
}

TEST(FixationJumpRate, MatchesMergerRateIdentity)
{
    for (auto spec : {LambdaSpec::beta_measure(1.4, 1.5), mixed()}) {
        auto p = with_lambda(spec, 0.3);
        for (int n = 1; n <= 30; n += 3)
            for (int l = 2; l <= 25; l += 2)
                EXPECT_LT(rel(fixation_jump_rate(p, n, l), binom(n + l, l + 1) * lambda_rate(spec, n + l + 1, l + 1)),
                          1e-10)
                    << n << " " << l;
    }
}

TEST(FixationJumpRate, KingmanMassOnlyFeedsUnitJumps)
{
    auto with = mixed();
    auto without = with;
    without.kingman_mass = 0.0;
    for (int n = 1; n <= 10; ++n)
        for (int l = 2; l <= 10; ++l)
            EXPECT_EQ(fixation_jump_rate(with_lambda(with), n, l), fixation_jump_rate(with_lambda(without), n, l));
}

TEST(ComesDown, Examples)
{
    EXPECT_TRUE(comes_down_from_infinity(LambdaSpec::kingman(0.1)));
    EXPECT_TRUE(comes_down_from_infinity(LambdaSpec::beta_measure(1.2)));
    LambdaSpec s;
    s.atoms = {{0.5, 1.0}};
    EXPECT_FALSE(comes_down_from_infinity(s));
    EXPECT_THROW(explosion_tail_bound(with_lambda(s), 100), UnsupportedError);
}

TEST(TailBound, KingmanExactAndBetaDominatesSum)
{
    EXPECT_NEAR(explosion_tail_bound(with_lambda(LambdaSpec::kingman(2.0)), 100), 0.01, 1e-15);
    auto p = with_lambda(LambdaSpec::beta_measure(1.5));
    for (int M : {10, 100, 1000}) {
        CompensatedSum s;
        for (std::int64_t n = M; n < 4000000; ++n)
            s += 1.0 / total_up_rate(p, n);
        EXPECT_GE(explosion_tail_bound(p, M), s.value());
        EXPECT_LT(explosion_tail_bound(p, M), s.value() + 1.5e-3);
    }
}

TEST(Validation, RejectsBadMeasures)
{
    EXPECT_THROW(LambdaSpec::beta_measure(2.0).validate(), DomainError);
    EXPECT_THROW(LambdaSpec::beta_measure(1.5, 0.0).validate(), DomainError);
    EXPECT_THROW(LambdaSpec::kingman(-1.0).validate(), DomainError);
    LambdaSpec s;
    s.atoms = {{0.0, 1.0}};
    EXPECT_THROW(s.validate(), DomainError);
    ModelParams p;
    p.lambda = LambdaSpec::kingman(1.0);
    p.theta = 1.0;
    p.nu = {1.0};
    EXPECT_THROW(p.validate(), DomainError);
    p.allow_boundary_nu = true;
    EXPECT_NO_THROW(p.validate());
}

TEST(SimplexPoint, ImpliedLastCoordinate)
{
    SimplexPoint x({0.5, 0.3});
    EXPECT_EQ(x.d(), 2);
    EXPECT_NEAR(x.freq(3), 0.2, 1e-15);
    EXPECT_THROW(SimplexPoint({0.7, 0.4}), DomainError);
    EXPECT_THROW(SimplexPoint({-0.1}), DomainError);
    EXPECT_THROW(SimplexPoint(std::vector<double>{}), DomainError);
}

TEST(ConfigBlock, RoundTrip)
{
    for (auto s : {mixed(), LambdaSpec::kingman(0.1), LambdaSpec::beta_measure(1.234567890123, 0.1)})
        EXPECT_EQ(parse_lambda_block(to_config_block(s)), s);
    auto s = parse_lambda_block("kingman = 1\nbeta = {alpha = 1.5}\natoms = [[0.5, 2]]\n");
    EXPECT_EQ(s.kingman_mass, 1.0);
    EXPECT_EQ(s.beta->alpha, 1.5);
    EXPECT_EQ(s.beta->scale, 1.0);
    EXPECT_EQ(s.atoms.size(), 1u);
    EXPECT_THROW(parse_lambda_block("gamma = 2\n"), ConfigError);
    EXPECT_THROW(parse_lambda_block("beta = {scale = 2}\n"), ConfigError);
    EXPECT_THROW(parse_lambda_block("atoms = [[0.5]]\n"), ConfigError);
    EXPECT_THROW(parse_lambda_block("beta = {alpha = 2.5}\n"), DomainError);
}
