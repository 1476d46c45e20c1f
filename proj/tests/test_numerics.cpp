#include "lwf/kv.hpp"
#include "lwf/numerics.hpp"
#include "lwf/random.hpp"
#include "lwf/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace lwf;

TEST(Quadrature, EndpointSingularity)
{
    QuadratureConfig cfg;
    cfg.rel_tol = 1e-10;
    auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, cfg);
    EXPECT_NEAR(r.value, 2.0, 1e-8);
    EXPECT_NEAR(integrate([](double x) { return std::log(x); }, 0.0, 1.0, cfg).value, -1.0, 1e-8);
    auto loose = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
    EXPECT_NEAR(loose.value, 2.0, 1e-8 * 2.0 * 2.0);
}

TEST(Quadrature, DivergentIntegralThrows)
{
    QuadratureConfig cfg;
    cfg.max_subdivisions = 200;
    EXPECT_THROW(integrate([](double x) { return 1.0 / x; }, 0.0, 1.0, cfg), NumericError);
}

TEST(Quadrature, EmptyInterval)
{
    EXPECT_EQ(integrate([](double) { return 1.0; }, 1.0, 1.0).value, 0.0);
}

TEST(CompensatedSum, RecoversCancelledTerm)
{
    CompensatedSum s;
    s += 1e16;
    s += 1.0;
    s += -1e16;
    EXPECT_EQ(s.value(), 1.0);
    EXPECT_DOUBLE_EQ(s.magnitude(), 2e16 + 1.0);
}

TEST(Binomial, SmallAndLarge)
{
    EXPECT_EQ(binom(5, 2), 10.0);
    EXPECT_EQ(binom(5, 0), 1.0);
    EXPECT_EQ(binom(3, 4), 0.0);
    EXPECT_EQ(binom(3, -1), 0.0);
    EXPECT_EQ(binom(52, 5), 2598960.0);
    EXPECT_NEAR(binom(100, 50) / 1.0089134454556419e29, 1.0, 1e-12);
}

TEST(Subsets, EnumeratesAllOfGivenSize)
{
    std::set<std::vector<int>> seen;
    for_each_subset(5, 2, [&](const std::vector<int>& s) { seen.insert(s); });
    EXPECT_EQ(seen.size(), 10u);
    int count = 0;
    for_each_subset(4, 0, [&](const std::vector<int>&) { ++count; });
    EXPECT_EQ(count, 1);
}

TEST(Seeds, DerivedStreamsAreDeterministicAndDistinct)
{
    EXPECT_EQ(derive_seed(1, "a", 3), derive_seed(1, "a", 3));
    EXPECT_NE(derive_seed(1, "a", 3), derive_seed(1, "a", 4));
    EXPECT_NE(derive_seed(1, "a", 3), derive_seed(1, "b", 3));
    EXPECT_NE(derive_seed(1, "a", 3), derive_seed(2, "a", 3));
}

TEST(UniformStream, RandomAccessAndTailResampling)
{
    UniformStream U(42);
    double u5 = U(5);
    EXPECT_EQ(U(5), u5);
    auto V = U.with_resampled_tail(10, 7);
    for (std::size_t j = 1; j <= 10; ++j)
        EXPECT_EQ(V(j), U(j));
    int differ = 0;
    for (std::size_t j = 11; j <= 30; ++j)
        differ += V(j) != U(j);
    EXPECT_EQ(differ, 20);
    double sum = 0;
    for (std::size_t j = 1; j <= 100000; ++j) {
        double u = U(j);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(RandomDraws, GeometricAndBetaMeans)
{
    Rng rng(3);
    double g = 0, b = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        g += static_cast<double>(geometric_trials(rng, 0.25));
        b += sample_beta(rng, 0.5, 1.5);
    }
    EXPECT_NEAR(g / n, 4.0, 0.05);
    EXPECT_NEAR(b / n, 0.25, 0.003);
    EXPECT_EQ(geometric_trials(rng, 1.0), 1u);
}

TEST(RandomDraws, DistinctSortedMarks)
{
    Rng rng(9);
    for (std::size_t m : {2u, 5u, 40u, 100u}) {
        auto v = sample_distinct(rng, 100, m);
        ASSERT_EQ(v.size(), m);
        EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
        EXPECT_EQ(std::set<std::size_t>(v.begin(), v.end()).size(), m);
        EXPECT_LT(v.back(), 100u);
    }
}

TEST(RandomDraws, DistinctMarksAreUniform)
{
    Rng rng(11);
    std::vector<int> hits(10, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        for (auto j : sample_distinct(rng, 10, 2))
            ++hits[j];
    for (int h : hits)
        EXPECT_NEAR(h / double(n), 0.2, 0.006);
}

TEST(Estimate, FromSamples)
{
    auto e = Estimate::from_samples({1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    EXPECT_NEAR(e.stderr, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(e.n, 4);
    EXPECT_EQ(z_score(2.5, e), 0.0);
    EXPECT_EQ(z_score(1.0, Estimate::from_samples({1.0, 1.0})), 0.0);
    EXPECT_TRUE(std::isinf(z_score(0.0, Estimate::from_samples({1.0, 1.0}))));
}

TEST(ParallelMap, OrderedAndPropagatesErrors)
{
    auto v = parallel_map<int>(1000, 4, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < v.size(); ++i)
        ASSERT_EQ(v[i], static_cast<int>(i * i));
    EXPECT_THROW(parallel_map<int>(100, 3,
                                   [](std::size_t i) -> int {
                                       if (i == 50)
                                           throw DomainError("x");
                                       return 0;
                                   }),
                 DomainError);
}

TEST(KsTest, SameAndShiftedDistributions)
{
    Rng rng(5);
    std::vector<double> a, b, c;
    for (int i = 0; i < 5000; ++i) {
        a.push_back(uniform01(rng));
        b.push_back(uniform01(rng));
        c.push_back(uniform01(rng) + 0.1);
    }
    EXPECT_GT(ks_two_sample(a, b).p_value, 1e-3);
    EXPECT_LT(ks_two_sample(a, c).p_value, 1e-10);
    EXPECT_LT(ks_two_sample(a, c, true).p_value, 1e-10);
    EXPECT_GT(ks_two_sample(c, a, true).p_value, 0.5);
}

TEST(KeyValue, ParsesSectionsAndValues)
{
    auto doc = ConfigDocument::parse("top = 1\n[s]\n# note\na = [1, 2.5]  # trailing\nb = word\nc = {alpha = 1.5}\n");
    EXPECT_EQ(doc.at("top").as_number("top"), 1.0);
    EXPECT_EQ(doc.at("s.a").as_numbers("a"), (std::vector<double>{1, 2.5}));
    EXPECT_EQ(doc.at("s.b").as_word("b"), "word");
    EXPECT_EQ(doc.at("s.c").kind, ConfigValue::Kind::table);
    EXPECT_THROW(ConfigDocument::parse("a = 1\na = 2\n"), ConfigError);
    EXPECT_THROW(ConfigDocument::parse("novalue\n"), ConfigError);
    EXPECT_THROW(doc.at("missing"), ConfigError);
}

TEST(KeyValue, NumbersRoundTripExactly)
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23})
        EXPECT_EQ(parse_value(format_double(v)).as_number("v"), v);
}
