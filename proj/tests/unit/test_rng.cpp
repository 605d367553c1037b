#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "confeval/rng.hpp"

using namespace confeval;

TEST(Rng, EngineMatchesStandardSequence) {
    // The standard fixes the 10000th output of a default-seeded mt19937_64.
    Rng rng(5489u);
    std::uint64_t v = 0;
    for (int i = 0; i < 10000; ++i) v = rng.next_u64();
    EXPECT_EQ(v, 9981545732273789042ull);
}

TEST(Rng, SameSeedSameDraws) {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.uniform_index(1000), b.uniform_index(1000));
        EXPECT_EQ(a.normal(), b.normal());
    }
}

TEST(Rng, UniformIndexStaysInRange) {
    Rng rng(1);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto k = rng.uniform_index(7);
        ASSERT_LT(k, 7u);
        ++hits[k];
    }
    for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

TEST(Rng, NormalMoments) {
    Rng rng(3);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, CategoricalFollowsWeights) {
    Rng rng(4);
    const std::vector<double> w = {1.0, 0.0, 3.0};
    std::vector<int> hits(3, 0);
    for (int i = 0; i < 40000; ++i) ++hits[rng.categorical(w)];
    EXPECT_EQ(hits[1], 0);
    EXPECT_NEAR(hits[2] / 40000.0, 0.75, 0.01);
}

TEST(Rng, SampleIsWithoutReplacementAndClamped) {
    Rng rng(5);
    std::vector<int> pool(50);
    for (int i = 0; i < 50; ++i) pool[i] = i;
    const auto s = rng.sample(pool, 20);
    EXPECT_EQ(s.size(), 20u);
    EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), 20u);
    EXPECT_EQ(rng.sample(pool, 80).size(), 50u);
}

TEST(Rng, ShuffleIsPermutation) {
    Rng rng(6);
    std::vector<int> v(100);
    for (int i = 0; i < 100; ++i) v[i] = i;
    auto w = v;
    rng.shuffle(w);
    EXPECT_NE(v, w);
    std::sort(w.begin(), w.end());
    EXPECT_EQ(v, w);
}

TEST(Rng, DerivedSeedsDependOnName) {
    EXPECT_EQ(derive_seed(1, "split"), derive_seed(1, "split"));
    EXPECT_NE(derive_seed(1, "split"), derive_seed(1, "match"));
    EXPECT_NE(derive_seed(1, "split"), derive_seed(2, "split"));
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}
