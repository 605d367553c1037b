#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>

#include "confeval/matcher.hpp"
#include "fixtures.hpp"
#include "oracles/matching.hpp"

using namespace confeval;

TEST(StratumKey, AgeBinBoundaries) {
    auto a = fixtures::eligible("a"), b = fixtures::eligible("b"), c = fixtures::eligible("c");
    a.age = 30;
    b.age = 39;
    c.age = 40;
    EXPECT_EQ(stratum_key(a), stratum_key(b));
    EXPECT_NE(stratum_key(b), stratum_key(c));
    EXPECT_EQ(stratum_key(c).age_bin, 4);
}

TEST(StratumKey, FatigueOnlyCountsAsSymptomatic) {
    auto r = fixtures::eligible("f");
    fixtures::set_symptom(r, Symptom::Fatigue);
    const auto k = stratum_key(r);
    EXPECT_TRUE(k.at_least_one_symptom);
    EXPECT_FALSE(k.cough_any || k.sore_throat || k.shortness_of_breath || k.runny_blocked_nose);
    EXPECT_NE(k, stratum_key(fixtures::eligible("g")));
}

TEST(StratumKey, IgnoresNonMatchingFields) {
    auto a = fixtures::eligible("a"), b = fixtures::eligible("b");
    b.ethnicity = "Irish";
    b.local_authority = "York";
    b.smoker_status = SmokerStatus::Current;
    b.audio_features = std::vector<double>{5.0, -5.0};
    EXPECT_EQ(stratum_key(a), stratum_key(b));
}

TEST(StratumKey, AgreesWithPairwiseOracle) {
    const auto v = fixtures::random_records(100, 21);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            ASSERT_EQ(stratum_key(v[i]) == stratum_key(v[j]), oracle::same_stratum(v[i], v[j])) << i << "," << j;
}

TEST(Matcher, SingleStratumTakesMinimum) {
    std::vector<SubmissionRecord> v;
    for (int i = 0; i < 3; ++i) {
        auto r = fixtures::eligible("P" + std::to_string(i), true);
        r.recruitment_source = RecruitmentSource::React;
        v.push_back(r);
    }
    for (int i = 0; i < 2; ++i) v.push_back(fixtures::eligible("N" + std::to_string(i), false));
    const auto m = build_matched_set(fixtures::dataset(v), 1);
    EXPECT_EQ(m.n_positive, 2u);
    EXPECT_EQ(m.n_negative, 2u);
    EXPECT_EQ(m.indices.size(), 4u);
    EXPECT_TRUE(std::find(m.ids.begin(), m.ids.end(), "N0") != m.ids.end());
    EXPECT_TRUE(std::find(m.ids.begin(), m.ids.end(), "N1") != m.ids.end());
}

TEST(Matcher, ExactOnRandomPopulations) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto d = fixtures::dataset(fixtures::random_records(400, seed));
        const auto m = build_matched_set(d, seed);
        EXPECT_EQ(oracle::check_exact_matching(d, m.indices), "") << "seed " << seed;
        EXPECT_EQ(m.n_positive, m.n_negative);
    }
}

TEST(Matcher, FourStrataHandCounts) {
    // Strata: (React, 20s) 5+/3-, (React, 50s) 2+/6-, (TT, 20s) 4+/0-, (TT, 50s) 3+/3-.
    struct Cell {
        RecruitmentSource src;
        int age;
        int pos, neg;
    };
    const Cell cells[] = {{RecruitmentSource::React, 25, 5, 3},
                          {RecruitmentSource::React, 55, 2, 6},
                          {RecruitmentSource::TestAndTrace, 25, 4, 0},
                          {RecruitmentSource::TestAndTrace, 55, 3, 3}};
    std::vector<SubmissionRecord> v;
    int id = 0;
    for (const auto& c : cells)
        for (int k = 0; k < c.pos + c.neg; ++k) {
            auto r = fixtures::eligible("H" + std::to_string(id++), k < c.pos);
            r.recruitment_source = c.src;
            r.age = c.age + k % 3;
            v.push_back(r);
        }
    const auto d = fixtures::dataset(v);
    const auto m = build_matched_set(d, 9);
    EXPECT_EQ(m.n_positive, 3u + 2u + 0u + 3u);
    EXPECT_EQ(m.n_negative, 8u);
    EXPECT_EQ(oracle::check_exact_matching(d, m.indices), "");

    // The sorted multiset of keys is the same on both sides.
    std::vector<StratumKey> kp, kn;
    for (std::size_t i : m.indices) (d[i].positive() ? kp : kn).push_back(stratum_key(d[i]));
    std::sort(kp.begin(), kp.end());
    std::sort(kn.begin(), kn.end());
    EXPECT_EQ(kp, kn);
}

TEST(Matcher, NoOverlapGivesEmptySetAndWarning) {
    std::vector<SubmissionRecord> v;
    for (int i = 0; i < 4; ++i) {
        auto r = fixtures::eligible("E" + std::to_string(i), i % 2 == 0);
        if (r.positive()) r.age = 70;
        v.push_back(r);
    }
    const auto m = build_matched_set(fixtures::dataset(v), 1);
    EXPECT_TRUE(m.indices.empty());
    EXPECT_FALSE(m.warnings.empty());
}

TEST(Matcher, DeterministicAndSeedDependent) {
    const auto d = fixtures::dataset(fixtures::random_records(600, 4));
    EXPECT_EQ(build_matched_set(d, 3).indices, build_matched_set(d, 3).indices);
    EXPECT_NE(build_matched_set(d, 3).indices, build_matched_set(d, 4).indices);
}

TEST(Matcher, IndependentOfRecordOrder) {
    auto v = fixtures::random_records(300, 8);
    const auto a = build_matched_set(fixtures::dataset(v), 2);
    std::reverse(v.begin(), v.end());
    const auto rd = fixtures::dataset(v);
    const auto b = build_matched_set(rd, 2);
    EXPECT_EQ(a.n_positive, b.n_positive);
    EXPECT_EQ(oracle::check_exact_matching(rd, b.indices), "");
}

TEST(Matcher, ResultIsSubsetWithSortedIndices) {
    const auto d = fixtures::dataset(fixtures::random_records(250, 6));
    const auto m = build_matched_set(d, 6);
    EXPECT_TRUE(std::is_sorted(m.indices.begin(), m.indices.end()));
    EXPECT_EQ(std::adjacent_find(m.indices.begin(), m.indices.end()), m.indices.end());
    for (std::size_t k = 0; k < m.indices.size(); ++k) EXPECT_EQ(d[m.indices[k]].id, m.ids[k]);
}

TEST(Matcher, CsvRoundTrip) {
    const auto d = fixtures::dataset(fixtures::random_records(200, 5));
    const auto m = build_matched_set(d, 5);
    const auto path = std::filesystem::temp_directory_path() / "confeval_matched_roundtrip.csv";
    write_matched_csv(path, m);
    const auto back = read_matched_csv(path, d);
    EXPECT_EQ(back.indices, m.indices);
    EXPECT_EQ(back.n_positive, m.n_positive);
    std::filesystem::remove(path);
}

TEST(Matcher, BalanceJsonCounts) {
    const auto d = fixtures::dataset(fixtures::random_records(200, 2));
    const auto m = build_matched_set(d, 2);
    const auto j = balance_json(m);
    EXPECT_EQ(j["positives"].get<std::size_t>(), m.n_positive);
    std::size_t total = 0;
    for (const auto& s : j["strata"]) total += s["selected_positive"].get<std::size_t>();
    EXPECT_EQ(total, m.n_positive);
}
