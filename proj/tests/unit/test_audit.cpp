#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "confeval/audit.hpp"
#include "confeval/generator.hpp"
#include "fixtures.hpp"

using namespace confeval;
using fixtures::eligible;

namespace {

Dataset table1_fixture() {
    std::vector<SubmissionRecord> v;
    auto add = [&](std::size_t count, bool positive, RecruitmentSource src) {
        for (std::size_t i = 0; i < count; ++i) {
            auto r = eligible("T" + std::to_string(v.size()), positive);
            r.recruitment_source = src;
            v.push_back(std::move(r));
        }
    };
    add(13035, true, RecruitmentSource::TestAndTrace);
    add(164, true, RecruitmentSource::React);
    add(962, false, RecruitmentSource::TestAndTrace);
    add(22857, false, RecruitmentSource::React);
    return fixtures::dataset(std::move(v));
}

// Same dataset with covid_status permuted, so status is independent of all
// other fields.
Dataset permute_status(const Dataset& d, std::uint64_t seed) {
    std::vector<CovidStatus> st;
    for (const auto& r : d) st.push_back(r.covid_status);
    Rng rng(seed);
    rng.shuffle(st);
    auto recs = d.records();
    for (std::size_t i = 0; i < recs.size(); ++i) recs[i].covid_status = st[i];
    return Dataset(std::move(recs), d.feature_dim());
}

}  // namespace

TEST(CrossTab, Table1FixtureReproduced) {
    const auto t = cross_tabulate(table1_fixture(), "covid_status", "recruitment_source");
    EXPECT_EQ(t.at("Positive", "TestAndTrace"), 13035u);
    EXPECT_EQ(t.at("Positive", "React"), 164u);
    EXPECT_EQ(t.at("Negative", "TestAndTrace"), 962u);
    EXPECT_EQ(t.at("Negative", "React"), 22857u);
    EXPECT_EQ(t.total(), 37018u);
    EXPECT_EQ(t.row_labels, (std::vector<std::string>{"Positive", "Negative"}));
}

TEST(CrossTab, EmptyDatasetAllZero) {
    const auto t = cross_tabulate(Dataset{}, "gender", "covid_status");
    EXPECT_EQ(t.total(), 0u);
    EXPECT_EQ(t.row_labels.size(), 4u);
}

TEST(CrossTab, MatchesNestedLoopTally) {
    const auto d = fixtures::dataset(fixtures::random_records(50, 31));
    const auto t = cross_tabulate(d, "gender", "smoker_status");
    for (std::size_t gi = 0; gi < 4; ++gi)
        for (std::size_t si = 0; si < 4; ++si) {
            std::size_t n = 0;
            for (const auto& r : d)
                if (static_cast<std::size_t>(r.gender) == gi && static_cast<std::size_t>(*r.smoker_status) == si)
                    ++n;
            EXPECT_EQ(t.at(std::string(to_string(static_cast<Gender>(gi))),
                           std::string(to_string(static_cast<SmokerStatus>(si)))),
                      n);
        }
    const auto u = cross_tabulate(d, "local_authority", "cough_any");
    for (const auto& la : u.row_labels) {
        std::size_t yes = 0;
        for (const auto& r : d) yes += r.local_authority == la && r.has(Symptom::CoughAny);
        EXPECT_EQ(u.at(la, "true"), yes);
    }
    EXPECT_TRUE(std::is_sorted(u.row_labels.begin(), u.row_labels.end()));
}

TEST(CrossTab, UnknownVariable) {
    EXPECT_THROW(cross_tabulate(Dataset{}, "shoe_size", "covid_status"), UnknownVariable);
}

TEST(SymptomCombinations, SingleCombination) {
    std::vector<SubmissionRecord> v;
    for (int i = 0; i < 7; ++i) {
        auto r = eligible("P" + std::to_string(i), true);
        fixtures::set_symptom(r, Symptom::CoughAny);
        v.push_back(r);
    }
    v.push_back(eligible("N0"));
    const auto t = symptom_combinations(fixtures::dataset(v), CovidStatus::Positive, 1);
    ASSERT_EQ(t.entries.size(), 1u);
    EXPECT_EQ(t.entries[0].frequency, 7u);
    EXPECT_EQ(t.entries[0].mask, 1u);
    EXPECT_EQ(describe_mask(t.entries[0].mask), "cough_any");
}

TEST(SymptomCombinations, MatchesBruteForce) {
    auto recs = fixtures::random_records(30, 44);
    // Coarsen so some masks repeat.
    for (auto& r : recs)
        for (std::size_t s = 3; s < kRealSymptomCount; ++s) r.symptoms[s] = false;
    for (auto& r : recs) {
        bool any = false;
        for (std::size_t s = 0; s < kRealSymptomCount; ++s) any |= r.symptoms[s];
        r.symptoms[static_cast<std::size_t>(Symptom::NoSymptoms)] = !any;
    }
    const auto d = fixtures::dataset(recs);
    for (CovidStatus st : {CovidStatus::Positive, CovidStatus::Negative}) {
        std::map<std::uint32_t, std::size_t> freq;
        for (const auto& r : d)
            if (r.covid_status == st) ++freq[r.symptom_mask()];
        std::vector<SymptomCombo> expect;
        for (const auto& [m, f] : freq)
            if (f >= 2) expect.push_back({m, f});
        std::stable_sort(expect.begin(), expect.end(),
                         [](const auto& a, const auto& b) { return a.frequency > b.frequency; });
        const auto t = symptom_combinations(d, st, 2);
        ASSERT_EQ(t.entries.size(), expect.size());
        for (std::size_t k = 0; k < expect.size(); ++k) {
            EXPECT_EQ(t.entries[k].mask, expect[k].mask);
            EXPECT_EQ(t.entries[k].frequency, expect[k].frequency);
        }
        std::size_t all = 0, total = 0;
        for (const auto& e : symptom_combinations(d, st, 1).entries) all += e.frequency;
        for (const auto& r : d) total += r.covid_status == st;
        EXPECT_EQ(all, total);
    }
}

TEST(SymptomCombinations, NegativesDominatedByNoSymptoms) {
    const auto d = generate_dataset(default_paper_mimic_config(17));
    const auto t = symptom_combinations(d, CovidStatus::Negative, kNegativeComboCutoff);
    ASSERT_FALSE(t.entries.empty());
    EXPECT_EQ(t.entries[0].mask, 1u << static_cast<unsigned>(Symptom::NoSymptoms));
    for (const auto& e : t.entries) EXPECT_GE(e.frequency, kNegativeComboCutoff);
}

TEST(Breakdown, SingleRecord) {
    const auto b = distribution_breakdown(fixtures::dataset({eligible("A", true)}), "gender");
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < b.labels.size(); ++k) nonzero += (b.positive[k] + b.negative[k]) > 0;
    EXPECT_EQ(nonzero, 1u);
    for (bool m : b.masked) EXPECT_TRUE(m);
}

TEST(Breakdown, DisclosureMaskBelowFive) {
    std::vector<SubmissionRecord> v;
    for (int i = 0; i < 5; ++i) v.push_back(eligible("F" + std::to_string(i)));
    auto m = eligible("M");
    m.gender = Gender::Male;
    v.push_back(m);
    const auto b = distribution_breakdown(fixtures::dataset(v), "gender");
    for (std::size_t k = 0; k < b.labels.size(); ++k) {
        if (b.labels[k] == "Female") { EXPECT_FALSE(b.masked[k]); }
        if (b.labels[k] == "Male") { EXPECT_TRUE(b.masked[k]); }
    }
}

TEST(Breakdown, SmokingNotAssociatedOnPaperMimic) {
    const auto d = generate_dataset(default_paper_mimic_config(19));
    const auto b = distribution_breakdown(d, "smoker_status");
    const auto k = std::find(b.labels.begin(), b.labels.end(), "Current") - b.labels.begin();
    double np = 0, nn = 0;
    for (std::size_t j = 0; j < b.labels.size(); ++j) np += b.positive[j], nn += b.negative[j];
    EXPECT_LT(std::abs(b.positive[k] / np - b.negative[k] / nn), 0.03);
}

TEST(TimeSeries, OneWeekSingleBin) {
    std::vector<SubmissionRecord> v;
    for (int i = 0; i < 7; ++i) {
        auto r = eligible("D" + std::to_string(i), i % 2 == 0);
        r.submission_date = fixtures::day(i);
        r.test_date = r.submission_date;
        v.push_back(r);
    }
    const auto ts = submissions_over_time(fixtures::dataset(v), TimeBin::Week);
    ASSERT_EQ(ts.bin_start.size(), 1u);
    EXPECT_EQ(ts.test_and_trace[0], 4u);
    EXPECT_EQ(ts.react[0], 3u);
}

TEST(TimeSeries, ReactRoundsGiveThreePeaks) {
    std::vector<SubmissionRecord> v;
    int id = 0;
    for (int start : {0, 40, 80})
        for (int d = 0; d < 10; ++d)
            for (int k = 0; k < 1 + std::min(d, 9 - d); ++k) {
                auto r = eligible("R" + std::to_string(id++));
                r.recruitment_source = RecruitmentSource::React;
                r.submission_date = r.test_date = fixtures::day(start + d);
                v.push_back(r);
            }
    const auto ts = submissions_over_time(fixtures::dataset(v), TimeBin::Day);
    std::size_t peaks = 0;
    for (std::size_t i = 0; i < ts.react.size(); ++i) {
        const auto left = i == 0 ? 0 : ts.react[i - 1];
        const auto right = i + 1 == ts.react.size() ? 0 : ts.react[i + 1];
        if (ts.react[i] > left && ts.react[i] >= right) ++peaks;
    }
    EXPECT_EQ(peaks, 3u);
    EXPECT_EQ(ts.react.size(), 90u);  // empty days kept
}

TEST(TimeSeries, EmptyDataset) {
    EXPECT_TRUE(submissions_over_time(Dataset{}, TimeBin::Day).bin_start.empty());
}

TEST(AuditReport, PaperMimicFlags) {
    const auto r = build_audit_report(generate_dataset(default_paper_mimic_config(23)));
    auto flagged = [&](const std::string& v) { return r.find(v)->flagged; };
    for (const char* v : {"recruitment_source", "no_symptoms", "cough_any", "age"})
        EXPECT_TRUE(flagged(v)) << v;
    for (const char* v : {"gender", "smoker_status", "height", "weight"}) EXPECT_FALSE(flagged(v)) << v;
    EXPECT_GT(r.find("recruitment_source")->statistic, 0.8);
}

TEST(AuditReport, IndependentStatusFlagsNothing) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto d = permute_status(generate_dataset(default_paper_mimic_config(seed)), seed);
        EXPECT_TRUE(build_audit_report(d).flagged.empty()) << "seed " << seed;
    }
}

TEST(AuditReport, HandComputedStatistics) {
    std::vector<SubmissionRecord> v;
    for (int i = 0; i < 20; ++i) {
        auto r = eligible("P" + std::to_string(i), true);
        r.gender = i < 15 ? Gender::Female : Gender::Male;
        r.age = i < 10 ? 30 : 50;
        v.push_back(r);
    }
    for (int i = 0; i < 20; ++i) {
        auto r = eligible("N" + std::to_string(i), false);
        r.gender = i < 8 ? Gender::Female : Gender::Male;
        r.age = i < 10 ? 40 : 60;
        v.push_back(r);
    }
    const auto d = fixtures::dataset(v);
    // Female: 0.75 vs 0.40; Male: 0.25 vs 0.60.
    EXPECT_NEAR(association_statistic(d, "gender"), 0.35, 1e-12);
    // Means 40 vs 50, both population variances 100.
    EXPECT_NEAR(association_statistic(d, "age"), 1.0, 1e-12);
    // Every record is React-recruited except the positives (TestAndTrace).
    EXPECT_NEAR(association_statistic(d, "recruitment_source"), 1.0, 1e-12);
}

TEST(AuditReport, InvariantToOrderAndDuplication) {
    const auto d = fixtures::dataset(fixtures::random_records(80, 5));
    auto recs = d.records();
    std::reverse(recs.begin(), recs.end());
    auto dup = d.records();
    for (const auto& r : d) {
        auto c = r;
        c.id += "x";
        dup.push_back(c);
    }
    const Dataset rev(recs, 2), twice(dup, 2);
    for (const auto& var : default_audit_covariates()) {
        EXPECT_NEAR(association_statistic(rev, var), association_statistic(d, var), 1e-12) << var;
        EXPECT_NEAR(association_statistic(twice, var), association_statistic(d, var), 1e-12) << var;
    }
}

TEST(AuditReport, JsonAndMarkdown) {
    const auto r = build_audit_report(fixtures::dataset(fixtures::random_records(60, 8)));
    const auto j = to_json(r);
    EXPECT_EQ(j.at("threshold"), kDefaultAuditThreshold);
    EXPECT_FALSE(render_markdown(r).empty());
}
