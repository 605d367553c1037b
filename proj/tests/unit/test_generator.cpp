#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "confeval/audit.hpp"
#include "confeval/classifiers.hpp"
#include "confeval/dataset_io.hpp"
#include "confeval/eligibility.hpp"
#include "confeval/evaluation.hpp"
#include "confeval/generator.hpp"
#include "confeval/split.hpp"

using namespace confeval;

namespace {

std::string csv(const Dataset& d) {
    std::ostringstream os;
    write_dataset(os, d);
    return os.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(Generator, DeterministicPerSeed) {
    auto cfg = default_paper_mimic_config(3);
    cfg.n = 2000;
    EXPECT_EQ(csv(generate_dataset(cfg)), csv(generate_dataset(cfg)));
    auto other = default_paper_mimic_config(4);
    other.n = 2000;
    EXPECT_NE(csv(generate_dataset(cfg)), csv(generate_dataset(other)));
}

TEST(Generator, ExactSizeAndAllEligible) {
    auto cfg = default_paper_mimic_config(5);
    cfg.n = 3000;
    const auto d = generate_dataset(cfg);
    EXPECT_EQ(d.size(), 3000u);
    EXPECT_EQ(d.feature_dim(), cfg.feature_dim);
    EXPECT_EQ(apply_eligibility_filter(d).report.surviving, 3000u);
}

TEST(Generator, InvalidConfigReportsEveryField) {
    auto cfg = default_paper_mimic_config(1);
    cfg.prevalence = 1.5;
    cfg.noise_scale = 0.0;
    cfg.n = 0;
    const auto problems = validate(cfg);
    EXPECT_GE(problems.size(), 3u);
    try {
        generate_dataset(cfg);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.problems(), problems);
    }
}

TEST(Generator, JsonOverlayRejectsUnknownKeys) {
    const auto base = default_paper_mimic_config(1);
    const auto cfg = apply_json(base, {{"n", 500}, {"signal_strength", 2.0}});
    EXPECT_EQ(cfg.n, 500u);
    EXPECT_EQ(cfg.signal_strength, 2.0);
    EXPECT_THROW(apply_json(base, {{"no_such_field", 1}}), std::exception);
    const auto round = apply_json(GeneratorConfig{}, to_json(base));
    EXPECT_EQ(to_json(round), to_json(base));
}

TEST(Generator, PrevalenceWithinThreeSigma) {
    auto cfg = default_paper_mimic_config(8);
    const auto d = generate_dataset(cfg);
    const double p = cfg.prevalence;
    const double phat = static_cast<double>(d.count_positive()) / static_cast<double>(d.size());
    EXPECT_LE(std::abs(phat - p), 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(d.size())));
}

TEST(Generator, PaperMimicMarginals) {
    const auto d = generate_dataset(default_paper_mimic_config(11));
    ASSERT_EQ(d.size(), 37018u);
    const auto t = cross_tabulate(d, "covid_status", "recruitment_source");
    const double n = 37018.0;
    EXPECT_NEAR(t.at("Positive", "TestAndTrace") / n, 13035 / n, 0.02);
    EXPECT_NEAR(t.at("Positive", "React") / n, 164 / n, 0.02);
    EXPECT_NEAR(t.at("Negative", "TestAndTrace") / n, 962 / n, 0.02);
    EXPECT_NEAR(t.at("Negative", "React") / n, 22857 / n, 0.02);

    std::size_t pos = 0, asym = 0;
    std::vector<double> pa, na;
    for (const auto& r : d) {
        (r.positive() ? pa : na).push_back(r.age);
        if (r.positive()) {
            ++pos;
            asym += r.has(Symptom::NoSymptoms);
        }
    }
    EXPECT_NEAR(static_cast<double>(asym) / pos, 446.0 / 13199.0, 0.005);
    EXPECT_NEAR(median(na) - median(pa), 12.0, 2.0);
}

TEST(Generator, NoSignalPathGivesChanceAuc) {
    auto cfg = default_paper_mimic_config(2);
    cfg.n = 8000;
    std::fill(cfg.confound_weights.begin(), cfg.confound_weights.end(), 0.0);
    cfg.signal_strength = 0.0;
    const auto d = generate_dataset(cfg);
    const auto split = build_random_split(d, 0.3, 1);
    const auto train = d.subset(split.train_indices());
    const auto test = d.subset(split.test_indices());
    const auto m = train_model(train, ModelKind::Logistic, FeatureMode::AudioOnly, {}, 1);
    std::vector<std::uint8_t> y;
    for (const auto& r : test) y.push_back(r.positive());
    const double auc = roc_auc(predict_scores(m, test), y);
    EXPECT_GT(auc, 0.45);
    EXPECT_LT(auc, 0.55);
}

// With no direct signal, features depend on status only through the
// confounders, so within a fixed confounder stratum the class means agree.
TEST(Generator, ConfoundedFeaturesBalancedWithinStrata) {
    auto cfg = default_paper_mimic_config(13);
    cfg.n = 100000;
    cfg.prevalence = 0.5;
    cfg.p_tt_given_negative = 0.5;
    cfg.p_tt_given_positive = 0.5;
    const auto d = generate_dataset(cfg);
    std::map<std::tuple<std::uint32_t, int, int>, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < d.size(); ++i)
        strata[{d[i].symptom_mask(), d[i].age, static_cast<int>(d[i].recruitment_source)}].push_back(i);

    std::size_t tests = 0, exceed = 0;
    for (const auto& [key, members] : strata) {
        if (members.size() < 500) continue;
        for (std::size_t j = 0; j < d.feature_dim(); ++j) {
            double sp = 0, sn = 0, qp = 0, qn = 0;
            std::size_t np = 0, nn = 0;
            for (auto i : members) {
                const double x = (*d[i].audio_features)[j];
                if (d[i].positive()) sp += x, qp += x * x, ++np;
                else sn += x, qn += x * x, ++nn;
            }
            if (np < 30 || nn < 30) continue;
            const double mp = sp / np, mn = sn / nn;
            const double vp = qp / np - mp * mp, vn = qn / nn - mn * mn;
            const double se = std::sqrt(vp / np + vn / nn);
            ++tests;
            if (std::abs(mp - mn) > 3 * se) ++exceed;
        }
    }
    ASSERT_GT(tests, 30u);
    // About 0.27% of tests exceed 3 SE under the null.
    EXPECT_LE(static_cast<double>(exceed) / tests, 0.02);
}

TEST(Generator, SignalDirectionIsUnitNorm) {
    const auto cfg = default_paper_mimic_config(1);
    const auto v = signal_direction(cfg);
    ASSERT_EQ(v.size(), cfg.feature_dim);
    double s = 0;
    for (double x : v) s += x * x;
    EXPECT_NEAR(s, 1.0, 1e-12);
}
