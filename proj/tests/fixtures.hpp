#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "confeval/record.hpp"
#include "confeval/rng.hpp"
#include "confeval/split.hpp"

namespace fixtures {

using namespace confeval;

inline Date day(int offset) { return Date{std::chrono::days{18600 + offset}}; }

// An eligible record with a 2-dimensional feature vector.
inline SubmissionRecord eligible(std::string id, bool positive = false) {
    SubmissionRecord r;
    r.id = std::move(id);
    r.age = 40;
    r.gender = Gender::Female;
    r.ethnicity = "White British";
    r.first_language = "English";
    r.local_authority = "Leeds";
    r.recruitment_source = positive ? RecruitmentSource::TestAndTrace : RecruitmentSource::React;
    r.covid_status = positive ? CovidStatus::Positive : CovidStatus::Negative;
    r.symptoms[static_cast<std::size_t>(Symptom::NoSymptoms)] = true;
    r.respiratory[static_cast<std::size_t>(RespCondition::NoneResp)] = true;
    r.smoker_status = SmokerStatus::Never;
    r.height_bin = 2;
    r.weight_bin = 3;
    r.viral_load = ViralLoad::Unrecorded;
    r.test_date = day(0);
    r.submission_date = day(2);
    r.audio_features = std::vector<double>{0.0, 0.0};
    return r;
}

inline void set_symptom(SubmissionRecord& r, Symptom s, bool on = true) {
    r.symptoms[static_cast<std::size_t>(s)] = on;
    if (on && s != Symptom::NoSymptoms) r.symptoms[static_cast<std::size_t>(Symptom::NoSymptoms)] = false;
}

inline Dataset dataset(std::vector<SubmissionRecord> records, std::size_t dim = 2) {
    return Dataset(std::move(records), dim, "fixture");
}

// Records with every field drawn at random (all eligible).
inline std::vector<SubmissionRecord> random_records(std::size_t n, std::uint64_t seed, std::size_t dim = 2) {
    Rng rng(seed);
    static const std::vector<std::string> kEth = {"White British", "Indian", "Pakistani", "Irish", "Chinese"};
    static const std::vector<std::string> kLang = {"English", "Welsh", "Polish", "Urdu"};
    static const std::vector<std::string> kLa = {"Leeds", "Cornwall", "Sheffield", "Birmingham", "York"};
    std::vector<SubmissionRecord> v;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = eligible("R" + std::to_string(i), rng.bernoulli(0.4));
        r.age = 18 + static_cast<int>(rng.uniform_index(60));
        r.gender = static_cast<Gender>(rng.uniform_index(4));
        r.ethnicity = kEth[rng.uniform_index(kEth.size())];
        r.first_language = kLang[rng.uniform_index(kLang.size())];
        r.local_authority = kLa[rng.uniform_index(kLa.size())];
        r.recruitment_source = rng.bernoulli(0.5) ? RecruitmentSource::TestAndTrace : RecruitmentSource::React;
        r.symptoms = {};
        bool any = false;
        for (std::size_t s = 0; s < kRealSymptomCount; ++s)
            if (rng.bernoulli(0.2)) r.symptoms[s] = any = true;
        if (!any) r.symptoms[static_cast<std::size_t>(Symptom::NoSymptoms)] = true;
        r.respiratory = {};
        r.respiratory[rng.uniform_index(kRespCount)] = true;
        r.smoker_status = static_cast<SmokerStatus>(rng.uniform_index(4));
        r.height_bin = rng.uniform_index(height_bins().size());
        r.weight_bin = rng.uniform_index(weight_bins().size());
        if (r.positive()) r.viral_load = static_cast<ViralLoad>(rng.uniform_index(4));
        std::vector<double> f(dim);
        for (auto& x : f) x = rng.normal();
        r.audio_features = f;
        v.push_back(std::move(r));
    }
    return v;
}

// 200 records with small minority groups so that steps a-k stay well below
// the 30% target.
inline Dataset split_population(std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::string> langs = {"Welsh", "Polish", "Urdu", "Tamil"};
    const std::vector<std::string> eths = {"Indian", "Irish", "Chinese", "Caribbean"};
    std::vector<SubmissionRecord> v;
    for (int i = 0; i < 200; ++i) {
        const bool pos = rng.bernoulli(0.4);
        auto r = eligible("S" + std::to_string(1000 + i), pos);
        r.age = 18 + static_cast<int>(rng.uniform_index(60));
        r.gender = rng.bernoulli(0.5) ? Gender::Female : Gender::Male;
        if (rng.bernoulli(0.03)) r.first_language = langs[rng.uniform_index(langs.size())];
        if (rng.bernoulli(0.03)) r.ethnicity = eths[rng.uniform_index(eths.size())];
        r.local_authority = "LA" + std::to_string(rng.uniform_index(20));
        // Mostly channel-concordant: positives via TT, negatives via React.
        if (rng.bernoulli(0.03))
            r.recruitment_source = pos ? RecruitmentSource::React : RecruitmentSource::TestAndTrace;
        if (!pos || !rng.bernoulli(0.05)) set_symptom(r, Symptom::CoughAny);
        if (pos) {
            const double u = rng.uniform01();
            r.viral_load = u < 0.2   ? ViralLoad::High
                           : u < 0.4 ? ViralLoad::Medium
                           : u < 0.6 ? ViralLoad::Low
                                     : ViralLoad::Unrecorded;
        }
        v.push_back(std::move(r));
    }
    return dataset(std::move(v));
}

inline SplitConfig split_config(std::uint64_t seed) {
    SplitConfig c;
    c.n_holdout_languages = 1;
    c.n_holdout_ethnicities = 1;
    c.negative_holdout_auto_count = 1;
    c.positive_holdout_auto_count = 1;
    c.n_random_authorities = 1;
    c.older_positive_fraction = 0.1;
    c.younger_negative_fraction = 0.1;
    c.viral_load_target_per_category = 4;
    c.test_fraction = 0.3;
    c.seed = seed;
    return c;
}

}  // namespace fixtures
