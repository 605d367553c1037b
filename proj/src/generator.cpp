#include "confeval/generator.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "confeval/rng.hpp"

namespace confeval {

namespace {

constexpr std::size_t kPos = 0;
constexpr std::size_t kNeg = 1;

std::size_t status_index(CovidStatus s) { return s == CovidStatus::Positive ? kPos : kNeg; }

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

template <typename Range>
bool valid_weights(const Range& w) {
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) return false;
        sum += x;
    }
    return sum > 0.0;
}

std::vector<double> weights_of(const std::vector<WeightedCategory>& cats) {
    std::vector<double> w;
    w.reserve(cats.size());
    for (const auto& c : cats) w.push_back(c.weight);
    return w;
}

// Mean and standard deviation of the (untruncated) age mixture; used to
// standardize age in the confounder encoding.
std::pair<double, double> age_moments(const GeneratorConfig& cfg) {
    const double p = cfg.prevalence;
    const double mean = p * cfg.age_mean[kPos] + (1 - p) * cfg.age_mean[kNeg];
    const double second =
        p * (cfg.age_sd[kPos] * cfg.age_sd[kPos] + cfg.age_mean[kPos] * cfg.age_mean[kPos]) +
        (1 - p) * (cfg.age_sd[kNeg] * cfg.age_sd[kNeg] + cfg.age_mean[kNeg] * cfg.age_mean[kNeg]);
    const double sd = std::sqrt(std::max(second - mean * mean, 1e-12));
    return {mean, sd};
}

int draw_age(Rng& rng, const GeneratorConfig& cfg, std::size_t status) {
    for (;;) {
        const double a = std::round(rng.normal(cfg.age_mean[status], cfg.age_sd[status]));
        if (a >= cfg.age_min && a <= cfg.age_max) return static_cast<int>(a);
    }
}

std::string record_id(std::size_t i, std::size_t n) {
    const int width = static_cast<int>(std::to_string(n).size());
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%0*zu", width, i + 1);
    return buf;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
          std::string msg = "invalid generator config:";
          for (const auto& p : problems) msg += "\n  " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

std::vector<std::string> validate(const GeneratorConfig& cfg) {
    std::vector<std::string> bad;
    auto prob = [&](const std::string& field, double p) {
        if (!is_probability(p)) bad.push_back(field + ": probability must be in [0,1]");
    };
    if (cfg.n < 1) bad.push_back("n: must be >= 1");
    prob("prevalence", cfg.prevalence);
    prob("p_tt_given_positive", cfg.p_tt_given_positive);
    prob("p_tt_given_negative", cfg.p_tt_given_negative);
    for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t c = 0; c < 2; ++c)
            prob("p_symptomatic[" + std::to_string(s) + "][" + std::to_string(c) + "]",
                 cfg.p_symptomatic[s][c]);
    for (std::size_t s = 0; s < 2; ++s) {
        bool any = false;
        for (std::size_t k = 0; k < kRealSymptomCount; ++k) {
            prob("symptom_given_symptomatic[" + std::to_string(s) + "][" + std::to_string(k) + "]",
                 cfg.symptom_given_symptomatic[s][k]);
            any = any || cfg.symptom_given_symptomatic[s][k] > 0.0;
        }
        if (!any)
            bad.push_back("symptom_given_symptomatic[" + std::to_string(s) +
                          "]: at least one symptom probability must be positive");
    }
    for (std::size_t s = 0; s < 2; ++s)
        if (!(cfg.age_sd[s] > 0.0)) bad.push_back("age_sd: must be > 0");
    if (cfg.age_min < 18) bad.push_back("age_min: generated records must be adults (>= 18)");
    if (cfg.age_max < cfg.age_min) bad.push_back("age_max: must be >= age_min");
    if (!valid_weights(cfg.gender_weights)) bad.push_back("gender_weights: need non-negative weights with positive sum");
    if (cfg.ethnicities.empty() || !valid_weights(weights_of(cfg.ethnicities)))
        bad.push_back("ethnicities: need at least one category with positive total weight");
    if (cfg.languages.empty() || !valid_weights(weights_of(cfg.languages)))
        bad.push_back("languages: need at least one category with positive total weight");
    if (cfg.authorities.empty()) bad.push_back("authorities: need at least one authority");
    if (cfg.authority_weights_tt.size() != cfg.authorities.size() ||
        !valid_weights(cfg.authority_weights_tt))
        bad.push_back("authority_weights_tt: one non-negative weight per authority, positive sum");
    if (cfg.authority_weights_react.size() != cfg.authorities.size() ||
        !valid_weights(cfg.authority_weights_react))
        bad.push_back("authority_weights_react: one non-negative weight per authority, positive sum");
    if (!valid_weights(cfg.smoker_weights)) bad.push_back("smoker_weights: need non-negative weights with positive sum");
    for (double p : cfg.p_resp) prob("p_resp", p);
    if (cfg.height_bin_weights.size() != height_bins().size() || !valid_weights(cfg.height_bin_weights))
        bad.push_back("height_bin_weights: one weight per height bin (" +
                      std::to_string(height_bins().size()) + ")");
    if (cfg.weight_bin_weights.size() != weight_bins().size() || !valid_weights(cfg.weight_bin_weights))
        bad.push_back("weight_bin_weights: one weight per weight bin (" +
                      std::to_string(weight_bins().size()) + ")");
    prob("p_viral_load_unrecorded", cfg.p_viral_load_unrecorded);
    if (!valid_weights(cfg.viral_load_weights)) bad.push_back("viral_load_weights: need non-negative weights with positive sum");
    if (cfg.test_period_days < 1) bad.push_back("test_period_days: must be >= 1");
    for (const auto& r : cfg.react_rounds)
        if (r.length_days < 1 || r.start_day < 0 || !(r.weight >= 0.0))
            bad.push_back("react_rounds: each round needs start_day >= 0, length_days >= 1, weight >= 0");
    if (!cfg.react_rounds.empty()) {
        double total = 0.0;
        for (const auto& r : cfg.react_rounds) total += r.weight;
        if (!(total > 0.0)) bad.push_back("react_rounds: total weight must be positive");
    }
    if (cfg.feature_dim < 1) bad.push_back("feature_dim: must be >= 1");
    if (cfg.confound_weights.size() != cfg.feature_dim * kConfounderCount)
        bad.push_back("confound_weights: expected feature_dim x " + std::to_string(kConfounderCount) +
                      " = " + std::to_string(cfg.feature_dim * kConfounderCount) + " entries, got " +
                      std::to_string(cfg.confound_weights.size()));
    if (!std::isfinite(cfg.signal_strength)) bad.push_back("signal_strength: must be finite");
    if (!(cfg.noise_scale > 0.0)) bad.push_back("noise_scale: must be > 0");
    return bad;
}

GeneratorConfig default_paper_mimic_config(std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.n = 37018;

    // Status x source: T&T 13035 / 962, REACT 164 / 22857.
    constexpr double tt_pos = 13035, tt_neg = 962, re_pos = 164, re_neg = 22857;
    const double pos = tt_pos + re_pos, neg = tt_neg + re_neg;
    cfg.prevalence = pos / (pos + neg);
    cfg.p_tt_given_positive = tt_pos / pos;
    cfg.p_tt_given_negative = tt_neg / neg;

    // Symptomatic counts per (status, source) that reproduce all three
    // published two-way margins (symptomatic positives 12753, symptomatic
    // negatives 5548, symptomatic T&T 13256) with half of REACT positives
    // symptomatic: 12671 / 82 / 585 / 4963.
    cfg.p_symptomatic = {{{12671.0 / tt_pos, 82.0 / re_pos}, {585.0 / tt_neg, 4963.0 / re_neg}}};

    // Profile of a symptomatic report, shared by both statuses so that, once
    // symptomatic and source are fixed, the remaining symptoms carry no status
    // information. Cough is the most common symptom.
    const std::array<double, kRealSymptomCount> profile = {
        0.62,  // cough_any
        0.45,  // fatigue
        0.44,  // headache
        0.18,  // smell_taste_change
        0.40,  // runny_blocked_nose
        0.28,  // fever
        0.12,  // loss_of_taste
        0.15,  // shortness_of_breath
        0.38,  // sore_throat
        0.20,  // new_continuous_cough
        0.08,  // diarrhoea
        0.06,  // abdominal_pain
        0.10,  // other_symptom
    };
    cfg.symptom_given_symptomatic = {profile, profile};

    // Positives roughly 12 years younger at the median.
    cfg.age_mean = {40.0, 52.5};
    cfg.age_sd = {14.0, 15.0};

    // Females outnumber males by ~17% of the total (6426 of 37018).
    cfg.gender_weights = {0.4082, 0.5818, 0.005, 0.005};

    cfg.ethnicities = {{"White British", 0.92}};
    for (const char* e : {"White Irish", "White Other", "Indian", "Pakistani", "Bangladeshi",
                          "Chinese", "Other Asian", "Black African", "Black Caribbean",
                          "Other Black", "White and Black Caribbean", "White and Black African",
                          "White and Asian", "Other Mixed", "Arab", "Other ethnic group"})
        cfg.ethnicities.push_back({e, 0.08 / 16.0});
    cfg.languages = {{"English", 0.965}};
    for (const char* l : {"Polish", "Urdu", "Punjabi", "Bengali", "Gujarati", "Arabic",
                          "Romanian", "Portuguese", "Spanish", "Tamil", "Turkish", "Italian",
                          "French", "Lithuanian"})
        cfg.languages.push_back({l, 0.035 / 14.0});

    // 300 authorities with log-normal sizes; a second log-normal factor tilts
    // each authority toward one recruitment channel.
    Rng geo(derive_seed(seed, "authorities"));
    constexpr std::size_t kAuthorities = 300;
    for (std::size_t i = 0; i < kAuthorities; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "Authority %03zu", i + 1);
        cfg.authorities.emplace_back(buf);
        const double size = std::exp(0.5 * geo.normal());
        const double tilt = std::exp(0.4 * geo.normal());
        cfg.authority_weights_tt.push_back(size * tilt);
        cfg.authority_weights_react.push_back(size / tilt);
    }

    cfg.smoker_weights = {0.55, 0.28, 0.14, 0.03};
    cfg.p_resp = {0.12, 0.02, 0.04};
    // Lowest bins over-selected as the first option on the form.
    cfg.height_bin_weights = {0.06, 0.12, 0.30, 0.30, 0.17, 0.05};
    cfg.weight_bin_weights = {0.05, 0.10, 0.20, 0.24, 0.19, 0.11, 0.06, 0.05};

    cfg.p_viral_load_unrecorded = 0.4;
    cfg.viral_load_weights = {1.0, 1.0, 1.0};

    cfg.start_date = Date{std::chrono::year{2021} / std::chrono::March / 1};
    cfg.test_period_days = 365;
    cfg.react_rounds = {{20, 18, 1.0}, {75, 18, 1.0}, {130, 18, 1.0}, {190, 18, 1.0},
                        {250, 18, 1.0}, {310, 18, 1.0}};

    cfg.feature_dim = 32;
    cfg.noise_scale = 1.0;
    cfg.signal_strength = 0.0;
    Rng w(derive_seed(seed, "confound_weights"));
    cfg.confound_weights.resize(cfg.feature_dim * kConfounderCount);
    for (double& x : cfg.confound_weights) x = 0.25 * w.normal();
    return cfg;
}

std::vector<double> signal_direction(const GeneratorConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, "signal_direction"));
    std::vector<double> v(cfg.feature_dim);
    double norm = 0.0;
    while (!(norm > 0.0)) {
        norm = 0.0;
        for (double& x : v) {
            x = rng.normal();
            norm += x * x;
        }
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

std::array<double, kConfounderCount> encode_confounders(const SubmissionRecord& r,
                                                        const GeneratorConfig& cfg) {
    std::array<double, kConfounderCount> c{};
    for (std::size_t s = 0; s < kSymptomCount; ++s) c[s] = r.symptoms[s] ? 1.0 : 0.0;
    const auto [mean, sd] = age_moments(cfg);
    c[kSymptomCount] = (r.age - mean) / sd;
    c[kSymptomCount + 1] = r.recruitment_source == RecruitmentSource::TestAndTrace ? 1.0 : 0.0;
    return c;
}

Dataset generate_dataset(const GeneratorConfig& cfg) {
    if (auto problems = validate(cfg); !problems.empty()) throw ConfigError(std::move(problems));

    Rng rng(derive_seed(cfg.seed, "records"));
    const auto direction = signal_direction(cfg);
    const auto eth_w = weights_of(cfg.ethnicities);
    const auto lang_w = weights_of(cfg.languages);
    std::vector<double> round_w;
    for (const auto& r : cfg.react_rounds) round_w.push_back(r.weight);

    std::vector<SubmissionRecord> records;
    records.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        SubmissionRecord r;
        r.id = record_id(i, cfg.n);
        r.covid_status = rng.bernoulli(cfg.prevalence) ? CovidStatus::Positive : CovidStatus::Negative;
        const std::size_t st = status_index(r.covid_status);
        const double p_tt = st == kPos ? cfg.p_tt_given_positive : cfg.p_tt_given_negative;
        r.recruitment_source =
            rng.bernoulli(p_tt) ? RecruitmentSource::TestAndTrace : RecruitmentSource::React;
        const std::size_t src = r.recruitment_source == RecruitmentSource::TestAndTrace ? 0 : 1;

        if (rng.bernoulli(cfg.p_symptomatic[st][src])) {
            // Symptomatic: redraw until at least one symptom is reported.
            do {
                for (std::size_t k = 0; k < kRealSymptomCount; ++k)
                    r.symptoms[k] = rng.bernoulli(cfg.symptom_given_symptomatic[st][k]);
            } while (!r.any_symptom());
            if (r.has(Symptom::NewContinuousCough))
                r.symptoms[static_cast<std::size_t>(Symptom::CoughAny)] = true;
        } else {
            r.symptoms[static_cast<std::size_t>(Symptom::NoSymptoms)] = true;
        }

        r.age = draw_age(rng, cfg, st);
        r.gender = enum_values<Gender>()[rng.categorical(cfg.gender_weights)];
        r.ethnicity = cfg.ethnicities[rng.categorical(eth_w)].label;
        r.first_language = cfg.languages[rng.categorical(lang_w)].label;
        r.local_authority = cfg.authorities[rng.categorical(
            src == 0 ? cfg.authority_weights_tt : cfg.authority_weights_react)];
        r.smoker_status = enum_values<SmokerStatus>()[rng.categorical(cfg.smoker_weights)];
        r.respiratory[0] = rng.bernoulli(cfg.p_resp[0]);
        r.respiratory[1] = rng.bernoulli(cfg.p_resp[1]);
        r.respiratory[2] = rng.bernoulli(cfg.p_resp[2]);
        r.respiratory[3] = !(r.respiratory[0] || r.respiratory[1] || r.respiratory[2]);
        r.height_bin = rng.categorical(cfg.height_bin_weights);
        r.weight_bin = rng.categorical(cfg.weight_bin_weights);

        if (st == kPos && !rng.bernoulli(cfg.p_viral_load_unrecorded))
            r.viral_load = enum_values<ViralLoad>()[rng.categorical(cfg.viral_load_weights)];
        else
            r.viral_load = ViralLoad::Unrecorded;

        int day = 0;
        if (src == 1 && !cfg.react_rounds.empty()) {
            const auto& round = cfg.react_rounds[rng.categorical(round_w)];
            day = round.start_day + static_cast<int>(rng.uniform_index(round.length_days));
        } else {
            day = static_cast<int>(rng.uniform_index(cfg.test_period_days));
        }
        r.test_date = cfg.start_date + std::chrono::days{day};
        r.submission_date =
            r.test_date + std::chrono::days{static_cast<int>(rng.uniform_index(11))};
        r.test_type = TestType::PCR;
        r.lab_under_investigation = false;
        r.metadata_complete = true;

        const auto c = encode_confounders(r, cfg);
        std::vector<double> f(cfg.feature_dim);
        for (std::size_t j = 0; j < cfg.feature_dim; ++j) {
            double x = 0.0;
            for (std::size_t k = 0; k < kConfounderCount; ++k) x += cfg.confound_weight(j, k) * c[k];
            if (st == kPos) x += cfg.signal_strength * direction[j];
            f[j] = x + cfg.noise_scale * rng.normal();
        }
        r.audio_features = std::move(f);
        records.push_back(std::move(r));
    }
    return Dataset(std::move(records), cfg.feature_dim,
                   "synthetic seed=" + std::to_string(cfg.seed));
}

}  // namespace confeval
