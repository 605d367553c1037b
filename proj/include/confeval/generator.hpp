#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "confeval/record.hpp"

namespace confeval {

// Confounders fed into the audio-feature model, in encoding order:
// the 15 symptom flags as 0/1, standardized age, recruitment source
// (1 = TestAndTrace).
inline constexpr std::size_t kConfounderCount = kSymptomCount + 2;

struct WeightedCategory {
    std::string label;
    double weight = 0.0;
};

struct ReactRound {
    int start_day = 0;  // offset from GeneratorConfig::start_date
    int length_days = 1;
    double weight = 1.0;
};

// Parameters of the synthetic causal model:
//   status -> recruitment source -> symptomatic -> symptom profile
//   status -> age
//   (symptoms, age, source) -> audio features via confound_weights
//   status -> audio features via signal_strength * signal direction
struct GeneratorConfig {
    std::size_t n = 1000;
    double prevalence = 0.5;

    // P(TestAndTrace | Positive), P(TestAndTrace | Negative).
    double p_tt_given_positive = 0.5;
    double p_tt_given_negative = 0.5;

    // P(any symptom | status, source), indexed [status][source] with the
    // enum order Positive/Negative x TestAndTrace/React.
    std::array<std::array<double, 2>, 2> p_symptomatic{{{0.5, 0.5}, {0.5, 0.5}}};
    // P(symptom | symptomatic, status) for the 13 real symptoms, per status.
    std::array<std::array<double, kRealSymptomCount>, 2> symptom_given_symptomatic{};

    // Age ~ Normal(mean, sd) per status, truncated to [age_min, age_max] and
    // rounded to whole years.
    std::array<double, 2> age_mean{45.0, 45.0};
    std::array<double, 2> age_sd{15.0, 15.0};
    int age_min = 18;
    int age_max = 90;

    std::array<double, 4> gender_weights{0.45, 0.53, 0.01, 0.01};
    std::vector<WeightedCategory> ethnicities;
    std::vector<WeightedCategory> languages;
    // Local-authority names with per-source weights (geographic confounding).
    std::vector<std::string> authorities;
    std::vector<double> authority_weights_tt;
    std::vector<double> authority_weights_react;
    std::array<double, 4> smoker_weights{0.55, 0.28, 0.14, 0.03};
    std::array<double, 3> p_resp{0.12, 0.02, 0.04};  // asthma, copd, other
    std::vector<double> height_bin_weights;
    std::vector<double> weight_bin_weights;

    // Positives only: probability the viral load is unrecorded, and weights of
    // High/Medium/Low otherwise. Negatives are always Unrecorded.
    double p_viral_load_unrecorded = 0.4;
    std::array<double, 3> viral_load_weights{1.0, 1.0, 1.0};

    Date start_date{};
    int test_period_days = 365;
    std::vector<ReactRound> react_rounds;

    // feature_dim x kConfounderCount, row-major.
    std::vector<double> confound_weights;
    double signal_strength = 0.0;
    double noise_scale = 1.0;
    std::size_t feature_dim = 8;
    std::uint64_t seed = 0;

    double confound_weight(std::size_t feature, std::size_t confounder) const {
        return confound_weights[feature * kConfounderCount + confounder];
    }
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

// Every violated constraint, one entry per field; empty when valid.
std::vector<std::string> validate(const GeneratorConfig& cfg);

// A config whose induced marginals follow the published cross-tabulations of
// status, recruitment source and symptoms, the asymptomatic-positive rate and
// the median age gap between positives and negatives. Confounding-only:
// signal_strength is 0.
GeneratorConfig default_paper_mimic_config(std::uint64_t seed);

// Generates exactly cfg.n records, each of which passes the eligibility
// filter. Throws ConfigError on an invalid config. Pure function of cfg.
Dataset generate_dataset(const GeneratorConfig& cfg);

// The unit-norm direction along which positives are shifted by
// signal_strength. Depends only on cfg.seed and cfg.feature_dim.
std::vector<double> signal_direction(const GeneratorConfig& cfg);

// Confounder encoding used by the audio-feature model.
std::array<double, kConfounderCount> encode_confounders(const SubmissionRecord& r,
                                                        const GeneratorConfig& cfg);

// Overlay `j` onto `base`: any key present in j replaces the corresponding
// field. Unknown keys are rejected.
GeneratorConfig apply_json(GeneratorConfig base, const nlohmann::json& j);
nlohmann::json to_json(const GeneratorConfig& cfg);

}  // namespace confeval
