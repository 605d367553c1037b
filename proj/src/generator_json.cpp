#include <set>

#include "confeval/generator.hpp"

namespace confeval {

using nlohmann::json;

void to_json(json& j, const WeightedCategory& c) { j = {{"label", c.label}, {"weight", c.weight}}; }
void from_json(const json& j, WeightedCategory& c) {
    j.at("label").get_to(c.label);
    j.at("weight").get_to(c.weight);
}
void to_json(json& j, const ReactRound& r) {
    j = {{"start_day", r.start_day}, {"length_days", r.length_days}, {"weight", r.weight}};
}
void from_json(const json& j, ReactRound& r) {
    j.at("start_day").get_to(r.start_day);
    j.at("length_days").get_to(r.length_days);
    j.at("weight").get_to(r.weight);
}

json to_json(const GeneratorConfig& c) {
    return {
        {"n", c.n},
        {"prevalence", c.prevalence},
        {"p_tt_given_positive", c.p_tt_given_positive},
        {"p_tt_given_negative", c.p_tt_given_negative},
        {"p_symptomatic", c.p_symptomatic},
        {"symptom_given_symptomatic", c.symptom_given_symptomatic},
        {"age_mean", c.age_mean},
        {"age_sd", c.age_sd},
        {"age_min", c.age_min},
        {"age_max", c.age_max},
        {"gender_weights", c.gender_weights},
        {"ethnicities", c.ethnicities},
        {"languages", c.languages},
        {"authorities", c.authorities},
        {"authority_weights_tt", c.authority_weights_tt},
        {"authority_weights_react", c.authority_weights_react},
        {"smoker_weights", c.smoker_weights},
        {"p_resp", c.p_resp},
        {"height_bin_weights", c.height_bin_weights},
        {"weight_bin_weights", c.weight_bin_weights},
        {"p_viral_load_unrecorded", c.p_viral_load_unrecorded},
        {"viral_load_weights", c.viral_load_weights},
        {"start_date", format_date(c.start_date)},
        {"test_period_days", c.test_period_days},
        {"react_rounds", c.react_rounds},
        {"confound_weights", c.confound_weights},
        {"signal_strength", c.signal_strength},
        {"noise_scale", c.noise_scale},
        {"feature_dim", c.feature_dim},
        {"seed", c.seed},
    };
}

GeneratorConfig apply_json(GeneratorConfig c, const json& j) {
    if (!j.is_object()) throw ConfigError({"generator config must be a JSON object"});
    std::vector<std::string> bad;
    std::set<std::string> used;
    auto take = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        used.insert(key);
        try {
            j.at(key).get_to(field);
        } catch (const json::exception& e) {
            bad.push_back(std::string(key) + ": " + e.what());
        }
    };
    take("n", c.n);
    take("prevalence", c.prevalence);
    take("p_tt_given_positive", c.p_tt_given_positive);
    take("p_tt_given_negative", c.p_tt_given_negative);
    take("p_symptomatic", c.p_symptomatic);
    take("symptom_given_symptomatic", c.symptom_given_symptomatic);
    take("age_mean", c.age_mean);
    take("age_sd", c.age_sd);
    take("age_min", c.age_min);
    take("age_max", c.age_max);
    take("gender_weights", c.gender_weights);
    take("ethnicities", c.ethnicities);
    take("languages", c.languages);
    take("authorities", c.authorities);
    take("authority_weights_tt", c.authority_weights_tt);
    take("authority_weights_react", c.authority_weights_react);
    take("smoker_weights", c.smoker_weights);
    take("p_resp", c.p_resp);
    take("height_bin_weights", c.height_bin_weights);
    take("weight_bin_weights", c.weight_bin_weights);
    take("p_viral_load_unrecorded", c.p_viral_load_unrecorded);
    take("viral_load_weights", c.viral_load_weights);
    take("test_period_days", c.test_period_days);
    take("react_rounds", c.react_rounds);
    take("confound_weights", c.confound_weights);
    take("signal_strength", c.signal_strength);
    take("noise_scale", c.noise_scale);
    take("feature_dim", c.feature_dim);
    take("seed", c.seed);
    if (j.contains("start_date")) {
        used.insert("start_date");
        const auto s = j.at("start_date").is_string() ? j.at("start_date").get<std::string>() : "";
        if (auto d = parse_date(s))
            c.start_date = *d;
        else
            bad.push_back("start_date: expected YYYY-MM-DD");
    }
    // Multiplies the confounding matrix; 0 removes every confounder path.
    if (j.contains("confound_scale")) {
        used.insert("confound_scale");
        if (j.at("confound_scale").is_number()) {
            const double s = j.at("confound_scale").get<double>();
            for (double& w : c.confound_weights) w *= s;
        } else {
            bad.push_back("confound_scale: expected a number");
        }
    }
    for (const auto& [key, _] : j.items())
        if (!used.contains(key)) bad.push_back(key + ": unknown generator field");
    if (!bad.empty()) throw ConfigError(std::move(bad));
    return c;
}

}  // namespace confeval
