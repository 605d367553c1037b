#include "confeval/record.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <unordered_map>

namespace confeval {

namespace {

constexpr std::array<std::string_view, kSymptomCount> kSymptomNames = {
    "cough_any",          "fatigue",       "headache",      "smell_taste_change",
    "runny_blocked_nose", "fever",         "loss_of_taste", "shortness_of_breath",
    "sore_throat",        "new_continuous_cough", "diarrhoea", "abdominal_pain",
    "other_symptom",      "no_symptoms",   "prefer_not_to_say",
};

constexpr std::array<std::string_view, kRespCount> kRespNames = {"asthma", "copd", "other_resp",
                                                                 "none_resp"};

constexpr std::array<BinSpec, 6> kHeightBins = {{
    {"<150", 145.0},
    {"150-159", 155.0},
    {"160-169", 165.0},
    {"170-179", 175.0},
    {"180-189", 185.0},
    {"190+", 195.0},
}};

constexpr std::array<BinSpec, 8> kWeightBins = {{
    {"<50", 45.0},
    {"50-59", 55.0},
    {"60-69", 65.0},
    {"70-79", 75.0},
    {"80-89", 85.0},
    {"90-99", 95.0},
    {"100-109", 105.0},
    {"110+", 115.0},
}};

constexpr std::array<Gender, 4> kGenders = {Gender::Male, Gender::Female, Gender::Other,
                                            Gender::PreferNotToSay};
constexpr std::array<RecruitmentSource, 2> kSources = {RecruitmentSource::TestAndTrace,
                                                       RecruitmentSource::React};
constexpr std::array<CovidStatus, 2> kStatuses = {CovidStatus::Positive, CovidStatus::Negative};
constexpr std::array<SmokerStatus, 4> kSmokers = {SmokerStatus::Never, SmokerStatus::Ex,
                                                  SmokerStatus::Current,
                                                  SmokerStatus::PreferNotToSay};
constexpr std::array<ViralLoad, 4> kViralLoads = {ViralLoad::High, ViralLoad::Medium,
                                                  ViralLoad::Low, ViralLoad::Unrecorded};
constexpr std::array<TestType, 2> kTestTypes = {TestType::PCR, TestType::Other};

template <typename E, std::size_t N>
std::optional<E> parse_from(const std::array<E, N>& values, std::string_view s) {
    for (E v : values)
        if (to_string(v) == s) return v;
    return std::nullopt;
}

}  // namespace

std::span<const std::string_view> symptom_names() { return kSymptomNames; }
std::span<const std::string_view> resp_names() { return kRespNames; }
std::span<const BinSpec> height_bins() { return kHeightBins; }
std::span<const BinSpec> weight_bins() { return kWeightBins; }

bool SubmissionRecord::any_symptom() const {
    return std::any_of(symptoms.begin(), symptoms.begin() + kRealSymptomCount,
                       [](bool b) { return b; });
}

std::uint32_t SubmissionRecord::symptom_mask() const {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < kSymptomCount; ++i)
        if (symptoms[i]) m |= (1u << i);
    return m;
}

std::optional<double> SubmissionRecord::height_cm() const {
    if (!height_bin) return std::nullopt;
    return kHeightBins.at(*height_bin).midpoint;
}

std::optional<double> SubmissionRecord::weight_kg() const {
    if (!weight_bin) return std::nullopt;
    return kWeightBins.at(*weight_bin).midpoint;
}

Dataset::Dataset(std::vector<SubmissionRecord> records, std::size_t feature_dim,
                 std::string provenance)
    : records_(std::move(records)), feature_dim_(feature_dim), provenance_(std::move(provenance)) {
    std::unordered_map<std::string_view, std::size_t> seen;
    seen.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (!seen.emplace(r.id, i).second)
            throw DataError("duplicate record id '" + r.id + "'");
        if (r.audio_features && r.audio_features->size() != feature_dim_)
            throw DataError("record '" + r.id + "' has " +
                            std::to_string(r.audio_features->size()) +
                            " audio features, dataset declares " + std::to_string(feature_dim_));
    }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<SubmissionRecord> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(records_.at(i));
    return Dataset(std::move(out), feature_dim_, provenance_);
}

std::optional<std::size_t> Dataset::find(std::string_view id) const {
    for (std::size_t i = 0; i < records_.size(); ++i)
        if (records_[i].id == id) return i;
    return std::nullopt;
}

std::size_t Dataset::count_positive() const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.positive(); }));
}

std::string_view to_string(Gender v) {
    switch (v) {
        case Gender::Male: return "Male";
        case Gender::Female: return "Female";
        case Gender::Other: return "Other";
        case Gender::PreferNotToSay: return "PreferNotToSay";
    }
    return "?";
}

std::string_view to_string(RecruitmentSource v) {
    return v == RecruitmentSource::TestAndTrace ? "TestAndTrace" : "React";
}

std::string_view to_string(CovidStatus v) {
    return v == CovidStatus::Positive ? "Positive" : "Negative";
}

std::string_view to_string(SmokerStatus v) {
    switch (v) {
        case SmokerStatus::Never: return "Never";
        case SmokerStatus::Ex: return "Ex";
        case SmokerStatus::Current: return "Current";
        case SmokerStatus::PreferNotToSay: return "PreferNotToSay";
    }
    return "?";
}

std::string_view to_string(ViralLoad v) {
    switch (v) {
        case ViralLoad::High: return "High";
        case ViralLoad::Medium: return "Medium";
        case ViralLoad::Low: return "Low";
        case ViralLoad::Unrecorded: return "Unrecorded";
    }
    return "?";
}

std::string_view to_string(TestType v) { return v == TestType::PCR ? "PCR" : "Other"; }

template <>
std::optional<Gender> parse_enum<Gender>(std::string_view s) { return parse_from(kGenders, s); }
template <>
std::optional<RecruitmentSource> parse_enum<RecruitmentSource>(std::string_view s) {
    return parse_from(kSources, s);
}
template <>
std::optional<CovidStatus> parse_enum<CovidStatus>(std::string_view s) {
    return parse_from(kStatuses, s);
}
template <>
std::optional<SmokerStatus> parse_enum<SmokerStatus>(std::string_view s) {
    return parse_from(kSmokers, s);
}
template <>
std::optional<ViralLoad> parse_enum<ViralLoad>(std::string_view s) {
    return parse_from(kViralLoads, s);
}
template <>
std::optional<TestType> parse_enum<TestType>(std::string_view s) {
    return parse_from(kTestTypes, s);
}

template <>
std::span<const Gender> enum_values<Gender>() { return kGenders; }
template <>
std::span<const RecruitmentSource> enum_values<RecruitmentSource>() { return kSources; }
template <>
std::span<const CovidStatus> enum_values<CovidStatus>() { return kStatuses; }
template <>
std::span<const SmokerStatus> enum_values<SmokerStatus>() { return kSmokers; }
template <>
std::span<const ViralLoad> enum_values<ViralLoad>() { return kViralLoads; }
template <>
std::span<const TestType> enum_values<TestType>() { return kTestTypes; }

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::optional<Date> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    auto ok = [](auto res, const char* end) { return res.ec == std::errc{} && res.ptr == end; };
    if (!ok(std::from_chars(s.data(), s.data() + 4, y), s.data() + 4)) return std::nullopt;
    if (!ok(std::from_chars(s.data() + 5, s.data() + 7, m), s.data() + 7)) return std::nullopt;
    if (!ok(std::from_chars(s.data() + 8, s.data() + 10, d), s.data() + 10)) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{ymd};
}

}  // namespace confeval
