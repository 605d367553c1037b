#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace confeval {

enum class Gender : std::uint8_t { Male, Female, Other, PreferNotToSay };
enum class RecruitmentSource : std::uint8_t { TestAndTrace, React };
enum class CovidStatus : std::uint8_t { Positive, Negative };
enum class SmokerStatus : std::uint8_t { Never, Ex, Current, PreferNotToSay };
enum class ViralLoad : std::uint8_t { High, Medium, Low, Unrecorded };
enum class TestType : std::uint8_t { PCR, Other };

// Symptom flags in schema order. The last two are not symptoms proper.
enum class Symptom : std::uint8_t {
    CoughAny,
    Fatigue,
    Headache,
    SmellTasteChange,
    RunnyBlockedNose,
    Fever,
    LossOfTaste,
    ShortnessOfBreath,
    SoreThroat,
    NewContinuousCough,
    Diarrhoea,
    AbdominalPain,
    OtherSymptom,
    NoSymptoms,
    PreferNotToSay,
};
inline constexpr std::size_t kSymptomCount = 15;
// Flags that count as reporting a symptom (everything before NoSymptoms).
inline constexpr std::size_t kRealSymptomCount = 13;

enum class RespCondition : std::uint8_t { Asthma, Copd, OtherResp, NoneResp };
inline constexpr std::size_t kRespCount = 4;

using SymptomFlags = std::array<bool, kSymptomCount>;
using RespFlags = std::array<bool, kRespCount>;

// Schema column names for the flag groups.
std::span<const std::string_view> symptom_names();
std::span<const std::string_view> resp_names();

// Height / weight are recorded as bins; each bin has a declared midpoint.
struct BinSpec {
    std::string_view label;
    double midpoint;
};
std::span<const BinSpec> height_bins();  // centimetres
std::span<const BinSpec> weight_bins();  // kilograms

using Date = std::chrono::sys_days;

struct SubmissionRecord {
    std::string id;
    int age = 0;
    Gender gender = Gender::Female;
    std::string ethnicity;
    std::string first_language;
    std::string local_authority;
    RecruitmentSource recruitment_source = RecruitmentSource::TestAndTrace;
    CovidStatus covid_status = CovidStatus::Negative;
    SymptomFlags symptoms{};
    RespFlags respiratory{};
    std::optional<SmokerStatus> smoker_status;
    std::optional<std::size_t> height_bin;  // index into height_bins()
    std::optional<std::size_t> weight_bin;  // index into weight_bins()
    ViralLoad viral_load = ViralLoad::Unrecorded;
    Date test_date{};
    Date submission_date{};
    TestType test_type = TestType::PCR;
    bool lab_under_investigation = false;
    std::optional<std::vector<double>> audio_features;
    bool metadata_complete = true;

    bool has(Symptom s) const { return symptoms[static_cast<std::size_t>(s)]; }
    bool has(RespCondition c) const { return respiratory[static_cast<std::size_t>(c)]; }
    bool positive() const { return covid_status == CovidStatus::Positive; }
    // Any flag before NoSymptoms is set.
    bool any_symptom() const;
    // Bitmask over all 15 symptom flags, bit i = symptom i.
    std::uint32_t symptom_mask() const;
    std::optional<double> height_cm() const;
    std::optional<double> weight_kg() const;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An immutable, validated collection of records: ids are unique and every
// present feature vector has length feature_dim.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<SubmissionRecord> records, std::size_t feature_dim,
            std::string provenance = {});

    const std::vector<SubmissionRecord>& records() const { return records_; }
    const SubmissionRecord& operator[](std::size_t i) const { return records_[i]; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::size_t feature_dim() const { return feature_dim_; }
    const std::string& provenance() const { return provenance_; }

    auto begin() const { return records_.begin(); }
    auto end() const { return records_.end(); }

    // Records at the given positions, in the given order.
    Dataset subset(std::span<const std::size_t> indices) const;
    // Position of a record id, if present.
    std::optional<std::size_t> find(std::string_view id) const;

    std::size_t count_positive() const;

private:
    std::vector<SubmissionRecord> records_;
    std::size_t feature_dim_ = 0;
    std::string provenance_;
};

// Enum <-> schema string. Parsing is exact and case-sensitive; unknown
// strings return std::nullopt.
std::string_view to_string(Gender v);
std::string_view to_string(RecruitmentSource v);
std::string_view to_string(CovidStatus v);
std::string_view to_string(SmokerStatus v);
std::string_view to_string(ViralLoad v);
std::string_view to_string(TestType v);

template <typename E>
std::optional<E> parse_enum(std::string_view s);

template <typename E>
std::span<const E> enum_values();

#define CONFEVAL_DECLARE_ENUM(E)                               \
    template <>                                                \
    std::optional<E> parse_enum<E>(std::string_view s);        \
    template <>                                                \
    std::span<const E> enum_values<E>();
CONFEVAL_DECLARE_ENUM(Gender)
CONFEVAL_DECLARE_ENUM(RecruitmentSource)
CONFEVAL_DECLARE_ENUM(CovidStatus)
CONFEVAL_DECLARE_ENUM(SmokerStatus)
CONFEVAL_DECLARE_ENUM(ViralLoad)
CONFEVAL_DECLARE_ENUM(TestType)
#undef CONFEVAL_DECLARE_ENUM

std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view s);

}  // namespace confeval
