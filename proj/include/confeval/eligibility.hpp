#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "confeval/record.hpp"

namespace confeval {

// Exclusion reasons in precedence order; a record is counted under the first
// rule it fails.
enum class Exclusion : std::uint8_t {
    Underage,
    NonPcr,
    OutOfWindow,
    FlaggedLab,
    SymptomContradiction,
    MissingAudio,
    MissingMetadata,
};
inline constexpr std::size_t kExclusionCount = 7;

inline constexpr int kMinimumAge = 18;
// Submissions are accepted from the test date up to this many days after it,
// inclusive on both ends.
inline constexpr int kSubmissionWindowDays = 10;

std::string_view to_string(Exclusion e);

struct ExclusionReport {
    std::size_t input_count = 0;
    std::array<std::size_t, kExclusionCount> excluded{};
    std::size_t surviving = 0;

    std::size_t count(Exclusion e) const { return excluded[static_cast<std::size_t>(e)]; }
    std::size_t total_excluded() const;
};

// First failing rule, or nullopt if the record is eligible.
std::optional<Exclusion> first_exclusion(const SubmissionRecord& r);

// "no symptoms" reported together with any other symptom flag.
bool has_symptom_contradiction(const SubmissionRecord& r);

struct FilterResult {
    Dataset eligible;
    ExclusionReport report;
};

FilterResult apply_eligibility_filter(const Dataset& d);

struct MissingDataPartition {
    Dataset missing_audio;  // includes records missing both
    Dataset missing_meta;
    Dataset complete;
};

MissingDataPartition missing_data_partition(const Dataset& d);

nlohmann::json to_json(const ExclusionReport& r);

}  // namespace confeval
