#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "confeval/record.hpp"

namespace confeval {

// The nine exact-matching variables.
struct StratumKey {
    RecruitmentSource recruitment_source = RecruitmentSource::TestAndTrace;
    int age_bin = 0;  // floor(age / 10)
    Gender gender = Gender::Female;
    bool cough_any = false;
    bool sore_throat = false;
    bool asthma = false;
    bool shortness_of_breath = false;
    bool runny_blocked_nose = false;
    bool at_least_one_symptom = false;

    auto operator<=>(const StratumKey&) const = default;
};

inline constexpr int kMatchAgeBinWidth = 10;

StratumKey stratum_key(const SubmissionRecord& r);
std::string to_string(const StratumKey& k);

struct StratumBalance {
    StratumKey key;
    std::size_t available_positive = 0;
    std::size_t available_negative = 0;
    std::size_t selected = 0;  // per class
};

struct MatchedSet {
    // Positions into the source dataset, ascending.
    std::vector<std::size_t> indices;
    std::vector<std::string> ids;
    std::vector<StratumBalance> strata;  // ordered by key
    std::vector<std::string> warnings;

    std::size_t n_positive = 0;
    std::size_t n_negative = 0;

    std::size_t positives() const { return n_positive; }
    std::size_t negatives() const { return n_negative; }
};

// Per stratum with p positives and q negatives, draws min(p, q) of each class
// uniformly without replacement. Each stratum uses its own substream derived
// from `seed` and the key, so the result does not depend on processing order.
MatchedSet build_matched_set(const Dataset& test, std::uint64_t seed);

void write_matched_csv(const std::filesystem::path& path, const MatchedSet& m);
// Reads matched ids and resolves them against `d`.
MatchedSet read_matched_csv(const std::filesystem::path& path, const Dataset& d);
nlohmann::json balance_json(const MatchedSet& m);

}  // namespace confeval
