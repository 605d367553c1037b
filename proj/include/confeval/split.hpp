#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "confeval/record.hpp"

namespace confeval {

// Test-set construction steps, applied in this order.
enum class SplitStep : std::uint8_t {
    HeldOutLanguages,       // a
    HeldOutEthnicities,     // b
    NegativesOfPositiveHeavyAuthorities,  // c
    PositivesOfNegativeHeavyAuthorities,  // d
    RandomAuthorities,      // e
    AsymptomaticPositives,  // f
    OlderPositives,         // g
    YoungerNegatives,       // h
    ReactPositives,         // i
    TestAndTraceNegatives,  // j
    ViralLoadBalance,       // k
    UnrecordedFill,         // l
    Random,                 // uniform random split
};
inline constexpr std::size_t kSplitStepCount = 13;

// "a" .. "l", or "random".
std::string_view step_label(SplitStep s);

enum class Assignment : std::uint8_t { Train, Test };

struct SplitConfig {
    std::size_t n_holdout_languages = 5;
    std::size_t n_holdout_ethnicities = 5;
    std::string excluded_language = "English";
    std::string excluded_ethnicity = "White British";
    // Step c holds out the negatives of these authorities, step d the
    // positives. An empty list means automatic selection of the
    // *_auto_count authorities with the most positives (c) or negatives (d).
    std::vector<std::string> negative_holdout_authorities;
    std::vector<std::string> positive_holdout_authorities;
    std::size_t negative_holdout_auto_count = 2;
    std::size_t positive_holdout_auto_count = 2;
    std::size_t n_random_authorities = 4;
    double older_positive_fraction = 0.5;
    double younger_negative_fraction = 0.5;
    std::size_t viral_load_target_per_category = 598;
    double test_fraction = 0.30;
    std::uint64_t seed = 0;
};

// Final |Test|/n must land within this distance of test_fraction.
inline constexpr double kTestFractionTolerance = 0.005;

class SplitError : public std::runtime_error {
public:
    enum class Kind { InvalidConfig, InsufficientCategories, InfeasibleFill };
    SplitError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Per-record assignment in dataset order. provenance[i] has bit s set when
// step s selected record i or, for the deterministic whole-group steps
// (a-f, i, j), when the record belongs to that step's group.
struct SplitAssignment {
    std::vector<std::string> ids;
    std::vector<Assignment> assignment;
    std::vector<std::uint16_t> provenance;
    // Records newly added to the test set by each step.
    std::array<std::size_t, kSplitStepCount> added_by_step{};
    std::vector<std::string> warnings;

    // Resolved choices, recorded for the report.
    std::vector<std::string> held_out_languages;
    std::vector<std::string> held_out_ethnicities;
    std::vector<std::string> negative_holdout_authorities;
    std::vector<std::string> positive_holdout_authorities;
    std::vector<std::string> random_authorities;

    std::size_t size() const { return assignment.size(); }
    std::size_t test_count() const;
    std::vector<std::size_t> test_indices() const;
    std::vector<std::size_t> train_indices() const;
    bool has_step(std::size_t i, SplitStep s) const {
        return provenance[i] & (1u << static_cast<unsigned>(s));
    }
};

// Median age per gender over the whole dataset (indexed by Gender); NaN for
// a gender with no records.
std::array<double, 4> median_age_by_gender(const Dataset& d);

// Randomness: step s uses Rng(step_seed(cfg.seed, s)). Category steps (a, b,
// e) call sample() on the sorted distinct category list; record steps (g, h,
// k, l) call sample() on the candidate positions in dataset order, with k
// drawing High, Medium, Low in turn from one stream. Sample sizes in g and h
// are llround(fraction * candidates); l fills to llround(test_fraction * n).
SplitAssignment build_designed_split(const Dataset& d, const SplitConfig& cfg);
SplitAssignment build_random_split(const Dataset& d, double test_fraction, std::uint64_t seed);

// Seed of a step's random substream.
std::uint64_t step_seed(std::uint64_t seed, SplitStep s);

void write_split_csv(std::ostream& out, const SplitAssignment& s);
void write_split_csv(const std::filesystem::path& path, const SplitAssignment& s);
// Reads a split and aligns it to `d`; every dataset id must appear exactly once.
SplitAssignment read_split_csv(const std::filesystem::path& path, const Dataset& d);

nlohmann::json to_json(const SplitConfig& c);
SplitConfig split_config_from_json(const nlohmann::json& j, SplitConfig base = {});
nlohmann::json split_summary_json(const SplitAssignment& s);

}  // namespace confeval
