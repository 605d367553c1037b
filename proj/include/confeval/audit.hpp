#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "confeval/record.hpp"

namespace confeval {

class UnknownVariable : public std::invalid_argument {
public:
    explicit UnknownVariable(const std::string& name)
        : std::invalid_argument("unknown variable '" + name + "'") {}
};

enum class VariableKind { Categorical, Numeric };

// Every variable the audit can address: enum and string metadata columns,
// each symptom and respiratory flag, the derived at_least_one_symptom, and
// the numeric age / height / weight (bin midpoints).
std::vector<std::string> audit_variable_names();
VariableKind variable_kind(const std::string& name);

// Covariates screened by build_audit_report.
std::vector<std::string> default_audit_covariates();

struct CrossTab {
    std::string row_variable;
    std::string col_variable;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<std::size_t>> counts;  // [row][col]

    std::size_t total() const;
    std::size_t at(const std::string& row, const std::string& col) const;
};

// Exact counts over records where both variables are defined. Categories are
// ordered by declaration (enums, booleans false/true, bins) and otherwise
// lexicographically; numeric variables are tallied by their bins.
CrossTab cross_tabulate(const Dataset& d, const std::string& var_a, const std::string& var_b);

struct SymptomCombo {
    std::uint32_t mask = 0;
    std::size_t frequency = 0;
};

struct SymptomComboTable {
    CovidStatus status = CovidStatus::Positive;
    std::size_t cutoff = 1;
    std::vector<SymptomCombo> entries;  // frequency desc, then mask asc
};

// Distinct full symptom bitmasks among records of `status` occurring at least
// `cutoff` times.
SymptomComboTable symptom_combinations(const Dataset& d, CovidStatus status, std::size_t cutoff);
std::string describe_mask(std::uint32_t mask);

// Counts below this are masked in rendered output.
inline constexpr std::size_t kDisclosureThreshold = 5;
inline constexpr int kAgeHistogramWidth = 5;

struct Breakdown {
    std::string variable;
    std::vector<std::string> labels;
    std::vector<std::size_t> positive;
    std::vector<std::size_t> negative;
    std::vector<bool> masked;  // category total < kDisclosureThreshold
};

Breakdown distribution_breakdown(const Dataset& d, const std::string& variable);

enum class TimeBin { Day, Week };

struct TimeSeries {
    TimeBin bin = TimeBin::Day;
    std::vector<Date> bin_start;
    std::vector<std::size_t> test_and_trace;
    std::vector<std::size_t> react;
};

// Submission counts per calendar bin and source, from the earliest to the
// latest submission date; bins are anchored at the earliest date and empty
// bins are kept.
TimeSeries submissions_over_time(const Dataset& d, TimeBin bin);

struct VariableAssociation {
    std::string variable;
    VariableKind kind = VariableKind::Categorical;
    // |standardized mean difference| for numeric variables (population
    // variances), max |category proportion gap| for categoricals.
    double statistic = 0.0;
    bool flagged = false;
};

inline constexpr double kDefaultAuditThreshold = 0.2;

struct AuditReport {
    double threshold = kDefaultAuditThreshold;
    std::vector<VariableAssociation> associations;
    std::vector<std::string> flagged;
    std::vector<CrossTab> crosstabs;
    std::vector<SymptomComboTable> symptom_combos;
    std::vector<Breakdown> breakdowns;

    const VariableAssociation* find(const std::string& variable) const;
};

double association_statistic(const Dataset& d, const std::string& variable);

// Symptom-combination cutoffs used in the report: 80 for positives, 30 for
// negatives.
inline constexpr std::size_t kPositiveComboCutoff = 80;
inline constexpr std::size_t kNegativeComboCutoff = 30;

AuditReport build_audit_report(const Dataset& d, double threshold = kDefaultAuditThreshold);

nlohmann::json to_json(const CrossTab& t);
nlohmann::json to_json(const AuditReport& r);
std::string render_markdown(const AuditReport& r);
std::string render_csv(const TimeSeries& ts);

}  // namespace confeval
