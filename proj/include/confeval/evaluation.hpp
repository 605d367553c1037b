#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "confeval/classifiers.hpp"
#include "confeval/record.hpp"
#include "confeval/split.hpp"

namespace confeval {

// Mann-Whitney AUC with ties counted half, via midranks. labels: 1 positive,
// 0 negative. Throws std::invalid_argument on a length mismatch, a
// single-class label vector, a label other than 0/1 or a NaN score.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

enum class Variant : std::uint8_t { Randomized, Designed, Matched };
std::string_view to_string(Variant v);

// One row of the comparison: a model family on one feature set.
struct ClassifierSpec {
    std::string name;  // report key
    std::string label; // table row label
    ModelKind kind = ModelKind::Logistic;
    FeatureMode mode = FeatureMode::MetadataOnly;
    Hyperparams hyperparams;
};

// Audio max-margin model first, then metadata logistic regression.
std::vector<ClassifierSpec> default_classifiers();

struct ComparisonSpec {
    std::vector<ClassifierSpec> classifiers = default_classifiers();
    std::uint64_t seed = 0;
    bool tune = false;
};

// Models trained for one classifier: on the random-split training set (for
// the Randomized column) and on the designed-split training set (Designed and
// Matched columns).
struct TrainedPair {
    std::string classifier;
    LinearModel random_train;
    LinearModel designed_train;
    std::optional<TuningResult> random_tuning;
    std::optional<TuningResult> designed_tuning;
};

std::vector<TrainedPair> train_comparison_models(const Dataset& d, const SplitAssignment& designed,
                                                 const SplitAssignment& random, const ComparisonSpec& spec);

struct EvalCell {
    std::string classifier;
    Variant variant = Variant::Randomized;
    double auc = 0.0;
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
};

struct EvalReport {
    std::vector<ClassifierSpec> classifiers;
    std::vector<EvalCell> cells;  // classifier-major, variants in enum order
    std::string dataset_fingerprint;
    std::size_t dataset_size = 0;
    nlohmann::json seeds = nlohmann::json::object();

    const EvalCell& cell(const std::string& classifier, Variant v) const;
    double auc(const std::string& classifier, Variant v) const { return cell(classifier, v).auc; }
};

// SHA-256 of the dataset's canonical CSV serialization.
std::string dataset_fingerprint(const Dataset& d);

// Scores each trained pair on the three test variants. Every matched id must
// lie in the designed test set.
EvalReport evaluate_models(const Dataset& d, const SplitAssignment& designed, const SplitAssignment& random,
                           const std::vector<std::string>& matched_ids, const std::vector<ClassifierSpec>& specs,
                           const std::vector<TrainedPair>& models);

EvalReport run_comparison(const Dataset& d, const SplitAssignment& designed, const SplitAssignment& random,
                          const std::vector<std::string>& matched_ids, const ComparisonSpec& spec);

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);
std::string render_markdown(const EvalReport& r);

}  // namespace confeval
