#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "confeval/kernels.hpp"
#include "confeval/record.hpp"

namespace confeval {

enum class FeatureMode : std::uint8_t { MetadataOnly, AudioOnly };
enum class ModelKind : std::uint8_t { Logistic, MaxMargin };

std::string_view to_string(FeatureMode m);
std::string_view to_string(ModelKind k);

// Encoding plan fitted on a training set. Every column is encoded as
// (raw - center) / scale; binary and one-hot columns keep center 0, scale 1.
//
// MetadataOnly columns: age, gender one-hot, the 15 symptom flags, smoker
// one-hot, the 4 respiratory flags, height and weight bin midpoints.
// Recruitment source, viral load and the free-text categories are not used.
// AudioOnly columns: the raw feature vector.
struct FeatureSpec {
    FeatureMode mode = FeatureMode::MetadataOnly;
    std::vector<std::string> names;
    std::vector<double> center;
    std::vector<double> scale;

    std::size_t dimension() const { return names.size(); }
};

class EncodingError : public std::runtime_error {
public:
    EncodingError(const std::string& id, const std::string& what)
        : std::runtime_error("record '" + id + "': " + what), id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Column layout of `mode` before fitting (names only).
std::vector<std::string> feature_names(FeatureMode mode, std::size_t feature_dim);

// Fits centers and scales on `train` only. Zero-variance numeric columns get
// scale 1.
FeatureSpec fit_feature_spec(const Dataset& train, FeatureMode mode);

// Raw (unstandardized) encoding; throws EncodingError when a required field
// is missing.
std::vector<double> raw_features(const SubmissionRecord& r, FeatureMode mode, std::size_t feature_dim);
std::vector<double> encode_features(const SubmissionRecord& r, const FeatureSpec& spec);
Matrix encode_dataset(const Dataset& d, const FeatureSpec& spec);

struct Hyperparams {
    double lambda = 1e-2;
    double tolerance = 1e-6;     // gradient-norm stopping rule (logistic)
    std::size_t max_iterations = 5000;
    double initial_step = 0.5;   // eta0 in eta0 / sqrt(t) (max margin)
    double init_scale = 1e-2;    // sd of the seeded initial weights
};

Hyperparams default_hyperparams(ModelKind kind);

struct TrainDiagnostics {
    // Logistic: gradient norm reached the tolerance. Max margin: always true
    // once the iteration budget is spent; the best iterate is kept.
    bool converged = false;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    double objective = 0.0;
};

struct LinearModel {
    ModelKind kind = ModelKind::Logistic;
    std::vector<double> weights;
    double bias = 0.0;
    FeatureSpec spec;
    Hyperparams hyperparams;
    std::uint64_t seed = 0;
    TrainDiagnostics diagnostics;
};

// Solvers over an encoded problem with labels in {-1, +1}.
struct Solution {
    std::vector<double> weights;
    double bias = 0.0;
    TrainDiagnostics diagnostics;
};

// L2-regularized logistic regression by accelerated batch gradient descent
// with backtracking, stopping when |grad| <= tolerance.
Solution solve_logistic(const Matrix& x, std::span<const double> y, const Hyperparams& hp,
                        std::uint64_t seed);
// L2-regularized hinge loss by subgradient descent with step eta0 / sqrt(t).
Solution solve_max_margin(const Matrix& x, std::span<const double> y, const Hyperparams& hp,
                          std::uint64_t seed);

// +1 for positives, -1 for negatives.
std::vector<double> signed_labels(const Dataset& d);

// `spec` must already be fitted on `train`.
LinearModel train_logistic(const Dataset& train, const FeatureSpec& spec, const Hyperparams& hp,
                           std::uint64_t seed);
LinearModel train_max_margin(const Dataset& train, const FeatureSpec& spec, const Hyperparams& hp,
                             std::uint64_t seed);
// Fits the spec on `train` and dispatches on kind.
LinearModel train_model(const Dataset& train, ModelKind kind, FeatureMode mode, const Hyperparams& hp,
                        std::uint64_t seed);

// w.x + b per record.
std::vector<double> predict_scores(const LinearModel& m, const Dataset& d);

struct TuningResult {
    std::vector<double> grid;
    std::vector<double> mean_auc;  // per grid entry
    double best_lambda = 0.0;
};

inline constexpr std::size_t kTuningFolds = 5;
std::vector<double> default_lambda_grid();

// Stratified k-fold cross-validation over the lambda grid; the spec is refit
// on each fold's training part. Ties go to the larger lambda.
TuningResult tune_lambda(const Dataset& train, ModelKind kind, FeatureMode mode, Hyperparams hp,
                         std::uint64_t seed, const std::vector<double>& grid = default_lambda_grid(),
                         std::size_t folds = kTuningFolds);

nlohmann::json to_json(const FeatureSpec& s);
nlohmann::json to_json(const LinearModel& m);
LinearModel model_from_json(const nlohmann::json& j);

}  // namespace confeval
