#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "confeval/evaluation.hpp"
#include "confeval/split.hpp"

namespace confeval {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Stage : std::uint8_t { Generate, Filter, Audit, Split, Match, Train, Evaluate, Report };
inline constexpr std::size_t kStageCount = 8;

std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view name);
// In dependency order.
std::vector<Stage> all_stages();
std::vector<Stage> prerequisites(Stage s);
// Artifact file names, relative to the output directory.
std::vector<std::string> stage_inputs(Stage s);
std::vector<std::string> stage_outputs(Stage s);

struct PipelineConfig {
    // Exactly one is set. `generator` is overlaid on the paper-mimic defaults;
    // its seed is always replaced by the generate-stage seed.
    std::optional<std::filesystem::path> input;
    std::optional<nlohmann::json> generator = nlohmann::json::object();
    SplitConfig split;
    std::vector<ClassifierSpec> classifiers = default_classifiers();
    bool tune = false;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "confeval_out";
};

// Keys: input | generator, split, classifiers, seed, tune. Unknown keys are
// rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
void validate(const PipelineConfig& cfg);

// Seed of a stage: derive_seed(global, stage name).
std::uint64_t stage_seed(const PipelineConfig& cfg, Stage s);

class PipelineError : public std::runtime_error {
public:
    enum class Kind { MissingPrerequisite, Stale, Config, Data };
    PipelineError(Kind kind, Stage stage, std::string related, const std::string& what)
        : std::runtime_error(what), kind_(kind), stage_(stage), related_(std::move(related)) {}
    Kind kind() const { return kind_; }
    Stage stage() const { return stage_; }
    // The prerequisite stage or artifact the error is about, if any.
    const std::string& related() const { return related_; }
    nlohmann::json to_json() const;

private:
    Kind kind_;
    Stage stage_;
    std::string related_;
};

struct StageOutcome {
    Stage stage = Stage::Generate;
    bool skipped = false;  // inputs and parameters unchanged
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
};

// Runs one stage after checking that every upstream stage's artifacts are
// present and consistent with the manifest and the current config.
StageOutcome run_stage(Stage s, const PipelineConfig& cfg);
std::vector<StageOutcome> run_all(const PipelineConfig& cfg);

inline constexpr std::string_view kManifestName = "manifest.json";

}  // namespace confeval
