#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "confeval/generator.hpp"
#include "confeval/pipeline.hpp"

using namespace confeval;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kMissing = 3, kStale = 4, kConfig = 5, kData = 6 };

int emit_error(const std::string& kind, const std::string& message, int code) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
    return code;
}

void print_outcome(const StageOutcome& o) {
    std::cout << to_string(o.stage) << ": ";
    if (o.skipped) {
        std::cout << "up to date\n";
        return;
    }
    std::cout << "wrote";
    for (const auto& f : o.outputs) std::cout << ' ' << f;
    std::cout << '\n';
    for (const auto& w : o.warnings) std::cout << "  warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confounding-aware evaluation pipeline for classifiers on observational health data"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = "confeval_out";
    bool tune = false;
    auto* seed_opt = app.add_option("--seed", seed, "Global seed; every stage seed derives from it");
    app.add_option("--config", config_path, "Pipeline config JSON")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_flag("--tune", tune, "Pick lambda by 5-fold cross-validation on each training set");
    seed_opt->capture_default_str();

    for (Stage s : all_stages()) {
        const std::string name(to_string(s));
        app.add_subcommand(name, "Run the " + name + " stage")->fallthrough();
    }
    app.add_subcommand("all", "Run every stage in order")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error("usage", e.what(), kUsage);
    }

    try {
        PipelineConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::exception& e) {
                return emit_error("config", "cannot parse '" + config_path + "': " + e.what(), kConfig);
            }
            cfg = pipeline_config_from_json(j);
        }
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (tune) cfg.tune = true;
        cfg.out_dir = out_dir;

        const std::string verb = app.get_subcommands().front()->get_name();
        if (verb == "all") {
            for (Stage s : all_stages()) print_outcome(run_stage(s, cfg));
        } else {
            print_outcome(run_stage(*parse_stage(verb), cfg));
        }
    } catch (const PipelineError& e) {
        std::cerr << e.to_json().dump() << '\n';
        switch (e.kind()) {
            case PipelineError::Kind::MissingPrerequisite: return kMissing;
            case PipelineError::Kind::Stale: return kStale;
            case PipelineError::Kind::Config: return kConfig;
            case PipelineError::Kind::Data: return kData;
        }
    } catch (const ConfigError& e) {
        return emit_error("config", e.what(), kConfig);
    } catch (const std::invalid_argument& e) {
        return emit_error("config", e.what(), kConfig);
    } catch (const json::exception& e) {
        return emit_error("config", e.what(), kConfig);
    } catch (const std::exception& e) {
        return emit_error("internal", e.what(), kInternal);
    }
    return kOk;
}
