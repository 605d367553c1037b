#include "confeval/pipeline.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "confeval/audit.hpp"
#include "confeval/dataset_io.hpp"
#include "confeval/eligibility.hpp"
#include "confeval/generator.hpp"
#include "confeval/hash.hpp"
#include "confeval/matcher.hpp"
#include "confeval/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace confeval {

namespace {

constexpr std::array<std::string_view, kStageCount> kStageNames = {
    "generate", "filter", "audit", "split", "match", "train", "evaluate", "report"};

using Kind = PipelineError::Kind;

}  // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view name) {
    for (std::size_t i = 0; i < kStageCount; ++i)
        if (kStageNames[i] == name) return static_cast<Stage>(i);
    return std::nullopt;
}

std::vector<Stage> all_stages() {
    std::vector<Stage> v;
    for (std::size_t i = 0; i < kStageCount; ++i) v.push_back(static_cast<Stage>(i));
    return v;
}

std::vector<Stage> prerequisites(Stage s) {
    switch (s) {
        case Stage::Generate: return {};
        case Stage::Filter: return {Stage::Generate};
        case Stage::Audit: return {Stage::Filter};
        case Stage::Split: return {Stage::Filter};
        case Stage::Match: return {Stage::Split};
        case Stage::Train: return {Stage::Split};
        case Stage::Evaluate: return {Stage::Train, Stage::Match};
        case Stage::Report: return {Stage::Evaluate};
    }
    return {};
}

std::vector<std::string> stage_inputs(Stage s) {
    switch (s) {
        case Stage::Generate: return {};
        case Stage::Filter: return {"dataset.csv"};
        case Stage::Audit: return {"eligible.csv"};
        case Stage::Split: return {"eligible.csv"};
        case Stage::Match: return {"eligible.csv", "split_designed.csv"};
        case Stage::Train: return {"eligible.csv", "split_designed.csv", "split_random.csv"};
        case Stage::Evaluate:
            return {"eligible.csv", "split_designed.csv", "split_random.csv", "matched.csv", "models.json"};
        case Stage::Report: return {"evaluation.json", "exclusions.json", "split_summary.json", "matching.json"};
    }
    return {};
}

std::vector<std::string> stage_outputs(Stage s) {
    switch (s) {
        case Stage::Generate: return {"dataset.csv"};
        case Stage::Filter: return {"eligible.csv", "exclusions.json"};
        case Stage::Audit: return {"audit.json", "audit.md", "submissions_weekly.csv"};
        case Stage::Split: return {"split_designed.csv", "split_random.csv", "split_summary.json"};
        case Stage::Match: return {"matched.csv", "matching.json"};
        case Stage::Train: return {"models.json"};
        case Stage::Evaluate: return {"evaluation.json"};
        case Stage::Report: return {"report.md"};
    }
    return {};
}

json PipelineError::to_json() const {
    static constexpr std::array<std::string_view, 4> kKinds = {"missing_prerequisite", "stale_upstream",
                                                               "config", "data"};
    json e = {{"kind", kKinds[static_cast<std::size_t>(kind_)]},
              {"stage", confeval::to_string(stage_)},
              {"message", what()}};
    if (!related_.empty()) e["related"] = related_;
    return {{"error", e}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("pipeline config must be a JSON object");
    PipelineConfig c;
    c.generator.reset();
    for (const auto& [key, value] : j.items()) {
        if (key == "input") c.input = fs::path(value.get<std::string>());
        else if (key == "generator") {
            if (!value.is_object()) throw std::invalid_argument("'generator' must be an object");
            c.generator = value;
        } else if (key == "split") c.split = split_config_from_json(value);
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else if (key == "tune") c.tune = value.get<bool>();
        else if (key == "classifiers") {
            for (const auto& [name, hp] : value.items()) {
                auto it = std::find_if(c.classifiers.begin(), c.classifiers.end(),
                                       [&](const ClassifierSpec& s) { return s.name == name; });
                if (it == c.classifiers.end()) throw std::invalid_argument("unknown classifier '" + name + "'");
                for (const auto& [hk, hv] : hp.items()) {
                    if (hk == "lambda") it->hyperparams.lambda = hv.get<double>();
                    else if (hk == "tolerance") it->hyperparams.tolerance = hv.get<double>();
                    else if (hk == "max_iterations") it->hyperparams.max_iterations = hv.get<std::size_t>();
                    else if (hk == "initial_step") it->hyperparams.initial_step = hv.get<double>();
                    else if (hk == "init_scale") it->hyperparams.init_scale = hv.get<double>();
                    else throw std::invalid_argument("unknown hyperparameter '" + hk + "' for " + name);
                }
            }
        } else {
            throw std::invalid_argument("unknown pipeline config key '" + key + "'");
        }
    }
    if (!c.input && !c.generator) c.generator = json::object();
    validate(c);
    return c;
}

void validate(const PipelineConfig& cfg) {
    if (cfg.input.has_value() == cfg.generator.has_value())
        throw std::invalid_argument("pipeline config needs exactly one of 'input' and 'generator'");
    for (const auto& c : cfg.classifiers) {
        if (!(c.hyperparams.lambda >= 0.0)) throw std::invalid_argument(c.name + ": lambda must be >= 0");
        if (!(c.hyperparams.tolerance > 0.0)) throw std::invalid_argument(c.name + ": tolerance must be > 0");
        if (c.hyperparams.max_iterations == 0) throw std::invalid_argument(c.name + ": max_iterations must be > 0");
        if (!(c.hyperparams.initial_step > 0.0)) throw std::invalid_argument(c.name + ": initial_step must be > 0");
    }
}

std::uint64_t stage_seed(const PipelineConfig& cfg, Stage s) { return derive_seed(cfg.seed, to_string(s)); }

namespace {

fs::path artifact(const PipelineConfig& cfg, std::string_view name) { return cfg.out_dir / std::string(name); }

GeneratorConfig resolved_generator(const PipelineConfig& cfg) {
    const std::uint64_t seed = stage_seed(cfg, Stage::Generate);
    GeneratorConfig g = apply_json(default_paper_mimic_config(seed), *cfg.generator);
    g.seed = seed;
    return g;
}

SplitConfig resolved_split(const PipelineConfig& cfg) {
    SplitConfig s = cfg.split;
    s.seed = stage_seed(cfg, Stage::Split);
    return s;
}

json hyperparams_json(const Hyperparams& h) {
    return {{"lambda", h.lambda},
            {"tolerance", h.tolerance},
            {"max_iterations", h.max_iterations},
            {"initial_step", h.initial_step},
            {"init_scale", h.init_scale}};
}

// Everything in the config that a stage's outputs depend on.
json stage_params(Stage s, const PipelineConfig& cfg) {
    json p = json::object();
    if (s == Stage::Generate || s == Stage::Split || s == Stage::Match || s == Stage::Train)
        p["seed"] = stage_seed(cfg, s);
    switch (s) {
        case Stage::Generate:
            if (cfg.input) p["input"] = cfg.input->string();
            else p["generator"] = to_json(resolved_generator(cfg));
            break;
        case Stage::Audit: p["threshold"] = kDefaultAuditThreshold; break;
        case Stage::Split: p["split"] = to_json(resolved_split(cfg)); break;
        case Stage::Train: {
            json cs = json::array();
            for (const auto& c : cfg.classifiers)
                cs.push_back({{"name", c.name},
                              {"label", c.label},
                              {"model", to_string(c.kind)},
                              {"features", to_string(c.mode)},
                              {"hyperparameters", hyperparams_json(c.hyperparams)}});
            p["classifiers"] = cs;
            p["tune"] = cfg.tune;
            break;
        }
        default: break;
    }
    return p;
}

json input_hashes(Stage s, const PipelineConfig& cfg) {
    json h = json::object();
    if (s == Stage::Generate && cfg.input) {
        if (!fs::exists(*cfg.input))
            throw PipelineError(Kind::Data, s, cfg.input->string(),
                                "input dataset '" + cfg.input->string() + "' does not exist");
        h["input"] = sha256_file(*cfg.input);
    }
    for (const auto& f : stage_inputs(s)) {
        const auto p = artifact(cfg, f);
        if (fs::exists(p)) h[f] = sha256_file(p);
    }
    return h;
}

json load_manifest(const PipelineConfig& cfg) {
    const auto p = artifact(cfg, kManifestName);
    if (!fs::exists(p)) return {{"version", kVersion}, {"stages", json::object()}};
    std::ifstream in(p);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt manifest '" + p.string() + "': " + e.what());
    }
}

void save_manifest(const PipelineConfig& cfg, const json& m) {
    const auto p = artifact(cfg, kManifestName);
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << m.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write manifest '" + p.string() + "'");
    }
    fs::rename(tmp, p);
}

// Throws unless stage `p`'s recorded artifacts are intact and consistent
// with the current config and its own inputs, transitively.
void ensure_fresh(Stage p, Stage requester, const PipelineConfig& cfg, const json& manifest) {
    const std::string pname(to_string(p));
    const std::string rerun = "re-run `confeval " + pname + "` (or `confeval all`)";
    for (Stage q : prerequisites(p)) ensure_fresh(q, requester, cfg, manifest);
    const auto& stages = manifest.at("stages");
    if (!stages.contains(pname))
        throw PipelineError(Kind::MissingPrerequisite, requester, pname,
                            "stage '" + std::string(to_string(requester)) + "' requires stage '" + pname +
                                "', which has not been run; run `confeval " + pname + "` first");
    const auto& entry = stages.at(pname);
    for (const auto& f : stage_outputs(p)) {
        const auto path = artifact(cfg, f);
        if (!fs::exists(path))
            throw PipelineError(Kind::MissingPrerequisite, requester, pname,
                                "artifact '" + f + "' of stage '" + pname + "' is missing; " + rerun);
        if (sha256_file(path) != entry.at("outputs").value(f, ""))
            throw PipelineError(Kind::Stale, requester, pname,
                                "artifact '" + f + "' was modified after stage '" + pname + "' wrote it; " + rerun);
    }
    if (entry.at("params") != stage_params(p, cfg))
        throw PipelineError(Kind::Stale, requester, pname,
                            "configuration of stage '" + pname + "' changed since it last ran; " + rerun);
    if (entry.at("inputs") != input_hashes(p, cfg))
        throw PipelineError(Kind::Stale, requester, pname,
                            "inputs of stage '" + pname + "' changed since it last ran; " + rerun);
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
    return json::parse(in);
}

Dataset load_eligible(const PipelineConfig& cfg) { return parse_dataset(artifact(cfg, "eligible.csv")); }

void run_generate(const PipelineConfig& cfg, StageOutcome&) {
    const Dataset d = cfg.input ? parse_dataset(*cfg.input) : generate_dataset(resolved_generator(cfg));
    write_dataset(artifact(cfg, "dataset.csv"), d);
}

void run_filter(const PipelineConfig& cfg, StageOutcome&) {
    const Dataset d = parse_dataset(artifact(cfg, "dataset.csv"));
    const FilterResult fr = apply_eligibility_filter(d);
    const MissingDataPartition part = missing_data_partition(d);
    write_dataset(artifact(cfg, "eligible.csv"), fr.eligible);
    json j = to_json(fr.report);
    j["missing_data_partition"] = {{"missing_audio", part.missing_audio.size()},
                                   {"missing_metadata", part.missing_meta.size()},
                                   {"complete", part.complete.size()}};
    write_text(artifact(cfg, "exclusions.json"), j.dump(2) + "\n");
}

void run_audit(const PipelineConfig& cfg, StageOutcome&) {
    const Dataset d = load_eligible(cfg);
    const AuditReport r = build_audit_report(d);
    write_text(artifact(cfg, "audit.json"), to_json(r).dump(2) + "\n");
    write_text(artifact(cfg, "audit.md"), render_markdown(r));
    write_text(artifact(cfg, "submissions_weekly.csv"), render_csv(submissions_over_time(d, TimeBin::Week)));
}

void run_split(const PipelineConfig& cfg, StageOutcome& o) {
    const Dataset d = load_eligible(cfg);
    const SplitConfig sc = resolved_split(cfg);
    const SplitAssignment designed = build_designed_split(d, sc);
    const SplitAssignment random = build_random_split(d, sc.test_fraction, sc.seed);
    write_split_csv(artifact(cfg, "split_designed.csv"), designed);
    write_split_csv(artifact(cfg, "split_random.csv"), random);
    const json j = {{"config", to_json(sc)},
                    {"designed", split_summary_json(designed)},
                    {"random", split_summary_json(random)}};
    write_text(artifact(cfg, "split_summary.json"), j.dump(2) + "\n");
    o.warnings = designed.warnings;
}

void run_match(const PipelineConfig& cfg, StageOutcome& o) {
    const Dataset d = load_eligible(cfg);
    const SplitAssignment designed = read_split_csv(artifact(cfg, "split_designed.csv"), d);
    const Dataset test = d.subset(designed.test_indices());
    const MatchedSet m = build_matched_set(test, stage_seed(cfg, Stage::Match));
    write_matched_csv(artifact(cfg, "matched.csv"), m);
    write_text(artifact(cfg, "matching.json"), balance_json(m).dump(2) + "\n");
    o.warnings = m.warnings;
}

json tuning_json(const std::optional<TuningResult>& t) {
    if (!t) return nullptr;
    return {{"grid", t->grid}, {"mean_auc", t->mean_auc}, {"best_lambda", t->best_lambda}};
}

std::optional<TuningResult> tuning_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    TuningResult t;
    t.grid = j.at("grid").get<std::vector<double>>();
    t.mean_auc = j.at("mean_auc").get<std::vector<double>>();
    t.best_lambda = j.at("best_lambda").get<double>();
    return t;
}

void run_train(const PipelineConfig& cfg, StageOutcome& o) {
    const Dataset d = load_eligible(cfg);
    const auto designed = read_split_csv(artifact(cfg, "split_designed.csv"), d);
    const auto random = read_split_csv(artifact(cfg, "split_random.csv"), d);
    ComparisonSpec spec;
    spec.classifiers = cfg.classifiers;
    spec.seed = stage_seed(cfg, Stage::Train);
    spec.tune = cfg.tune;
    const auto models = train_comparison_models(d, designed, random, spec);

    json cs = json::array();
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& c = cfg.classifiers[i];
        const auto& m = models[i];
        for (const auto* lm : {&m.random_train, &m.designed_train})
            if (lm->kind == ModelKind::Logistic && !lm->diagnostics.converged)
                o.warnings.push_back(c.name + ": logistic regression stopped after " +
                                     std::to_string(lm->diagnostics.iterations) +
                                     " iterations with gradient norm " +
                                     format_double(lm->diagnostics.gradient_norm));
        cs.push_back({{"name", c.name},
                      {"label", c.label},
                      {"random_train", to_json(m.random_train)},
                      {"designed_train", to_json(m.designed_train)},
                      {"random_tuning", tuning_json(m.random_tuning)},
                      {"designed_tuning", tuning_json(m.designed_tuning)}});
    }
    write_text(artifact(cfg, "models.json"), json{{"classifiers", cs}}.dump(2) + "\n");
}

void run_evaluate(const PipelineConfig& cfg, StageOutcome&) {
    const Dataset d = load_eligible(cfg);
    const auto designed = read_split_csv(artifact(cfg, "split_designed.csv"), d);
    const auto random = read_split_csv(artifact(cfg, "split_random.csv"), d);
    const MatchedSet matched = read_matched_csv(artifact(cfg, "matched.csv"), d);
    const json mj = read_json(artifact(cfg, "models.json"));

    std::vector<ClassifierSpec> specs;
    std::vector<TrainedPair> models;
    for (const auto& c : mj.at("classifiers")) {
        TrainedPair p;
        p.classifier = c.at("name").get<std::string>();
        p.random_train = model_from_json(c.at("random_train"));
        p.designed_train = model_from_json(c.at("designed_train"));
        p.random_tuning = tuning_from_json(c.at("random_tuning"));
        p.designed_tuning = tuning_from_json(c.at("designed_tuning"));
        ClassifierSpec s;
        s.name = p.classifier;
        s.label = c.at("label").get<std::string>();
        s.kind = p.designed_train.kind;
        s.mode = p.designed_train.spec.mode;
        s.hyperparams = p.designed_train.hyperparams;
        specs.push_back(std::move(s));
        models.push_back(std::move(p));
    }
    const EvalReport r = evaluate_models(d, designed, random, matched.ids, specs, models);
    write_text(artifact(cfg, "evaluation.json"), to_json(r).dump(2) + "\n");
}

void run_report(const PipelineConfig& cfg, StageOutcome&) {
    const EvalReport r = report_from_json(read_json(artifact(cfg, "evaluation.json")));
    const json ex = read_json(artifact(cfg, "exclusions.json"));
    const json sp = read_json(artifact(cfg, "split_summary.json"));
    const json mt = read_json(artifact(cfg, "matching.json"));

    std::ostringstream os;
    os << render_markdown(r);
    os << "\n## Eligibility\n\n";
    os << "Input records: " << ex.at("input_count").get<std::size_t>()
       << ", eligible: " << ex.at("surviving").get<std::size_t>() << "\n\n";
    os << "| Exclusion | Records |\n|---|---|\n";
    for (const auto& reason : ex.at("precedence"))
        os << "| " << reason.get<std::string>() << " | "
           << ex.at("excluded").at(reason.get<std::string>()).get<std::size_t>() << " |\n";

    const auto& dsum = sp.at("designed");
    os << "\n## Designed test set\n\n";
    os << "Test: " << dsum.at("test").get<std::size_t>() << " of " << dsum.at("records").get<std::size_t>()
       << " records\n\n";
    os << "| Step | Records added |\n|---|---|\n";
    for (const auto& [step, n] : dsum.at("added_by_step").items())
        os << "| " << step << " | " << n.get<std::size_t>() << " |\n";
    for (const auto& w : dsum.at("warnings")) os << "\nWarning: " << w.get<std::string>() << "\n";

    os << "\n## Matched test set\n\n";
    os << "Positives: " << mt.at("positives").get<std::size_t>()
       << ", negatives: " << mt.at("negatives").get<std::size_t>()
       << ", strata with matches: " << mt.at("strata_with_matches").get<std::size_t>() << "\n";
    write_text(artifact(cfg, "report.md"), os.str());
}

void execute(Stage s, const PipelineConfig& cfg, StageOutcome& o) {
    switch (s) {
        case Stage::Generate: return run_generate(cfg, o);
        case Stage::Filter: return run_filter(cfg, o);
        case Stage::Audit: return run_audit(cfg, o);
        case Stage::Split: return run_split(cfg, o);
        case Stage::Match: return run_match(cfg, o);
        case Stage::Train: return run_train(cfg, o);
        case Stage::Evaluate: return run_evaluate(cfg, o);
        case Stage::Report: return run_report(cfg, o);
    }
}

}  // namespace

StageOutcome run_stage(Stage s, const PipelineConfig& cfg) {
    validate(cfg);
    fs::create_directories(cfg.out_dir);
    json manifest = load_manifest(cfg);
    for (Stage p : prerequisites(s)) ensure_fresh(p, s, cfg, manifest);

    StageOutcome o;
    o.stage = s;
    o.outputs = stage_outputs(s);
    const std::string name(to_string(s));
    const json params = stage_params(s, cfg);
    const json inputs = input_hashes(s, cfg);

    auto& stages = manifest["stages"];
    if (stages.contains(name)) {
        const auto& e = stages.at(name);
        bool intact = e.at("params") == params && e.at("inputs") == inputs;
        for (const auto& f : o.outputs) {
            if (!intact) break;
            const auto p = artifact(cfg, f);
            intact = fs::exists(p) && sha256_file(p) == e.at("outputs").value(f, "");
        }
        if (intact) {
            o.skipped = true;
            return o;
        }
    }

    try {
        execute(s, cfg, o);
    } catch (const PipelineError&) {
        throw;
    } catch (const ParseError& e) {
        throw PipelineError(Kind::Data, s, "", e.what());
    } catch (const DataError& e) {
        throw PipelineError(Kind::Data, s, "", e.what());
    } catch (const SplitError& e) {
        throw PipelineError(Kind::Data, s, "", e.what());
    } catch (const TrainingError& e) {
        throw PipelineError(Kind::Data, s, "", e.what());
    } catch (const ConfigError& e) {
        throw PipelineError(Kind::Config, s, "", e.what());
    }

    json outputs = json::object();
    for (const auto& f : o.outputs) outputs[f] = sha256_file(artifact(cfg, f));
    stages[name] = {{"params", params},
                    {"inputs", inputs},
                    {"outputs", outputs},
                    {"warnings", o.warnings}};
    manifest["version"] = kVersion;
    save_manifest(cfg, manifest);
    return o;
}

std::vector<StageOutcome> run_all(const PipelineConfig& cfg) {
    std::vector<StageOutcome> out;
    for (Stage s : all_stages()) out.push_back(run_stage(s, cfg));
    return out;
}

}  // namespace confeval
