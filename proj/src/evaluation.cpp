#include "confeval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "confeval/dataset_io.hpp"
#include "confeval/hash.hpp"
#include "confeval/rng.hpp"

namespace confeval {

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc_auc: " + std::to_string(scores.size()) + " scores but " +
                                    std::to_string(labels.size()) + " labels");
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");
        if (std::isnan(scores[i])) throw std::invalid_argument("roc_auc: NaN score");
        n_pos += labels[i];
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("roc_auc: labels contain a single class");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of 1-based midranks over positives, kept doubled so it stays integral.
    std::uint64_t twice_rank_sum = 0;
    for (std::size_t lo = 0; lo < order.size();) {
        std::size_t hi = lo + 1;
        while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
        const std::uint64_t twice_midrank = lo + 1 + hi;  // (lo+1) + hi
        std::size_t pos_in_group = 0;
        for (std::size_t k = lo; k < hi; ++k) pos_in_group += labels[order[k]];
        twice_rank_sum += twice_midrank * pos_in_group;
        lo = hi;
    }
    const double p = static_cast<double>(n_pos);
    const double u = static_cast<double>(twice_rank_sum) / 2.0 - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(n_neg));
}

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Randomized: return "randomized";
        case Variant::Designed: return "designed";
        case Variant::Matched: return "matched";
    }
    return "?";
}

std::vector<ClassifierSpec> default_classifiers() {
    return {
        {"max_margin_audio", "SVM - audio features", ModelKind::MaxMargin, FeatureMode::AudioOnly,
         default_hyperparams(ModelKind::MaxMargin)},
        {"logistic_metadata", "Logistic regression - metadata", ModelKind::Logistic, FeatureMode::MetadataOnly,
         default_hyperparams(ModelKind::Logistic)},
    };
}

namespace {

LinearModel fit_one(const Dataset& train, const ClassifierSpec& c, std::uint64_t seed, bool tune,
                    std::optional<TuningResult>& tuning) {
    Hyperparams hp = c.hyperparams;
    if (tune) {
        tuning = tune_lambda(train, c.kind, c.mode, hp, derive_seed(seed, "tune"));
        hp.lambda = tuning->best_lambda;
    }
    return train_model(train, c.kind, c.mode, hp, seed);
}

std::vector<std::uint8_t> labels_of(const Dataset& d) {
    std::vector<std::uint8_t> y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) y[i] = d[i].positive() ? 1 : 0;
    return y;
}

void check_alignment(const Dataset& d, const SplitAssignment& s, const char* what) {
    if (s.size() != d.size())
        throw std::invalid_argument(std::string(what) + " split covers " + std::to_string(s.size()) +
                                    " records, dataset has " + std::to_string(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i)
        if (s.ids[i] != d[i].id)
            throw std::invalid_argument(std::string(what) + " split is not aligned with the dataset at record '" +
                                        d[i].id + "'");
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

std::vector<TrainedPair> train_comparison_models(const Dataset& d, const SplitAssignment& designed,
                                                 const SplitAssignment& random, const ComparisonSpec& spec) {
    check_alignment(d, designed, "designed");
    check_alignment(d, random, "random");
    const Dataset random_train = d.subset(random.train_indices());
    const Dataset designed_train = d.subset(designed.train_indices());

    std::vector<TrainedPair> out;
    for (const auto& c : spec.classifiers) {
        TrainedPair p;
        p.classifier = c.name;
        p.random_train = fit_one(random_train, c, derive_seed(spec.seed, c.name + "/random"), spec.tune,
                                 p.random_tuning);
        p.designed_train = fit_one(designed_train, c, derive_seed(spec.seed, c.name + "/designed"), spec.tune,
                                   p.designed_tuning);
        out.push_back(std::move(p));
    }
    return out;
}

const EvalCell& EvalReport::cell(const std::string& classifier, Variant v) const {
    for (const auto& c : cells)
        if (c.classifier == classifier && c.variant == v) return c;
    throw std::out_of_range("no result for classifier '" + classifier + "' / " + std::string(to_string(v)));
}

std::string dataset_fingerprint(const Dataset& d) {
    std::ostringstream os;
    write_dataset(os, d);
    return sha256_hex(os.str());
}

EvalReport evaluate_models(const Dataset& d, const SplitAssignment& designed, const SplitAssignment& random,
                           const std::vector<std::string>& matched_ids, const std::vector<ClassifierSpec>& specs,
                           const std::vector<TrainedPair>& models) {
    check_alignment(d, designed, "designed");
    check_alignment(d, random, "random");

    std::vector<std::size_t> matched;
    for (const auto& id : matched_ids) {
        const auto i = d.find(id);
        if (!i) throw std::invalid_argument("matched id '" + id + "' is not in the dataset");
        if (designed.assignment[*i] != Assignment::Test)
            throw std::invalid_argument("matched id '" + id + "' is not in the designed test set");
        matched.push_back(*i);
    }
    std::sort(matched.begin(), matched.end());

    const Dataset sets[3] = {d.subset(random.test_indices()), d.subset(designed.test_indices()),
                             d.subset(matched)};

    EvalReport r;
    r.classifiers = specs;
    r.dataset_fingerprint = dataset_fingerprint(d);
    r.dataset_size = d.size();
    for (const auto& c : specs) {
        const auto it = std::find_if(models.begin(), models.end(),
                                     [&](const TrainedPair& p) { return p.classifier == c.name; });
        if (it == models.end()) throw std::invalid_argument("no trained models for classifier '" + c.name + "'");
        r.seeds[c.name] = {{"random_train", it->random_train.seed}, {"designed_train", it->designed_train.seed}};
        for (Variant v : {Variant::Randomized, Variant::Designed, Variant::Matched}) {
            const Dataset& test = sets[static_cast<int>(v)];
            const LinearModel& m = v == Variant::Randomized ? it->random_train : it->designed_train;
            const auto y = labels_of(test);
            EvalCell cell;
            cell.classifier = c.name;
            cell.variant = v;
            cell.n_positive = test.count_positive();
            cell.n_negative = test.size() - cell.n_positive;
            cell.auc = roc_auc(predict_scores(m, test), y);
            r.cells.push_back(cell);
        }
    }
    return r;
}

EvalReport run_comparison(const Dataset& d, const SplitAssignment& designed, const SplitAssignment& random,
                          const std::vector<std::string>& matched_ids, const ComparisonSpec& spec) {
    const auto models = train_comparison_models(d, designed, random, spec);
    return evaluate_models(d, designed, random, matched_ids, spec.classifiers, models);
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json classifiers = nlohmann::json::array();
    for (const auto& c : r.classifiers)
        classifiers.push_back({{"name", c.name},
                               {"label", c.label},
                               {"model", to_string(c.kind)},
                               {"features", to_string(c.mode)}});
    nlohmann::json results = nlohmann::json::array();
    for (const auto& c : r.cells)
        results.push_back({{"classifier", c.classifier},
                           {"variant", to_string(c.variant)},
                           {"auc", c.auc},
                           {"positives", c.n_positive},
                           {"negatives", c.n_negative},
                           // Reserved for bootstrap intervals.
                           {"ci_lower", nullptr},
                           {"ci_upper", nullptr}});
    return {{"schema", 1},
            {"dataset", {{"fingerprint_sha256", r.dataset_fingerprint}, {"records", r.dataset_size}}},
            {"classifiers", classifiers},
            {"results", results},
            {"seeds", r.seeds}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.dataset_fingerprint = j.at("dataset").at("fingerprint_sha256").get<std::string>();
    r.dataset_size = j.at("dataset").at("records").get<std::size_t>();
    r.seeds = j.at("seeds");
    for (const auto& c : j.at("classifiers")) {
        ClassifierSpec s;
        s.name = c.at("name").get<std::string>();
        s.label = c.at("label").get<std::string>();
        s.kind = c.at("model") == "logistic" ? ModelKind::Logistic : ModelKind::MaxMargin;
        s.mode = c.at("features") == "metadata_only" ? FeatureMode::MetadataOnly : FeatureMode::AudioOnly;
        r.classifiers.push_back(s);
    }
    for (const auto& c : j.at("results")) {
        EvalCell e;
        e.classifier = c.at("classifier").get<std::string>();
        const auto v = c.at("variant").get<std::string>();
        if (v == "randomized") e.variant = Variant::Randomized;
        else if (v == "designed") e.variant = Variant::Designed;
        else if (v == "matched") e.variant = Variant::Matched;
        else throw std::invalid_argument("unknown variant '" + v + "'");
        e.auc = c.at("auc").get<double>();
        e.n_positive = c.at("positives").get<std::size_t>();
        e.n_negative = c.at("negatives").get<std::size_t>();
        r.cells.push_back(e);
    }
    return r;
}

std::string render_markdown(const EvalReport& r) {
    std::ostringstream os;
    os << "# Area under the ROC curve\n\n";
    os << "Dataset: " << r.dataset_size << " records, sha256 `" << r.dataset_fingerprint << "`\n\n";
    os << "| Classifier | Randomized | Designed | Matched |\n";
    os << "|---|---|---|---|\n";
    for (const auto& c : r.classifiers) {
        os << "| " << c.label;
        for (Variant v : {Variant::Randomized, Variant::Designed, Variant::Matched})
            os << " | " << fixed3(r.auc(c.name, v));
        os << " |\n";
    }
    os << "\n## Test set sizes (positive / negative)\n\n";
    os << "| Classifier | Randomized | Designed | Matched |\n";
    os << "|---|---|---|---|\n";
    for (const auto& c : r.classifiers) {
        os << "| " << c.label;
        for (Variant v : {Variant::Randomized, Variant::Designed, Variant::Matched}) {
            const auto& cell = r.cell(c.name, v);
            os << " | " << cell.n_positive << " / " << cell.n_negative;
        }
        os << " |\n";
    }
    return os.str();
}

}  // namespace confeval
