#include "confeval/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confeval/evaluation.hpp"
#include "confeval/rng.hpp"

namespace confeval {

std::string_view to_string(FeatureMode m) {
    return m == FeatureMode::MetadataOnly ? "metadata_only" : "audio_only";
}

std::string_view to_string(ModelKind k) { return k == ModelKind::Logistic ? "logistic" : "max_margin"; }

namespace {

FeatureMode parse_mode(const std::string& s) {
    if (s == "metadata_only") return FeatureMode::MetadataOnly;
    if (s == "audio_only") return FeatureMode::AudioOnly;
    throw std::invalid_argument("unknown feature mode '" + s + "'");
}

ModelKind parse_kind(const std::string& s) {
    if (s == "logistic") return ModelKind::Logistic;
    if (s == "max_margin") return ModelKind::MaxMargin;
    throw std::invalid_argument("unknown model kind '" + s + "'");
}

// Columns standardized with training statistics.
std::vector<bool> numeric_columns(FeatureMode mode, std::size_t dim) {
    std::vector<bool> numeric(dim, mode == FeatureMode::AudioOnly);
    if (mode == FeatureMode::MetadataOnly) {
        numeric[0] = true;        // age
        numeric[dim - 2] = true;  // height
        numeric[dim - 1] = true;  // weight
    }
    return numeric;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Parameters are packed as [w..., b].
struct Packed {
    const Matrix& x;
    std::span<const double> y;
    double lambda;
    ModelKind kind;

    Objective eval(const std::vector<double>& theta) const {
        const std::span<const double> w(theta.data(), x.cols);
        return kind == ModelKind::Logistic ? kernels::logistic_parallel(x, y, w, theta[x.cols], lambda)
                                           : kernels::hinge_parallel(x, y, w, theta[x.cols], lambda);
    }
};

std::vector<double> flat_gradient(const Objective& o) {
    std::vector<double> g = o.grad_w;
    g.push_back(o.grad_b);
    return g;
}

std::vector<double> initial_theta(std::size_t dim, const Hyperparams& hp, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> theta(dim + 1);
    for (auto& t : theta) t = hp.init_scale * rng.normal();
    return theta;
}

void check_problem(const Matrix& x, std::span<const double> y) {
    if (x.rows == 0) throw TrainingError("training set is empty");
    if (y.size() != x.rows) throw TrainingError("label count does not match rows");
    bool pos = false, neg = false;
    for (double v : y) {
        if (v == 1.0) pos = true;
        else if (v == -1.0) neg = true;
        else throw TrainingError("labels must be -1 or +1");
    }
    if (!pos || !neg) throw TrainingError("training set contains a single class");
}

// Largest eigenvalue of (1/n) [X 1]^T [X 1] by power iteration.
double gram_spectral_norm(const Matrix& x) {
    const std::size_t d = x.cols;
    std::vector<double> v(d + 1, 1.0 / std::sqrt(static_cast<double>(d + 1)));
    double lambda = 0.0;
    for (int it = 0; it < 50; ++it) {
        const auto u = kernels::scores_parallel(x, std::span<const double>(v.data(), d), v[d]);
        std::vector<double> nv(d + 1, 0.0);
        for (std::size_t i = 0; i < x.rows; ++i) {
            const auto xi = x.row(i);
            for (std::size_t j = 0; j < d; ++j) nv[j] += u[i] * xi[j];
            nv[d] += u[i];
        }
        for (auto& e : nv) e /= static_cast<double>(x.rows);
        const double nrm = norm2(nv);
        if (nrm == 0.0) return 0.0;
        for (std::size_t j = 0; j <= d; ++j) v[j] = nv[j] / nrm;
        if (std::abs(nrm - lambda) <= 1e-6 * nrm) return nrm;
        lambda = nrm;
    }
    return lambda;
}

}  // namespace

std::vector<std::string> feature_names(FeatureMode mode, std::size_t feature_dim) {
    std::vector<std::string> names;
    if (mode == FeatureMode::AudioOnly) {
        for (std::size_t j = 0; j < feature_dim; ++j) names.push_back("f" + std::to_string(j));
        return names;
    }
    names.emplace_back("age");
    for (auto g : enum_values<Gender>()) names.push_back("gender=" + std::string(to_string(g)));
    for (auto s : symptom_names()) names.emplace_back(s);
    for (auto s : enum_values<SmokerStatus>()) names.push_back("smoker_status=" + std::string(to_string(s)));
    for (auto s : resp_names()) names.emplace_back(s);
    names.emplace_back("height_cm");
    names.emplace_back("weight_kg");
    return names;
}

std::vector<double> raw_features(const SubmissionRecord& r, FeatureMode mode, std::size_t feature_dim) {
    if (mode == FeatureMode::AudioOnly) {
        if (!r.audio_features) throw EncodingError(r.id, "audio features missing");
        if (r.audio_features->size() != feature_dim)
            throw EncodingError(r.id, "audio feature dimension " + std::to_string(r.audio_features->size()) +
                                          " != " + std::to_string(feature_dim));
        return *r.audio_features;
    }
    if (!r.smoker_status) throw EncodingError(r.id, "smoker_status missing");
    const auto h = r.height_cm();
    if (!h) throw EncodingError(r.id, "height_bin missing");
    const auto w = r.weight_kg();
    if (!w) throw EncodingError(r.id, "weight_bin missing");

    std::vector<double> v;
    v.reserve(1 + 4 + kSymptomCount + 4 + kRespCount + 2);
    v.push_back(r.age);
    for (auto g : enum_values<Gender>()) v.push_back(r.gender == g ? 1.0 : 0.0);
    for (bool s : r.symptoms) v.push_back(s ? 1.0 : 0.0);
    for (auto s : enum_values<SmokerStatus>()) v.push_back(*r.smoker_status == s ? 1.0 : 0.0);
    for (bool c : r.respiratory) v.push_back(c ? 1.0 : 0.0);
    v.push_back(*h);
    v.push_back(*w);
    return v;
}

FeatureSpec fit_feature_spec(const Dataset& train, FeatureMode mode) {
    if (train.empty()) throw TrainingError("cannot fit features on an empty training set");
    FeatureSpec spec;
    spec.mode = mode;
    spec.names = feature_names(mode, train.feature_dim());
    const std::size_t dim = spec.names.size();

    Matrix raw(train.size(), dim);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto v = raw_features(train[i], mode, train.feature_dim());
        std::copy(v.begin(), v.end(), raw.row(i).begin());
    }
    std::vector<double> mean, sd;
    kernels::column_moments_parallel(raw, mean, sd);

    const auto numeric = numeric_columns(mode, dim);
    spec.center.assign(dim, 0.0);
    spec.scale.assign(dim, 1.0);
    for (std::size_t j = 0; j < dim; ++j) {
        if (!numeric[j]) continue;
        spec.center[j] = mean[j];
        spec.scale[j] = sd[j] > 0.0 ? sd[j] : 1.0;
    }
    return spec;
}

std::vector<double> encode_features(const SubmissionRecord& r, const FeatureSpec& spec) {
    const std::size_t audio_dim = spec.mode == FeatureMode::AudioOnly ? spec.dimension() : 0;
    auto v = raw_features(r, spec.mode, audio_dim);
    if (v.size() != spec.dimension())
        throw EncodingError(r.id, "encoded dimension " + std::to_string(v.size()) + " != spec dimension " +
                                      std::to_string(spec.dimension()));
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = (v[j] - spec.center[j]) / spec.scale[j];
    return v;
}

Matrix encode_dataset(const Dataset& d, const FeatureSpec& spec) {
    Matrix x(d.size(), spec.dimension());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto v = encode_features(d[i], spec);
        std::copy(v.begin(), v.end(), x.row(i).begin());
    }
    return x;
}

Hyperparams default_hyperparams(ModelKind kind) {
    Hyperparams hp;
    if (kind == ModelKind::MaxMargin) hp.max_iterations = 2000;
    return hp;
}

Solution solve_logistic(const Matrix& x, std::span<const double> y, const Hyperparams& hp,
                        std::uint64_t seed) {
    check_problem(x, y);
    const Packed p{x, y, hp.lambda, ModelKind::Logistic};
    const std::size_t d = x.cols;

    // Lipschitz constant of the gradient: sigma_max / 4 + lambda. Backtracking
    // below corrects an underestimate.
    double lip = std::max(gram_spectral_norm(x) / 4.0 + hp.lambda, 1e-12);

    std::vector<double> xk = initial_theta(d, hp, seed);
    Objective ox = p.eval(xk);
    std::vector<double> yk = xk;
    Objective oy = ox;
    double t = 1.0;

    Solution sol;
    std::size_t it = 0;
    for (; it < hp.max_iterations; ++it) {
        const auto g = flat_gradient(oy);
        const double gn = norm2(g);
        if (gn <= hp.tolerance) {
            xk = yk;
            ox = oy;
            sol.diagnostics.converged = true;
            break;
        }
        std::vector<double> xn(d + 1);
        Objective on;
        for (;;) {
            for (std::size_t j = 0; j <= d; ++j) xn[j] = yk[j] - g[j] / lip;
            on = p.eval(xn);
            const double slack = 1e-14 * std::abs(oy.value);
            if (on.value <= oy.value - 0.5 * gn * gn / lip + slack) break;
            lip *= 2.0;
        }
        const double gn_new = norm2(flat_gradient(on));
        if (gn_new <= hp.tolerance) {
            xk = std::move(xn);
            ox = std::move(on);
            sol.diagnostics.converged = true;
            ++it;
            break;
        }
        if (on.value > ox.value) {
            // Momentum overshoot: restart from the new point.
            t = 1.0;
            yk = xn;
            oy = on;
        } else {
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double beta = (t - 1.0) / tn;
            for (std::size_t j = 0; j <= d; ++j) yk[j] = xn[j] + beta * (xn[j] - xk[j]);
            oy = p.eval(yk);
            t = tn;
        }
        xk = std::move(xn);
        ox = std::move(on);
    }
    if (!sol.diagnostics.converged && oy.value < ox.value) {
        xk = yk;
        ox = oy;
    }
    sol.weights.assign(xk.begin(), xk.begin() + static_cast<std::ptrdiff_t>(d));
    sol.bias = xk[d];
    sol.diagnostics.iterations = it;
    sol.diagnostics.gradient_norm = norm2(flat_gradient(ox));
    sol.diagnostics.objective = ox.value;
    return sol;
}

Solution solve_max_margin(const Matrix& x, std::span<const double> y, const Hyperparams& hp,
                          std::uint64_t seed) {
    check_problem(x, y);
    const Packed p{x, y, hp.lambda, ModelKind::MaxMargin};
    const std::size_t d = x.cols;

    std::vector<double> theta = initial_theta(d, hp, seed);
    std::vector<double> best = theta;
    double best_value = std::numeric_limits<double>::infinity();
    double best_gn = 0.0;
    for (std::size_t t = 1; t <= hp.max_iterations + 1; ++t) {
        const Objective o = p.eval(theta);
        const auto g = flat_gradient(o);
        if (o.value < best_value) {
            best_value = o.value;
            best = theta;
            best_gn = norm2(g);
        }
        if (t > hp.max_iterations) break;
        const double step = hp.initial_step / std::sqrt(static_cast<double>(t));
        for (std::size_t j = 0; j <= d; ++j) theta[j] -= step * g[j];
    }
    Solution sol;
    sol.weights.assign(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(d));
    sol.bias = best[d];
    sol.diagnostics.converged = true;
    sol.diagnostics.iterations = hp.max_iterations;
    sol.diagnostics.gradient_norm = best_gn;
    sol.diagnostics.objective = best_value;
    return sol;
}

std::vector<double> signed_labels(const Dataset& d) {
    std::vector<double> y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) y[i] = d[i].positive() ? 1.0 : -1.0;
    return y;
}

namespace {

LinearModel train_with(const Dataset& train, const FeatureSpec& spec, const Hyperparams& hp,
                       std::uint64_t seed, ModelKind kind) {
    if (train.count_positive() == 0 || train.count_positive() == train.size())
        throw TrainingError("training set contains a single class");
    const Matrix x = encode_dataset(train, spec);
    const auto y = signed_labels(train);
    const Solution s = kind == ModelKind::Logistic ? solve_logistic(x, y, hp, seed)
                                                   : solve_max_margin(x, y, hp, seed);
    LinearModel m;
    m.kind = kind;
    m.weights = s.weights;
    m.bias = s.bias;
    m.spec = spec;
    m.hyperparams = hp;
    m.seed = seed;
    m.diagnostics = s.diagnostics;
    return m;
}

}  // namespace

LinearModel train_logistic(const Dataset& train, const FeatureSpec& spec, const Hyperparams& hp,
                           std::uint64_t seed) {
    return train_with(train, spec, hp, seed, ModelKind::Logistic);
}

LinearModel train_max_margin(const Dataset& train, const FeatureSpec& spec, const Hyperparams& hp,
                             std::uint64_t seed) {
    return train_with(train, spec, hp, seed, ModelKind::MaxMargin);
}

LinearModel train_model(const Dataset& train, ModelKind kind, FeatureMode mode, const Hyperparams& hp,
                        std::uint64_t seed) {
    return train_with(train, fit_feature_spec(train, mode), hp, seed, kind);
}

std::vector<double> predict_scores(const LinearModel& m, const Dataset& d) {
    if (m.weights.size() != m.spec.dimension())
        throw std::invalid_argument("model weight dimension does not match its feature spec");
    const Matrix x = encode_dataset(d, m.spec);
    return kernels::scores_parallel(x, m.weights, m.bias);
}

std::vector<double> default_lambda_grid() { return {1e-4, 1e-3, 1e-2, 1e-1}; }

TuningResult tune_lambda(const Dataset& train, ModelKind kind, FeatureMode mode, Hyperparams hp,
                         std::uint64_t seed, const std::vector<double>& grid, std::size_t folds) {
    if (grid.empty()) throw std::invalid_argument("empty lambda grid");
    if (folds < 2) throw std::invalid_argument("need at least 2 folds");

    // Stratified fold assignment.
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < train.size(); ++i) (train[i].positive() ? pos : neg).push_back(i);
    if (pos.size() < folds || neg.size() < folds)
        throw TrainingError("too few records of one class for " + std::to_string(folds) + "-fold tuning");
    Rng rng(derive_seed(seed, "cv/folds"));
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<std::size_t> fold_of(train.size());
    for (std::size_t k = 0; k < pos.size(); ++k) fold_of[pos[k]] = k % folds;
    for (std::size_t k = 0; k < neg.size(); ++k) fold_of[neg[k]] = k % folds;

    struct Fold {
        Matrix x_train, x_val;
        std::vector<double> y_train;
        std::vector<std::uint8_t> y_val;
    };
    std::vector<Fold> parts(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr, va;
        for (std::size_t i = 0; i < train.size(); ++i) (fold_of[i] == f ? va : tr).push_back(i);
        const Dataset dtr = train.subset(tr);
        const Dataset dva = train.subset(va);
        const FeatureSpec spec = fit_feature_spec(dtr, mode);
        parts[f].x_train = encode_dataset(dtr, spec);
        parts[f].x_val = encode_dataset(dva, spec);
        parts[f].y_train = signed_labels(dtr);
        for (const auto& r : dva) parts[f].y_val.push_back(r.positive() ? 1 : 0);
    }

    TuningResult res;
    res.grid = grid;
    double best = -1.0;
    for (double lambda : grid) {
        hp.lambda = lambda;
        double sum = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            const auto fseed = derive_seed(seed, "cv/fold" + std::to_string(f));
            const Solution s = kind == ModelKind::Logistic
                                   ? solve_logistic(parts[f].x_train, parts[f].y_train, hp, fseed)
                                   : solve_max_margin(parts[f].x_train, parts[f].y_train, hp, fseed);
            sum += roc_auc(kernels::scores_parallel(parts[f].x_val, s.weights, s.bias), parts[f].y_val);
        }
        const double mean = sum / static_cast<double>(folds);
        res.mean_auc.push_back(mean);
        if (mean > best || (mean == best && lambda > res.best_lambda)) {
            best = mean;
            res.best_lambda = lambda;
        }
    }
    return res;
}

nlohmann::json to_json(const FeatureSpec& s) {
    return {{"mode", to_string(s.mode)}, {"names", s.names}, {"center", s.center}, {"scale", s.scale}};
}

nlohmann::json to_json(const LinearModel& m) {
    return {{"kind", to_string(m.kind)},
            {"weights", m.weights},
            {"bias", m.bias},
            {"feature_spec", to_json(m.spec)},
            {"hyperparameters",
             {{"lambda", m.hyperparams.lambda},
              {"tolerance", m.hyperparams.tolerance},
              {"max_iterations", m.hyperparams.max_iterations},
              {"initial_step", m.hyperparams.initial_step},
              {"init_scale", m.hyperparams.init_scale}}},
            {"seed", m.seed},
            {"diagnostics",
             {{"converged", m.diagnostics.converged},
              {"iterations", m.diagnostics.iterations},
              {"gradient_norm", m.diagnostics.gradient_norm},
              {"objective", m.diagnostics.objective}}}};
}

LinearModel model_from_json(const nlohmann::json& j) {
    LinearModel m;
    m.kind = parse_kind(j.at("kind").get<std::string>());
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    const auto& s = j.at("feature_spec");
    m.spec.mode = parse_mode(s.at("mode").get<std::string>());
    m.spec.names = s.at("names").get<std::vector<std::string>>();
    m.spec.center = s.at("center").get<std::vector<double>>();
    m.spec.scale = s.at("scale").get<std::vector<double>>();
    const auto& h = j.at("hyperparameters");
    m.hyperparams.lambda = h.at("lambda").get<double>();
    m.hyperparams.tolerance = h.at("tolerance").get<double>();
    m.hyperparams.max_iterations = h.at("max_iterations").get<std::size_t>();
    m.hyperparams.initial_step = h.at("initial_step").get<double>();
    m.hyperparams.init_scale = h.at("init_scale").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& dg = j.at("diagnostics");
    m.diagnostics.converged = dg.at("converged").get<bool>();
    m.diagnostics.iterations = dg.at("iterations").get<std::size_t>();
    m.diagnostics.gradient_norm = dg.at("gradient_norm").get<double>();
    m.diagnostics.objective = dg.at("objective").get<double>();
    const std::size_t dim = m.spec.names.size();
    if (m.weights.size() != dim || m.spec.center.size() != dim || m.spec.scale.size() != dim)
        throw std::invalid_argument("model JSON: inconsistent dimensions");
    return m;
}

}  // namespace confeval
