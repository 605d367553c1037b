#include "confeval/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "confeval/dataset_io.hpp"
#include "confeval/rng.hpp"

namespace confeval {

namespace {

constexpr std::array<std::string_view, kSplitStepCount> kStepLabels = {
    "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "random"};

std::uint16_t bit(SplitStep s) { return static_cast<std::uint16_t>(1u << static_cast<unsigned>(s)); }

class Builder {
public:
    Builder(const Dataset& d, SplitAssignment& out) : d_(d), out_(out) {
        out_.ids.reserve(d.size());
        for (const auto& r : d) out_.ids.push_back(r.id);
        out_.assignment.assign(d.size(), Assignment::Train);
        out_.provenance.assign(d.size(), 0);
    }

    bool selected(std::size_t i) const { return out_.assignment[i] == Assignment::Test; }

    // Whole-group step: label every member, add the unselected ones.
    template <typename Pred>
    void take_all(SplitStep s, Pred pred) {
        for (std::size_t i = 0; i < d_.size(); ++i) {
            if (!pred(d_[i])) continue;
            out_.provenance[i] |= bit(s);
            add(i, s);
        }
    }

    // Sampling step: draw k of the given (unselected) candidates.
    void take_sample(SplitStep s, Rng& rng, const std::vector<std::size_t>& candidates, std::size_t k) {
        for (std::size_t i : rng.sample(candidates, k)) {
            out_.provenance[i] |= bit(s);
            add(i, s);
        }
    }

    template <typename Pred>
    std::vector<std::size_t> unselected(Pred pred) const {
        std::vector<std::size_t> c;
        for (std::size_t i = 0; i < d_.size(); ++i)
            if (!selected(i) && pred(d_[i])) c.push_back(i);
        return c;
    }

    std::size_t test_count() const { return count_; }

private:
    void add(std::size_t i, SplitStep s) {
        if (selected(i)) return;
        out_.assignment[i] = Assignment::Test;
        ++out_.added_by_step[static_cast<std::size_t>(s)];
        ++count_;
    }

    const Dataset& d_;
    SplitAssignment& out_;
    std::size_t count_ = 0;
};

std::vector<std::string> distinct_except(const Dataset& d, std::string SubmissionRecord::*field,
                                         const std::string& excluded) {
    std::set<std::string> s;
    for (const auto& r : d)
        if (r.*field != excluded && !(r.*field).empty()) s.insert(r.*field);
    return {s.begin(), s.end()};
}

std::vector<std::string> draw_categories(const std::vector<std::string>& pool, std::size_t k,
                                         SplitStep step, std::uint64_t seed, const char* what) {
    if (pool.size() < k)
        throw SplitError(SplitError::Kind::InsufficientCategories,
                         "step " + std::string(step_label(step)) + ": need " + std::to_string(k) +
                             " " + what + ", dataset has " + std::to_string(pool.size()));
    Rng rng(step_seed(seed, step));
    auto chosen = rng.sample(pool, k);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

// The `k` authorities with the largest count of records of `status`, ties by
// name, skipping `exclude`.
std::vector<std::string> top_authorities(const Dataset& d, CovidStatus status, std::size_t k,
                                         const std::vector<std::string>& exclude) {
    std::map<std::string, std::size_t> count;
    for (const auto& r : d)
        if (r.covid_status == status && !r.local_authority.empty()) ++count[r.local_authority];
    std::vector<std::pair<std::string, std::size_t>> v;
    for (const auto& [name, c] : count)
        if (std::find(exclude.begin(), exclude.end(), name) == exclude.end()) v.emplace_back(name, c);
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (v.size() < k)
        throw SplitError(SplitError::Kind::InsufficientCategories,
                         "need " + std::to_string(k) + " authorities with " +
                             std::string(to_string(status)) + " records, dataset has " +
                             std::to_string(v.size()));
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(v[i].first);
    std::sort(out.begin(), out.end());
    return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void check_fraction(const char* name, double f) {
    if (!(f >= 0.0 && f <= 1.0))
        throw SplitError(SplitError::Kind::InvalidConfig, std::string(name) + " must be in [0,1]");
}

}  // namespace

std::string_view step_label(SplitStep s) { return kStepLabels[static_cast<std::size_t>(s)]; }

std::uint64_t step_seed(std::uint64_t seed, SplitStep s) {
    return derive_seed(seed, "split/" + std::string(step_label(s)));
}

std::size_t SplitAssignment::test_count() const {
    return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), Assignment::Test));
}

std::vector<std::size_t> SplitAssignment::test_indices() const {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == Assignment::Test) v.push_back(i);
    return v;
}

std::vector<std::size_t> SplitAssignment::train_indices() const {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == Assignment::Train) v.push_back(i);
    return v;
}

std::array<double, 4> median_age_by_gender(const Dataset& d) {
    std::array<std::vector<int>, 4> ages;
    for (const auto& r : d) ages[static_cast<std::size_t>(r.gender)].push_back(r.age);
    std::array<double, 4> med;
    for (std::size_t g = 0; g < 4; ++g) {
        auto& a = ages[g];
        if (a.empty()) {
            med[g] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        std::sort(a.begin(), a.end());
        const std::size_t m = a.size() / 2;
        med[g] = a.size() % 2 ? a[m] : 0.5 * (a[m - 1] + a[m]);
    }
    return med;
}

SplitAssignment build_designed_split(const Dataset& d, const SplitConfig& cfg) {
    check_fraction("older_positive_fraction", cfg.older_positive_fraction);
    check_fraction("younger_negative_fraction", cfg.younger_negative_fraction);
    check_fraction("test_fraction", cfg.test_fraction);

    SplitAssignment out;
    Builder b(d, out);
    const std::uint64_t seed = cfg.seed;

    // a, b: every record of a few held-out languages and ethnic groups.
    out.held_out_languages =
        draw_categories(distinct_except(d, &SubmissionRecord::first_language, cfg.excluded_language),
                        cfg.n_holdout_languages, SplitStep::HeldOutLanguages, seed, "languages");
    b.take_all(SplitStep::HeldOutLanguages,
               [&](const auto& r) { return contains(out.held_out_languages, r.first_language); });

    out.held_out_ethnicities =
        draw_categories(distinct_except(d, &SubmissionRecord::ethnicity, cfg.excluded_ethnicity),
                        cfg.n_holdout_ethnicities, SplitStep::HeldOutEthnicities, seed, "ethnic groups");
    b.take_all(SplitStep::HeldOutEthnicities,
               [&](const auto& r) { return contains(out.held_out_ethnicities, r.ethnicity); });

    // c: negatives of positive-heavy authorities; d: positives of negative-heavy ones.
    out.negative_holdout_authorities =
        !cfg.negative_holdout_authorities.empty()
            ? cfg.negative_holdout_authorities
            : top_authorities(d, CovidStatus::Positive, cfg.negative_holdout_auto_count, {});
    b.take_all(SplitStep::NegativesOfPositiveHeavyAuthorities, [&](const auto& r) {
        return !r.positive() && contains(out.negative_holdout_authorities, r.local_authority);
    });

    out.positive_holdout_authorities =
        !cfg.positive_holdout_authorities.empty()
            ? cfg.positive_holdout_authorities
            : top_authorities(d, CovidStatus::Negative, cfg.positive_holdout_auto_count,
                              out.negative_holdout_authorities);
    b.take_all(SplitStep::PositivesOfNegativeHeavyAuthorities, [&](const auto& r) {
        return r.positive() && contains(out.positive_holdout_authorities, r.local_authority);
    });

    // e: every record of further randomly drawn authorities.
    {
        std::set<std::string> pool;
        for (const auto& r : d)
            if (!r.local_authority.empty() && !contains(out.negative_holdout_authorities, r.local_authority) &&
                !contains(out.positive_holdout_authorities, r.local_authority))
                pool.insert(r.local_authority);
        out.random_authorities = draw_categories({pool.begin(), pool.end()}, cfg.n_random_authorities,
                                                 SplitStep::RandomAuthorities, seed, "authorities");
        b.take_all(SplitStep::RandomAuthorities,
                   [&](const auto& r) { return contains(out.random_authorities, r.local_authority); });
    }

    // f: asymptomatic positives.
    b.take_all(SplitStep::AsymptomaticPositives,
               [](const auto& r) { return r.positive() && r.has(Symptom::NoSymptoms); });

    // g, h: a fraction of older positives and younger negatives, relative to
    // the per-gender median of the full dataset. Ties belong to neither side.
    const auto median = median_age_by_gender(d);
    auto med = [&](const SubmissionRecord& r) { return median[static_cast<std::size_t>(r.gender)]; };
    {
        Rng rng(step_seed(seed, SplitStep::OlderPositives));
        auto cand = b.unselected([&](const auto& r) { return r.positive() && r.age > med(r); });
        const auto k = static_cast<std::size_t>(std::llround(cfg.older_positive_fraction * cand.size()));
        b.take_sample(SplitStep::OlderPositives, rng, cand, k);
    }
    {
        Rng rng(step_seed(seed, SplitStep::YoungerNegatives));
        auto cand = b.unselected([&](const auto& r) { return !r.positive() && r.age < med(r); });
        const auto k = static_cast<std::size_t>(std::llround(cfg.younger_negative_fraction * cand.size()));
        b.take_sample(SplitStep::YoungerNegatives, rng, cand, k);
    }

    // i, j: the channel-discordant records.
    b.take_all(SplitStep::ReactPositives, [](const auto& r) {
        return r.positive() && r.recruitment_source == RecruitmentSource::React;
    });
    b.take_all(SplitStep::TestAndTraceNegatives, [](const auto& r) {
        return !r.positive() && r.recruitment_source == RecruitmentSource::TestAndTrace;
    });

    // k: top up each recorded viral-load category to the target.
    {
        Rng rng(step_seed(seed, SplitStep::ViralLoadBalance));
        for (ViralLoad vl : {ViralLoad::High, ViralLoad::Medium, ViralLoad::Low}) {
            std::size_t have = 0;
            for (std::size_t i = 0; i < d.size(); ++i)
                if (b.selected(i) && d[i].viral_load == vl) ++have;
            if (have >= cfg.viral_load_target_per_category) continue;
            const std::size_t need = cfg.viral_load_target_per_category - have;
            auto cand = b.unselected([&](const auto& r) { return r.viral_load == vl; });
            if (cand.size() < need)
                out.warnings.push_back("step k: viral load " + std::string(to_string(vl)) +
                                       " reaches " + std::to_string(have + cand.size()) + " of " +
                                       std::to_string(cfg.viral_load_target_per_category));
            b.take_sample(SplitStep::ViralLoadBalance, rng, cand, need);
        }
    }

    // l: fill to the target fraction from records with no recorded viral load.
    const double n = static_cast<double>(d.size());
    const auto target = static_cast<std::size_t>(std::llround(cfg.test_fraction * n));
    if (d.size() > 0 && b.test_count() / n > cfg.test_fraction + kTestFractionTolerance)
        throw SplitError(SplitError::Kind::InfeasibleFill,
                         "steps a-k already select " + std::to_string(b.test_count()) + " of " +
                             std::to_string(d.size()) + " records, above the test fraction " +
                             std::to_string(cfg.test_fraction));
    if (b.test_count() < target) {
        Rng rng(step_seed(seed, SplitStep::UnrecordedFill));
        auto cand = b.unselected([](const auto& r) { return r.viral_load == ViralLoad::Unrecorded; });
        b.take_sample(SplitStep::UnrecordedFill, rng, cand, target - b.test_count());
    }
    if (d.size() > 0 && std::abs(b.test_count() / n - cfg.test_fraction) > kTestFractionTolerance)
        throw SplitError(SplitError::Kind::InfeasibleFill,
                         "only " + std::to_string(b.test_count()) + " of " + std::to_string(d.size()) +
                             " records could be placed in the test set (target " +
                             std::to_string(target) + ")");
    return out;
}

SplitAssignment build_random_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw SplitError(SplitError::Kind::InvalidConfig, "test_fraction must be in (0,1)");
    SplitAssignment out;
    Builder b(d, out);
    std::vector<std::size_t> all(d.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Rng rng(derive_seed(seed, "split/random"));
    const auto k = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(d.size())));
    b.take_sample(SplitStep::Random, rng, all, k);
    return out;
}

void write_split_csv(std::ostream& out, const SplitAssignment& s) {
    out << "id,assignment,provenance\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::string prov;
        for (std::size_t k = 0; k < kSplitStepCount; ++k)
            if (s.provenance[i] & (1u << k)) {
                if (!prov.empty()) prov += ';';
                prov += kStepLabels[k];
            }
        out << csv_escape(s.ids[i]) << ',' << (s.assignment[i] == Assignment::Test ? "test" : "train")
            << ',' << prov << '\n';
    }
}

void write_split_csv(const std::filesystem::path& path, const SplitAssignment& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write split file '" + path.string() + "'");
    write_split_csv(out, s);
}

SplitAssignment read_split_csv(const std::filesystem::path& path, const Dataset& d) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open split file '" + path.string() + "'");
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < d.size(); ++i) pos.emplace(d[i].id, i);

    SplitAssignment s;
    s.ids.resize(d.size());
    s.assignment.assign(d.size(), Assignment::Train);
    s.provenance.assign(d.size(), 0);
    std::vector<bool> seen(d.size(), false);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (row == 1) continue;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 3) throw ParseError(row, "", "expected 3 fields");
        auto it = pos.find(f[0]);
        if (it == pos.end()) throw ParseError(row, "id", "id '" + f[0] + "' not in dataset");
        const std::size_t i = it->second;
        if (seen[i]) throw ParseError(row, "id", "duplicate id '" + f[0] + "'");
        seen[i] = true;
        s.ids[i] = f[0];
        if (f[1] == "test")
            s.assignment[i] = Assignment::Test;
        else if (f[1] != "train")
            throw ParseError(row, "assignment", "invalid value '" + f[1] + "'");
        std::stringstream ss(f[2]);
        std::string lab;
        while (std::getline(ss, lab, ';')) {
            auto k = std::find(kStepLabels.begin(), kStepLabels.end(), lab);
            if (k == kStepLabels.end()) throw ParseError(row, "provenance", "unknown step '" + lab + "'");
            s.provenance[i] |= static_cast<std::uint16_t>(1u << (k - kStepLabels.begin()));
        }
    }
    for (std::size_t i = 0; i < d.size(); ++i)
        if (!seen[i]) throw DataError("split file '" + path.string() + "' lacks id '" + d[i].id + "'");
    return s;
}

nlohmann::json to_json(const SplitConfig& c) {
    return {{"n_holdout_languages", c.n_holdout_languages},
            {"n_holdout_ethnicities", c.n_holdout_ethnicities},
            {"excluded_language", c.excluded_language},
            {"excluded_ethnicity", c.excluded_ethnicity},
            {"negative_holdout_authorities", c.negative_holdout_authorities},
            {"positive_holdout_authorities", c.positive_holdout_authorities},
            {"negative_holdout_auto_count", c.negative_holdout_auto_count},
            {"positive_holdout_auto_count", c.positive_holdout_auto_count},
            {"n_random_authorities", c.n_random_authorities},
            {"older_positive_fraction", c.older_positive_fraction},
            {"younger_negative_fraction", c.younger_negative_fraction},
            {"viral_load_target_per_category", c.viral_load_target_per_category},
            {"test_fraction", c.test_fraction},
            {"seed", c.seed}};
}

SplitConfig split_config_from_json(const nlohmann::json& j, SplitConfig c) {
    if (!j.is_object()) throw SplitError(SplitError::Kind::InvalidConfig, "split config must be an object");
    const auto known = to_json(c);
    for (const auto& [key, _] : j.items())
        if (!known.contains(key))
            throw SplitError(SplitError::Kind::InvalidConfig, "unknown split field '" + key + "'");
    try {
        auto take = [&](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        take("n_holdout_languages", c.n_holdout_languages);
        take("n_holdout_ethnicities", c.n_holdout_ethnicities);
        take("excluded_language", c.excluded_language);
        take("excluded_ethnicity", c.excluded_ethnicity);
        take("negative_holdout_authorities", c.negative_holdout_authorities);
        take("positive_holdout_authorities", c.positive_holdout_authorities);
        take("negative_holdout_auto_count", c.negative_holdout_auto_count);
        take("positive_holdout_auto_count", c.positive_holdout_auto_count);
        take("n_random_authorities", c.n_random_authorities);
        take("older_positive_fraction", c.older_positive_fraction);
        take("younger_negative_fraction", c.younger_negative_fraction);
        take("viral_load_target_per_category", c.viral_load_target_per_category);
        take("test_fraction", c.test_fraction);
        take("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw SplitError(SplitError::Kind::InvalidConfig, std::string("split config: ") + e.what());
    }
    return c;
}

nlohmann::json split_summary_json(const SplitAssignment& s) {
    nlohmann::json added = nlohmann::json::object();
    for (std::size_t k = 0; k < kSplitStepCount; ++k)
        if (s.added_by_step[k] > 0) added[std::string(kStepLabels[k])] = s.added_by_step[k];
    return {{"records", s.size()},
            {"test", s.test_count()},
            {"train", s.size() - s.test_count()},
            {"added_by_step", added},
            {"held_out_languages", s.held_out_languages},
            {"held_out_ethnicities", s.held_out_ethnicities},
            {"negative_holdout_authorities", s.negative_holdout_authorities},
            {"positive_holdout_authorities", s.positive_holdout_authorities},
            {"random_authorities", s.random_authorities},
            {"warnings", s.warnings}};
}

}  // namespace confeval
