#include "confeval/audit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "confeval/dataset_io.hpp"

namespace confeval {

namespace {

using Label = std::optional<std::string>;
using Accessor = std::function<Label(const SubmissionRecord&)>;

struct VarDef {
    VariableKind kind = VariableKind::Categorical;
    // Declared category order; empty for open string variables (ordered
    // lexicographically) and for age (ordered by bin).
    std::vector<std::string> declared;
    Accessor label;
    std::function<std::optional<double>(const SubmissionRecord&)> value;
};

template <typename E>
std::vector<std::string> enum_labels() {
    std::vector<std::string> out;
    for (E v : enum_values<E>()) out.emplace_back(to_string(v));
    return out;
}

template <typename Bins>
std::vector<std::string> bin_labels(Bins bins) {
    std::vector<std::string> out;
    for (const auto& b : bins) out.emplace_back(b.label);
    return out;
}

const std::vector<std::string> kBool = {"false", "true"};
Label bool_label(bool b) { return std::string(b ? "true" : "false"); }

int age_bin_of(int age) {
    return static_cast<int>(std::floor(static_cast<double>(age) / kAgeHistogramWidth));
}

std::string age_bin_label(int bin) {
    return std::to_string(bin * kAgeHistogramWidth) + "-" +
           std::to_string(bin * kAgeHistogramWidth + kAgeHistogramWidth - 1);
}

const std::map<std::string, VarDef>& registry() {
    static const std::map<std::string, VarDef> reg = [] {
        std::map<std::string, VarDef> m;
        auto cat = [&](const std::string& name, std::vector<std::string> declared, Accessor f) {
            m[name] = VarDef{VariableKind::Categorical, std::move(declared), std::move(f), {}};
        };
        cat("gender", enum_labels<Gender>(),
            [](const auto& r) { return Label(std::string(to_string(r.gender))); });
        cat("recruitment_source", enum_labels<RecruitmentSource>(),
            [](const auto& r) { return Label(std::string(to_string(r.recruitment_source))); });
        cat("covid_status", enum_labels<CovidStatus>(),
            [](const auto& r) { return Label(std::string(to_string(r.covid_status))); });
        cat("smoker_status", enum_labels<SmokerStatus>(), [](const auto& r) -> Label {
            if (!r.smoker_status) return std::nullopt;
            return std::string(to_string(*r.smoker_status));
        });
        cat("viral_load", enum_labels<ViralLoad>(),
            [](const auto& r) { return Label(std::string(to_string(r.viral_load))); });
        cat("test_type", enum_labels<TestType>(),
            [](const auto& r) { return Label(std::string(to_string(r.test_type))); });
        auto open = [](std::string SubmissionRecord::*field) {
            return [field](const SubmissionRecord& r) -> Label {
                if ((r.*field).empty()) return std::nullopt;
                return r.*field;
            };
        };
        cat("ethnicity", {}, open(&SubmissionRecord::ethnicity));
        cat("first_language", {}, open(&SubmissionRecord::first_language));
        cat("local_authority", {}, open(&SubmissionRecord::local_authority));
        for (std::size_t s = 0; s < kSymptomCount; ++s)
            cat(std::string(symptom_names()[s]), kBool,
                [s](const auto& r) { return bool_label(r.symptoms[s]); });
        for (std::size_t c = 0; c < kRespCount; ++c)
            cat(std::string(resp_names()[c]), kBool,
                [c](const auto& r) { return bool_label(r.respiratory[c]); });
        cat("at_least_one_symptom", kBool, [](const auto& r) { return bool_label(r.any_symptom()); });
        cat("lab_under_investigation", kBool,
            [](const auto& r) { return bool_label(r.lab_under_investigation); });
        cat("height_bin", bin_labels(height_bins()), [](const auto& r) -> Label {
            if (!r.height_bin) return std::nullopt;
            return std::string(height_bins()[*r.height_bin].label);
        });
        cat("weight_bin", bin_labels(weight_bins()), [](const auto& r) -> Label {
            if (!r.weight_bin) return std::nullopt;
            return std::string(weight_bins()[*r.weight_bin].label);
        });

        m["age"] = VarDef{VariableKind::Numeric,
                          {},
                          [](const auto& r) { return Label(age_bin_label(age_bin_of(r.age))); },
                          [](const auto& r) { return std::optional<double>(r.age); }};
        m["height"] = VarDef{VariableKind::Numeric, bin_labels(height_bins()),
                             m["height_bin"].label,
                             [](const auto& r) { return r.height_cm(); }};
        m["weight"] = VarDef{VariableKind::Numeric, bin_labels(weight_bins()),
                             m["weight_bin"].label,
                             [](const auto& r) { return r.weight_kg(); }};
        return m;
    }();
    return reg;
}

const VarDef& lookup(const std::string& name) {
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw UnknownVariable(name);
    return it->second;
}

// Category labels in canonical order plus each record's code into them.
struct Coded {
    std::vector<std::string> labels;
    std::vector<std::optional<std::size_t>> codes;
};

Coded code_variable(const Dataset& d, const std::string& name) {
    const VarDef& v = lookup(name);
    std::vector<Label> raw;
    raw.reserve(d.size());
    for (const auto& r : d) raw.push_back(v.label(r));

    Coded out;
    if (name == "age") {
        if (!d.empty()) {
            int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
            for (const auto& r : d) {
                lo = std::min(lo, age_bin_of(r.age));
                hi = std::max(hi, age_bin_of(r.age));
            }
            for (int b = lo; b <= hi; ++b) out.labels.push_back(age_bin_label(b));
            for (const auto& r : d) out.codes.emplace_back(static_cast<std::size_t>(age_bin_of(r.age) - lo));
        }
        return out;
    }
    if (!v.declared.empty()) {
        out.labels = v.declared;
    } else {
        std::set<std::string> distinct;
        for (const auto& l : raw)
            if (l) distinct.insert(*l);
        out.labels.assign(distinct.begin(), distinct.end());
    }
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < out.labels.size(); ++i) pos[out.labels[i]] = i;
    out.codes.reserve(raw.size());
    for (const auto& l : raw) {
        if (!l) {
            out.codes.emplace_back(std::nullopt);
        } else {
            auto it = pos.find(*l);
            out.codes.emplace_back(it == pos.end() ? std::nullopt
                                                   : std::optional<std::size_t>(it->second));
        }
    }
    return out;
}

std::string pct(double x) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << x;
    return os.str();
}

}  // namespace

std::vector<std::string> audit_variable_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : registry()) out.push_back(name);
    return out;
}

VariableKind variable_kind(const std::string& name) { return lookup(name).kind; }

std::vector<std::string> default_audit_covariates() {
    std::vector<std::string> v = {"age",       "gender",         "ethnicity",
                                  "first_language", "local_authority", "recruitment_source",
                                  "smoker_status",  "height",         "weight"};
    for (auto s : symptom_names()) v.emplace_back(s);
    v.emplace_back("at_least_one_symptom");
    for (auto c : resp_names()) v.emplace_back(c);
    return v;
}

std::size_t CrossTab::total() const {
    std::size_t t = 0;
    for (const auto& row : counts)
        for (auto c : row) t += c;
    return t;
}

std::size_t CrossTab::at(const std::string& row, const std::string& col) const {
    auto ri = std::find(row_labels.begin(), row_labels.end(), row);
    auto ci = std::find(col_labels.begin(), col_labels.end(), col);
    if (ri == row_labels.end() || ci == col_labels.end())
        throw std::out_of_range("CrossTab::at: no cell (" + row + ", " + col + ")");
    return counts[ri - row_labels.begin()][ci - col_labels.begin()];
}

CrossTab cross_tabulate(const Dataset& d, const std::string& var_a, const std::string& var_b) {
    const Coded a = code_variable(d, var_a);
    const Coded b = code_variable(d, var_b);
    CrossTab t;
    t.row_variable = var_a;
    t.col_variable = var_b;
    t.row_labels = a.labels;
    t.col_labels = b.labels;
    t.counts.assign(a.labels.size(), std::vector<std::size_t>(b.labels.size(), 0));
    for (std::size_t i = 0; i < d.size(); ++i)
        if (a.codes[i] && b.codes[i]) ++t.counts[*a.codes[i]][*b.codes[i]];
    return t;
}

SymptomComboTable symptom_combinations(const Dataset& d, CovidStatus status, std::size_t cutoff) {
    if (cutoff < 1) throw std::invalid_argument("symptom_combinations: cutoff must be >= 1");
    std::map<std::uint32_t, std::size_t> freq;
    for (const auto& r : d)
        if (r.covid_status == status) ++freq[r.symptom_mask()];
    SymptomComboTable t;
    t.status = status;
    t.cutoff = cutoff;
    for (const auto& [mask, f] : freq)
        if (f >= cutoff) t.entries.push_back({mask, f});
    std::stable_sort(t.entries.begin(), t.entries.end(),
                     [](const auto& x, const auto& y) { return x.frequency > y.frequency; });
    return t;
}

std::string describe_mask(std::uint32_t mask) {
    std::string out;
    for (std::size_t i = 0; i < kSymptomCount; ++i) {
        if (!(mask & (1u << i))) continue;
        if (!out.empty()) out += "+";
        out += symptom_names()[i];
    }
    return out.empty() ? "(none)" : out;
}

Breakdown distribution_breakdown(const Dataset& d, const std::string& variable) {
    const Coded c = code_variable(d, variable);
    Breakdown b;
    b.variable = variable;
    b.labels = c.labels;
    b.positive.assign(c.labels.size(), 0);
    b.negative.assign(c.labels.size(), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!c.codes[i]) continue;
        (d[i].positive() ? b.positive : b.negative)[*c.codes[i]]++;
    }
    for (std::size_t k = 0; k < b.labels.size(); ++k)
        b.masked.push_back(b.positive[k] + b.negative[k] < kDisclosureThreshold);
    return b;
}

TimeSeries submissions_over_time(const Dataset& d, TimeBin bin) {
    TimeSeries ts;
    ts.bin = bin;
    if (d.empty()) return ts;
    const int width = bin == TimeBin::Day ? 1 : 7;
    auto [lo, hi] = std::minmax_element(d.begin(), d.end(), [](const auto& a, const auto& b) {
        return a.submission_date < b.submission_date;
    });
    const Date first = lo->submission_date;
    const auto span_days = (hi->submission_date - first).count();
    const std::size_t bins = static_cast<std::size_t>(span_days / width) + 1;
    ts.test_and_trace.assign(bins, 0);
    ts.react.assign(bins, 0);
    for (std::size_t k = 0; k < bins; ++k)
        ts.bin_start.push_back(first + std::chrono::days{static_cast<int>(k) * width});
    for (const auto& r : d) {
        const auto k = static_cast<std::size_t>((r.submission_date - first).count() / width);
        (r.recruitment_source == RecruitmentSource::TestAndTrace ? ts.test_and_trace : ts.react)[k]++;
    }
    return ts;
}

double association_statistic(const Dataset& d, const std::string& variable) {
    const VarDef& v = lookup(variable);
    if (v.kind == VariableKind::Numeric) {
        double sum[2] = {0, 0}, sq[2] = {0, 0};
        std::size_t n[2] = {0, 0};
        for (const auto& r : d) {
            auto x = v.value(r);
            if (!x) continue;
            const int g = r.positive() ? 0 : 1;
            sum[g] += *x;
            sq[g] += *x * *x;
            ++n[g];
        }
        if (n[0] == 0 || n[1] == 0) return 0.0;
        const double m0 = sum[0] / n[0], m1 = sum[1] / n[1];
        const double v0 = std::max(sq[0] / n[0] - m0 * m0, 0.0);
        const double v1 = std::max(sq[1] / n[1] - m1 * m1, 0.0);
        const double pooled = std::sqrt((v0 + v1) / 2.0);
        if (pooled == 0.0) return m0 == m1 ? 0.0 : std::numeric_limits<double>::infinity();
        return std::abs(m0 - m1) / pooled;
    }
    const Coded c = code_variable(d, variable);
    std::vector<double> pos(c.labels.size(), 0.0), neg(c.labels.size(), 0.0);
    double npos = 0, nneg = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!c.codes[i]) continue;
        if (d[i].positive()) {
            pos[*c.codes[i]] += 1;
            npos += 1;
        } else {
            neg[*c.codes[i]] += 1;
            nneg += 1;
        }
    }
    if (npos == 0 || nneg == 0) return 0.0;
    double gap = 0.0;
    for (std::size_t k = 0; k < c.labels.size(); ++k)
        gap = std::max(gap, std::abs(pos[k] / npos - neg[k] / nneg));
    return gap;
}

const VariableAssociation* AuditReport::find(const std::string& variable) const {
    for (const auto& a : associations)
        if (a.variable == variable) return &a;
    return nullptr;
}

AuditReport build_audit_report(const Dataset& d, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("build_audit_report: threshold must be > 0");
    AuditReport rep;
    rep.threshold = threshold;
    for (const auto& name : default_audit_covariates()) {
        VariableAssociation a;
        a.variable = name;
        a.kind = variable_kind(name);
        a.statistic = association_statistic(d, name);
        a.flagged = a.statistic > threshold;
        if (a.flagged) rep.flagged.push_back(name);
        rep.associations.push_back(a);
    }
    rep.crosstabs.push_back(cross_tabulate(d, "recruitment_source", "covid_status"));
    rep.crosstabs.push_back(cross_tabulate(d, "at_least_one_symptom", "covid_status"));
    rep.crosstabs.push_back(cross_tabulate(d, "at_least_one_symptom", "recruitment_source"));
    rep.symptom_combos.push_back(symptom_combinations(d, CovidStatus::Positive, kPositiveComboCutoff));
    rep.symptom_combos.push_back(symptom_combinations(d, CovidStatus::Negative, kNegativeComboCutoff));
    for (const char* v : {"age", "gender", "smoker_status", "height", "weight", "asthma", "copd",
                          "local_authority"})
        rep.breakdowns.push_back(distribution_breakdown(d, v));
    return rep;
}

nlohmann::json to_json(const CrossTab& t) {
    return {{"row_variable", t.row_variable},
            {"col_variable", t.col_variable},
            {"row_labels", t.row_labels},
            {"col_labels", t.col_labels},
            {"counts", t.counts}};
}

nlohmann::json to_json(const AuditReport& r) {
    using nlohmann::json;
    json assoc = json::array();
    for (const auto& a : r.associations) {
        json s = std::isfinite(a.statistic) ? json(a.statistic) : json(nullptr);
        assoc.push_back({{"variable", a.variable},
                         {"kind", a.kind == VariableKind::Numeric ? "numeric" : "categorical"},
                         {"statistic", s},
                         {"flagged", a.flagged}});
    }
    json tabs = json::array();
    for (const auto& t : r.crosstabs) tabs.push_back(to_json(t));
    json combos = json::array();
    for (const auto& c : r.symptom_combos) {
        json entries = json::array();
        for (const auto& e : c.entries)
            entries.push_back({{"mask", e.mask}, {"symptoms", describe_mask(e.mask)},
                               {"frequency", e.frequency}});
        combos.push_back({{"status", std::string(to_string(c.status))},
                          {"cutoff", c.cutoff},
                          {"entries", entries}});
    }
    json breakdowns = json::array();
    for (const auto& b : r.breakdowns)
        breakdowns.push_back({{"variable", b.variable},
                              {"labels", b.labels},
                              {"positive", b.positive},
                              {"negative", b.negative},
                              {"masked", b.masked}});
    return {{"threshold", r.threshold},   {"associations", assoc}, {"flagged", r.flagged},
            {"crosstabs", tabs},          {"symptom_combinations", combos},
            {"breakdowns", breakdowns}};
}

std::string render_markdown(const AuditReport& r) {
    std::ostringstream os;
    os << "# Confounder audit\n\n";
    os << "Flag threshold: " << pct(r.threshold) << "\n\n";
    os << "| variable | kind | statistic | flagged |\n|---|---|---|---|\n";
    for (const auto& a : r.associations)
        os << "| " << a.variable << " | "
           << (a.kind == VariableKind::Numeric ? "numeric (|SMD|)" : "categorical (max gap)")
           << " | " << (std::isfinite(a.statistic) ? pct(a.statistic) : "inf") << " | "
           << (a.flagged ? "**yes**" : "no") << " |\n";

    auto cell = [](std::size_t c) {
        return c < kDisclosureThreshold && c > 0 ? std::string("<5") : std::to_string(c);
    };
    for (const auto& t : r.crosstabs) {
        os << "\n## " << t.row_variable << " x " << t.col_variable << "\n\n|  |";
        for (const auto& c : t.col_labels) os << " " << c << " |";
        os << "\n|---|";
        for (std::size_t j = 0; j < t.col_labels.size(); ++j) os << "---|";
        os << "\n";
        for (std::size_t i = 0; i < t.row_labels.size(); ++i) {
            os << "| " << t.row_labels[i] << " |";
            for (auto c : t.counts[i]) os << " " << cell(c) << " |";
            os << "\n";
        }
    }
    for (const auto& c : r.symptom_combos) {
        os << "\n## Symptom combinations, " << to_string(c.status) << " (cutoff " << c.cutoff
           << ")\n\n| symptoms | frequency |\n|---|---|\n";
        for (const auto& e : c.entries) os << "| " << describe_mask(e.mask) << " | " << e.frequency << " |\n";
    }
    for (const auto& b : r.breakdowns) {
        os << "\n## " << b.variable << " by status\n\n| category | Positive | Negative |\n|---|---|---|\n";
        for (std::size_t k = 0; k < b.labels.size(); ++k) {
            if (b.masked[k])
                os << "| " << b.labels[k] << " | <5 | <5 |\n";
            else
                os << "| " << b.labels[k] << " | " << b.positive[k] << " | " << b.negative[k] << " |\n";
        }
    }
    return os.str();
}

std::string render_csv(const TimeSeries& ts) {
    std::ostringstream os;
    os << "bin_start,test_and_trace,react\n";
    for (std::size_t k = 0; k < ts.bin_start.size(); ++k)
        os << format_date(ts.bin_start[k]) << ',' << ts.test_and_trace[k] << ',' << ts.react[k] << '\n';
    return os.str();
}

}  // namespace confeval
