#include "confeval/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include "confeval/dataset_io.hpp"
#include "confeval/rng.hpp"

namespace confeval {

StratumKey stratum_key(const SubmissionRecord& r) {
    StratumKey k;
    k.recruitment_source = r.recruitment_source;
    k.age_bin = static_cast<int>(std::floor(static_cast<double>(r.age) / kMatchAgeBinWidth));
    k.gender = r.gender;
    k.cough_any = r.has(Symptom::CoughAny);
    k.sore_throat = r.has(Symptom::SoreThroat);
    k.asthma = r.has(RespCondition::Asthma);
    k.shortness_of_breath = r.has(Symptom::ShortnessOfBreath);
    k.runny_blocked_nose = r.has(Symptom::RunnyBlockedNose);
    k.at_least_one_symptom = r.any_symptom();
    return k;
}

std::string to_string(const StratumKey& k) {
    auto b = [](bool v) { return v ? '1' : '0'; };
    std::string s = std::string(to_string(k.recruitment_source)) + "|age" +
                    std::to_string(k.age_bin * kMatchAgeBinWidth) + "-" +
                    std::to_string(k.age_bin * kMatchAgeBinWidth + kMatchAgeBinWidth - 1) + "|" +
                    std::string(to_string(k.gender)) + "|";
    s += b(k.cough_any);
    s += b(k.sore_throat);
    s += b(k.asthma);
    s += b(k.shortness_of_breath);
    s += b(k.runny_blocked_nose);
    s += b(k.at_least_one_symptom);
    return s;
}

MatchedSet build_matched_set(const Dataset& test, std::uint64_t seed) {
    struct Members {
        std::vector<std::size_t> pos, neg;
    };
    std::map<StratumKey, Members> groups;
    for (std::size_t i = 0; i < test.size(); ++i) {
        auto& g = groups[stratum_key(test[i])];
        (test[i].positive() ? g.pos : g.neg).push_back(i);
    }

    MatchedSet m;
    for (const auto& [key, g] : groups) {
        StratumBalance sb{key, g.pos.size(), g.neg.size(), std::min(g.pos.size(), g.neg.size())};
        if (sb.selected > 0) {
            Rng rng(derive_seed(seed, "match/" + to_string(key)));
            for (std::size_t i : rng.sample(g.pos, sb.selected)) m.indices.push_back(i);
            for (std::size_t i : rng.sample(g.neg, sb.selected)) m.indices.push_back(i);
        }
        m.strata.push_back(sb);
    }
    std::sort(m.indices.begin(), m.indices.end());
    for (std::size_t i : m.indices) {
        m.ids.push_back(test[i].id);
        ++(test[i].positive() ? m.n_positive : m.n_negative);
    }
    if (m.indices.empty())
        m.warnings.push_back("matched set is empty: no stratum contains both positives and negatives");
    return m;
}

void write_matched_csv(const std::filesystem::path& path, const MatchedSet& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write matched file '" + path.string() + "'");
    out << "id\n";
    for (const auto& id : m.ids) out << csv_escape(id) << '\n';
}

MatchedSet read_matched_csv(const std::filesystem::path& path, const Dataset& d) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open matched file '" + path.string() + "'");
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < d.size(); ++i) pos.emplace(d[i].id, i);
    MatchedSet m;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (++row == 1 || line.empty()) continue;
        const auto f = split_csv_line(line);
        auto it = pos.find(f[0]);
        if (it == pos.end()) throw ParseError(row, "id", "id '" + f[0] + "' not in dataset");
        m.indices.push_back(it->second);
    }
    std::sort(m.indices.begin(), m.indices.end());
    if (std::adjacent_find(m.indices.begin(), m.indices.end()) != m.indices.end())
        throw DataError("matched file '" + path.string() + "' repeats an id");
    for (std::size_t i : m.indices) {
        m.ids.push_back(d[i].id);
        ++(d[i].positive() ? m.n_positive : m.n_negative);
    }
    return m;
}

nlohmann::json balance_json(const MatchedSet& m) {
    nlohmann::json strata = nlohmann::json::array();
    for (const auto& s : m.strata)
        strata.push_back({{"stratum", to_string(s.key)},
                          {"available_positive", s.available_positive},
                          {"available_negative", s.available_negative},
                          {"selected_positive", s.selected},
                          {"selected_negative", s.selected}});
    return {{"positives", m.positives()},
            {"negatives", m.negatives()},
            {"strata_with_matches",
             std::count_if(m.strata.begin(), m.strata.end(), [](const auto& s) { return s.selected > 0; })},
            {"strata", strata},
            {"warnings", m.warnings}};
}

}  // namespace confeval
