#include "confeval/eligibility.hpp"

#include <numeric>
#include <vector>

namespace confeval {

std::string_view to_string(Exclusion e) {
    switch (e) {
        case Exclusion::Underage: return "underage";
        case Exclusion::NonPcr: return "non_pcr";
        case Exclusion::OutOfWindow: return "out_of_window";
        case Exclusion::FlaggedLab: return "flagged_lab";
        case Exclusion::SymptomContradiction: return "symptom_contradiction";
        case Exclusion::MissingAudio: return "missing_audio";
        case Exclusion::MissingMetadata: return "missing_metadata";
    }
    return "?";
}

std::size_t ExclusionReport::total_excluded() const {
    return std::accumulate(excluded.begin(), excluded.end(), std::size_t{0});
}

bool has_symptom_contradiction(const SubmissionRecord& r) {
    if (!r.has(Symptom::NoSymptoms)) return false;
    for (std::size_t i = 0; i < kSymptomCount; ++i)
        if (i != static_cast<std::size_t>(Symptom::NoSymptoms) && r.symptoms[i]) return true;
    return false;
}

std::optional<Exclusion> first_exclusion(const SubmissionRecord& r) {
    if (r.age < kMinimumAge) return Exclusion::Underage;
    if (r.test_type != TestType::PCR) return Exclusion::NonPcr;
    const auto lag = (r.submission_date - r.test_date).count();
    if (lag < 0 || lag > kSubmissionWindowDays) return Exclusion::OutOfWindow;
    if (r.lab_under_investigation) return Exclusion::FlaggedLab;
    if (has_symptom_contradiction(r)) return Exclusion::SymptomContradiction;
    if (!r.audio_features) return Exclusion::MissingAudio;
    if (!r.metadata_complete) return Exclusion::MissingMetadata;
    return std::nullopt;
}

FilterResult apply_eligibility_filter(const Dataset& d) {
    ExclusionReport report;
    report.input_count = d.size();
    std::vector<std::size_t> keep;
    keep.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (auto e = first_exclusion(d[i]))
            ++report.excluded[static_cast<std::size_t>(*e)];
        else
            keep.push_back(i);
    }
    report.surviving = keep.size();
    return {d.subset(keep), report};
}

MissingDataPartition missing_data_partition(const Dataset& d) {
    std::vector<std::size_t> audio, meta, complete;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d[i].audio_features)
            audio.push_back(i);
        else if (!d[i].metadata_complete)
            meta.push_back(i);
        else
            complete.push_back(i);
    }
    return {d.subset(audio), d.subset(meta), d.subset(complete)};
}

nlohmann::json to_json(const ExclusionReport& r) {
    nlohmann::json excluded = nlohmann::json::object();
    for (std::size_t i = 0; i < kExclusionCount; ++i)
        excluded[std::string(to_string(static_cast<Exclusion>(i)))] = r.excluded[i];
    nlohmann::json order = nlohmann::json::array();
    for (std::size_t i = 0; i < kExclusionCount; ++i)
        order.push_back(std::string(to_string(static_cast<Exclusion>(i))));
    return {{"input_count", r.input_count},
            {"precedence", order},
            {"excluded", excluded},
            {"surviving", r.surviving}};
}

}  // namespace confeval
