#include "confeval/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace confeval {

namespace {

constexpr std::string_view kSchemaKey = "schema=";
constexpr std::string_view kDimKey = "feature_dim=";
constexpr std::string_view kProvenanceKey = "provenance=";

class RowReader {
public:
    RowReader(std::size_t row, const std::vector<std::string>& fields,
              const std::unordered_map<std::string, std::size_t>& index)
        : row_(row), fields_(fields), index_(index) {}

    const std::string& raw(const std::string& col) const { return fields_[index_.at(col)]; }

    [[noreturn]] void fail(const std::string& col, const std::string& what) const {
        throw ParseError(row_, col, what);
    }

    template <typename E>
    E enumeration(const std::string& col) const {
        const auto& s = raw(col);
        auto v = parse_enum<E>(s);
        if (!v) fail(col, "invalid value '" + s + "'");
        return *v;
    }

    template <typename E>
    std::optional<E> optional_enumeration(const std::string& col) const {
        if (raw(col).empty()) return std::nullopt;
        return enumeration<E>(col);
    }

    bool boolean(const std::string& col) const {
        const auto& s = raw(col);
        if (s == "true") return true;
        if (s == "false") return false;
        fail(col, "invalid boolean '" + s + "'");
    }

    int integer(const std::string& col) const {
        const auto& s = raw(col);
        int v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
            fail(col, "invalid integer '" + s + "'");
        return v;
    }

    Date date(const std::string& col) const {
        const auto& s = raw(col);
        auto d = parse_date(s);
        if (!d) fail(col, "invalid date '" + s + "'");
        return *d;
    }

    std::optional<std::size_t> bin(const std::string& col, std::span<const BinSpec> bins) const {
        const auto& s = raw(col);
        if (s.empty()) return std::nullopt;
        for (std::size_t i = 0; i < bins.size(); ++i)
            if (bins[i].label == s) return i;
        fail(col, "unknown bin label '" + s + "'");
    }

    double real(std::size_t field_index, const std::string& col) const {
        const auto& s = fields_[field_index];
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            fail(col, "invalid number '" + s + "'");
        return v;
    }

private:
    std::size_t row_;
    const std::vector<std::string>& fields_;
    const std::unordered_map<std::string, std::size_t>& index_;
};

std::string feature_column(std::size_t j) { return "f" + std::to_string(j); }

struct Header {
    std::size_t feature_dim = 0;
    std::string provenance;
};

Header parse_header_line(const std::string& line, char delim) {
    Header h;
    bool have_schema = false, have_dim = false;
    for (const auto& f : split_csv_line(line, delim)) {
        std::string_view v = f;
        if (v.starts_with(kSchemaKey)) {
            v.remove_prefix(kSchemaKey.size());
            if (v != std::to_string(kSchemaVersion))
                throw ParseError(1, "", "unsupported schema version '" + std::string(v) + "'");
            have_schema = true;
        } else if (v.starts_with(kDimKey)) {
            v.remove_prefix(kDimKey.size());
            auto res = std::from_chars(v.data(), v.data() + v.size(), h.feature_dim);
            if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size())
                throw ParseError(1, "", "invalid feature_dim '" + std::string(v) + "'");
            have_dim = true;
        } else if (v.starts_with(kProvenanceKey)) {
            v.remove_prefix(kProvenanceKey.size());
            h.provenance = std::string(v);
        } else {
            throw ParseError(1, "", "unknown header entry '" + f + "'");
        }
    }
    if (!have_schema) throw ParseError(1, "", "missing schema=" + std::to_string(kSchemaVersion));
    if (!have_dim) throw ParseError(1, "", "missing feature_dim");
    return h;
}

}  // namespace

ParseError::ParseError(std::size_t row, std::string column, const std::string& what)
    : DataError("row " + std::to_string(row) + (column.empty() ? "" : ", column '" + column + "'") +
                ": " + what),
      row_(row),
      column_(std::move(column)) {}

std::vector<std::string> schema_columns() {
    std::vector<std::string> cols = {"id",         "age",          "gender",
                                     "ethnicity",  "first_language", "local_authority",
                                     "recruitment_source", "covid_status"};
    for (auto s : symptom_names()) cols.emplace_back(s);
    for (auto s : resp_names()) cols.emplace_back(s);
    for (const char* s : {"smoker_status", "height_bin", "weight_bin", "viral_load", "test_date",
                          "submission_date", "test_type", "lab_under_investigation",
                          "metadata_complete"})
        cols.emplace_back(s);
    return cols;
}

std::vector<std::string> split_csv_line(std::string_view line, char delimiter) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string csv_escape(std::string_view field, char delimiter) {
    if (field.find_first_of(std::string{'"', delimiter, '\n', '\r'}) == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Dataset parse_dataset(std::istream& in, const CsvFormat& fmt) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "", "empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const Header header = parse_header_line(line, fmt.delimiter);

    if (!std::getline(in, line)) throw ParseError(2, "", "missing column header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto columns = split_csv_line(line, fmt.delimiter);

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (!index.emplace(columns[i], i).second)
            throw ParseError(2, columns[i], "duplicate column");
    auto expected = schema_columns();
    for (std::size_t j = 0; j < header.feature_dim; ++j) expected.push_back(feature_column(j));
    for (const auto& c : expected)
        if (!index.contains(c)) throw ParseError(2, c, "missing schema column");
    if (columns.size() != expected.size())
        for (const auto& c : columns)
            if (std::find(expected.begin(), expected.end(), c) == expected.end())
                throw ParseError(2, c, "unknown column");

    std::vector<std::size_t> feature_idx(header.feature_dim);
    for (std::size_t j = 0; j < header.feature_dim; ++j)
        feature_idx[j] = index.at(feature_column(j));

    std::vector<SubmissionRecord> records;
    std::unordered_map<std::string, std::size_t> seen_ids;
    std::size_t row = 2;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line, fmt.delimiter);
        if (fields.size() != columns.size())
            throw ParseError(row, "", "expected " + std::to_string(columns.size()) +
                                          " fields, found " + std::to_string(fields.size()));
        RowReader rr(row, fields, index);

        SubmissionRecord r;
        r.id = rr.raw("id");
        if (r.id.empty()) rr.fail("id", "empty id");
        if (auto [it, fresh] = seen_ids.emplace(r.id, row); !fresh)
            rr.fail("id", "duplicate id '" + r.id + "' (first seen at row " +
                              std::to_string(it->second) + ")");
        r.age = rr.integer("age");
        r.gender = rr.enumeration<Gender>("gender");
        r.ethnicity = rr.raw("ethnicity");
        r.first_language = rr.raw("first_language");
        r.local_authority = rr.raw("local_authority");
        r.recruitment_source = rr.enumeration<RecruitmentSource>("recruitment_source");
        r.covid_status = rr.enumeration<CovidStatus>("covid_status");
        for (std::size_t s = 0; s < kSymptomCount; ++s)
            r.symptoms[s] = rr.boolean(std::string(symptom_names()[s]));
        for (std::size_t c = 0; c < kRespCount; ++c)
            r.respiratory[c] = rr.boolean(std::string(resp_names()[c]));
        r.smoker_status = rr.optional_enumeration<SmokerStatus>("smoker_status");
        r.height_bin = rr.bin("height_bin", height_bins());
        r.weight_bin = rr.bin("weight_bin", weight_bins());
        r.viral_load = rr.enumeration<ViralLoad>("viral_load");
        r.test_date = rr.date("test_date");
        r.submission_date = rr.date("submission_date");
        r.test_type = rr.enumeration<TestType>("test_type");
        r.lab_under_investigation = rr.boolean("lab_under_investigation");
        r.metadata_complete = rr.boolean("metadata_complete") && r.smoker_status &&
                              r.height_bin && r.weight_bin && !r.ethnicity.empty() &&
                              !r.first_language.empty() && !r.local_authority.empty();

        std::size_t empty_cells = 0;
        for (std::size_t j = 0; j < header.feature_dim; ++j)
            if (fields[feature_idx[j]].empty()) ++empty_cells;
        if (header.feature_dim > 0 && empty_cells == 0) {
            std::vector<double> f(header.feature_dim);
            for (std::size_t j = 0; j < header.feature_dim; ++j)
                f[j] = rr.real(feature_idx[j], feature_column(j));
            r.audio_features = std::move(f);
        } else if (empty_cells != header.feature_dim) {
            for (std::size_t j = 0; j < header.feature_dim; ++j)
                if (fields[feature_idx[j]].empty())
                    rr.fail(feature_column(j),
                            "audio features must be all present or all empty (inconsistent "
                            "feature dimension)");
        }
        records.push_back(std::move(r));
    }
    return Dataset(std::move(records), header.feature_dim, header.provenance);
}

Dataset parse_dataset(const std::filesystem::path& path, const CsvFormat& fmt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
    return parse_dataset(in, fmt);
}

void write_dataset(std::ostream& out, const Dataset& d, const CsvFormat& fmt) {
    const char sep = fmt.delimiter;
    out << "schema=" << kSchemaVersion << sep << "feature_dim=" << d.feature_dim() << sep
        << csv_escape(std::string(kProvenanceKey) + d.provenance(), sep) << '\n';
    const auto cols = schema_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? std::string(1, sep) : "") << cols[i];
    for (std::size_t j = 0; j < d.feature_dim(); ++j) out << sep << feature_column(j);
    out << '\n';

    auto b = [](bool v) { return v ? "true" : "false"; };
    for (const auto& r : d) {
        out << csv_escape(r.id, sep) << sep << r.age << sep << to_string(r.gender) << sep
            << csv_escape(r.ethnicity, sep) << sep << csv_escape(r.first_language, sep) << sep
            << csv_escape(r.local_authority, sep) << sep << to_string(r.recruitment_source) << sep
            << to_string(r.covid_status);
        for (bool s : r.symptoms) out << sep << b(s);
        for (bool c : r.respiratory) out << sep << b(c);
        out << sep << (r.smoker_status ? to_string(*r.smoker_status) : "");
        out << sep << (r.height_bin ? height_bins()[*r.height_bin].label : "");
        out << sep << (r.weight_bin ? weight_bins()[*r.weight_bin].label : "");
        out << sep << to_string(r.viral_load) << sep << format_date(r.test_date) << sep
            << format_date(r.submission_date) << sep << to_string(r.test_type) << sep
            << b(r.lab_under_investigation) << sep << b(r.metadata_complete);
        for (std::size_t j = 0; j < d.feature_dim(); ++j) {
            out << sep;
            if (r.audio_features) out << format_double((*r.audio_features)[j]);
        }
        out << '\n';
    }
}

void write_dataset(const std::filesystem::path& path, const Dataset& d, const CsvFormat& fmt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file '" + path.string() + "'");
    write_dataset(out, d, fmt);
}

}  // namespace confeval
