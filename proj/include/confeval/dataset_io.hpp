#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "confeval/record.hpp"

namespace confeval {

inline constexpr int kSchemaVersion = 1;

// Malformed input. `row` is the 1-based line number in the file (the two
// header lines are rows 1 and 2); `column` is the schema column name, or
// empty when the problem is not tied to one column.
class ParseError : public DataError {
public:
    ParseError(std::size_t row, std::string column, const std::string& what);
    std::size_t row() const { return row_; }
    const std::string& column() const { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

struct CsvFormat {
    char delimiter = ',';
};

// Metadata columns in file order; audio feature columns f0..f{D-1} follow.
std::vector<std::string> schema_columns();

Dataset parse_dataset(std::istream& in, const CsvFormat& fmt = {});
Dataset parse_dataset(const std::filesystem::path& path, const CsvFormat& fmt = {});

void write_dataset(std::ostream& out, const Dataset& d, const CsvFormat& fmt = {});
void write_dataset(const std::filesystem::path& path, const Dataset& d, const CsvFormat& fmt = {});

// RFC 4180 field splitting for a single line (no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line, char delimiter = ',');
std::string csv_escape(std::string_view field, char delimiter = ',');

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace confeval
