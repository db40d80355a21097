#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace examqa::detail {

// Minimal RFC 4180 CSV support: quoted fields, embedded commas, quotes
// and newlines. Rows are vectors of unescaped cells.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record (possibly spanning multiple physical lines).
    // Returns nullopt at end of input.
    std::optional<std::vector<std::string>> next();

private:
    std::istream& in_;
};

std::string csv_escape(const std::string& cell);
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace examqa::detail
