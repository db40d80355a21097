#pragma once

#include <string>
#include <vector>

namespace examqa::detail {

struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
};

// Aligned plain text, pipe-table markdown, or CSV. Numeric-looking cells
// are right-aligned in the text form.
std::string render_table_text(const Table& t);
std::string render_table_markdown(const Table& t);
std::string render_table_csv(const Table& t);

}  // namespace examqa::detail
