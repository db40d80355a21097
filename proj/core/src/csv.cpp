#include "examqa/detail/csv.hpp"

namespace examqa::detail {

std::optional<std::vector<std::string>> CsvReader::next() {
    if (!in_.good() || in_.peek() == EOF) return std::nullopt;

    std::vector<std::string> cells;
    std::string cell;
    bool in_quotes = false;
    bool saw_any = false;

    int ci;
    while ((ci = in_.get()) != EOF) {
        const char c = static_cast<char>(ci);
        saw_any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    cell.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                break;
            case ',':
                cells.push_back(std::move(cell));
                cell.clear();
                break;
            case '\r':
                if (in_.peek() == '\n') in_.get();
                [[fallthrough]];
            case '\n':
                cells.push_back(std::move(cell));
                return cells;
            default:
                cell.push_back(c);
        }
    }
    if (!saw_any) return std::nullopt;
    cells.push_back(std::move(cell));
    return cells;
}

std::string csv_escape(const std::string& cell) {
    const bool needs_quoting = cell.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quoting) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.put(',');
        out << csv_escape(cells[i]);
    }
    out.put('\n');
}

}  // namespace examqa::detail
