#include "examqa/detail/table.hpp"

#include <algorithm>
#include <sstream>

#include "examqa/detail/csv.hpp"
#include "examqa/detail/utf8.hpp"

namespace examqa::detail {

namespace {

std::size_t display_width(const std::string& s) { return decode_utf8(s).size(); }

bool numeric_like(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i >= s.size()) return false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '%' ||
              c == ' ' || c == '/'))
            return false;
    }
    return true;
}

}  // namespace

std::string render_table_text(const Table& t) {
    const std::size_t n_cols = t.headers.size();
    std::vector<std::size_t> widths(n_cols, 0);
    for (std::size_t c = 0; c < n_cols; ++c) widths[c] = display_width(t.headers[c]);
    for (const auto& row : t.rows)
        for (std::size_t c = 0; c < n_cols && c < row.size(); ++c)
            widths[c] = std::max(widths[c], display_width(row[c]));

    std::ostringstream out;
    auto emit_cell = [&](const std::string& cell, std::size_t c, bool right) {
        const std::size_t pad = widths[c] - display_width(cell);
        if (right) out << std::string(pad, ' ') << cell;
        else out << cell << std::string(pad, ' ');
    };
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (c) out << "  ";
        emit_cell(t.headers[c], c, false);
    }
    out << '\n';
    for (std::size_t c = 0; c < n_cols; ++c) {
        if (c) out << "  ";
        out << std::string(widths[c], '-');
    }
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c) out << "  ";
            const std::string& cell = c < row.size() ? row[c] : std::string();
            emit_cell(cell, c, numeric_like(cell));
        }
        out << '\n';
    }
    return out.str();
}

std::string render_table_markdown(const Table& t) {
    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& cells) {
        out << '|';
        for (std::size_t c = 0; c < t.headers.size(); ++c) {
            std::string cell = c < cells.size() ? cells[c] : std::string();
            // escape pipes inside cells
            std::string esc;
            for (char ch : cell) {
                if (ch == '|') esc += "\\|";
                else esc.push_back(ch);
            }
            out << ' ' << esc << " |";
        }
        out << '\n';
    };
    emit_row(t.headers);
    out << '|';
    for (std::size_t c = 0; c < t.headers.size(); ++c) out << "---|";
    out << '\n';
    for (const auto& row : t.rows) emit_row(row);
    return out.str();
}

std::string render_table_csv(const Table& t) {
    std::ostringstream out;
    write_csv_row(out, t.headers);
    for (const auto& row : t.rows) write_csv_row(out, row);
    return out.str();
}

}  // namespace examqa::detail
