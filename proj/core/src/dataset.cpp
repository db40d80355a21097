#include "examqa/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "examqa/detail/csv.hpp"
#include "examqa/detail/table.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace examqa {

const char* to_string(ItemType t) { return t == ItemType::text ? "text" : "image_text"; }

const char* to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "test";
}

std::optional<Split> split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "validation" || s == "val" || s == "dev") return Split::validation;
    if (s == "test") return Split::test;
    return std::nullopt;
}

namespace {

constexpr std::array<const char*, 5> kCanonicalColumns = {"sample_id", "subject", "type",
                                                          "grade", "language"};

struct LanguageInfo {
    const char* iso;
    const char* name;
    std::vector<Script> scripts;
};

const std::vector<LanguageInfo>& language_table() {
    static const std::vector<LanguageInfo> table = {
        {"ar", "Arabic", {Script::arabic}},
        {"bg", "Bulgarian", {Script::cyrillic}},
        {"de", "German", {Script::latin}},
        {"en", "English", {Script::latin}},
        {"es", "Spanish", {Script::latin}},
        {"fr", "French", {Script::latin}},
        {"hr", "Croatian", {Script::latin}},
        {"hu", "Hungarian", {Script::latin}},
        {"it", "Italian", {Script::latin}},
        {"kk", "Kazakh", {Script::cyrillic}},
        {"pl", "Polish", {Script::latin}},
        {"sr", "Serbian", {Script::cyrillic, Script::latin}},
        {"ur", "Urdu", {Script::arabic}},
        {"zh", "Chinese", {Script::han}},
    };
    return table;
}

const LanguageInfo* find_language(std::string_view iso) {
    for (const auto& info : language_table())
        if (iso == info.iso) return &info;
    return nullptr;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_jsonl_path(const std::string& path) {
    auto ext = lower(fs::path(path).extension().string());
    return ext == ".jsonl" || ext == ".ndjson" || ext == ".json";
}

struct RawRow {
    std::map<std::string, std::string> fields;
    std::vector<std::string> column_order;
};

// Builds an ExamItem from one manifest row. Throws LoadError on bad
// enums; callers decide whether that aborts or skips.
ExamItem row_to_item(const RawRow& row, std::size_t row_no, const LoadOptions& opts,
                     const std::vector<std::string>& extra_columns) {
    ExamItem item;
    auto get = [&](const char* key) -> std::string {
        auto it = row.fields.find(key);
        return it == row.fields.end() ? std::string() : it->second;
    };

    item.sample_id = std::string(detail::trim_ascii(get("sample_id")));
    item.subject = std::string(detail::trim_ascii(get("subject")));
    item.language = lower(detail::trim_ascii(get("language")));
    item.image_ref = std::string(detail::trim_ascii(get("image")));

    const std::string type = lower(detail::trim_ascii(get("type")));
    if (type == "text") {
        item.item_type = ItemType::text;
    } else if (type == "image_text") {
        item.item_type = ItemType::image_text;
    } else {
        throw LoadError(LoadErrorKind::bad_enum, row_no,
                        "data row " + std::to_string(row_no) + ": type '" + type +
                            "' not in {text, image_text}");
    }

    const std::string grade = std::string(detail::trim_ascii(get("grade")));
    auto [ptr, ec] = std::from_chars(grade.data(), grade.data() + grade.size(), item.grade);
    if (ec != std::errc() || ptr != grade.data() + grade.size())
        throw LoadError(LoadErrorKind::bad_row, row_no,
                        "data row " + std::to_string(row_no) + ": grade '" + grade +
                            "' is not an integer");

    const std::string key = std::string(detail::trim_ascii(get("answer_key")));
    if (!key.empty()) {
        auto label = parse_label(key);
        if (!label && opts.marker_options.allow_digits) label = normalize_marker(key, opts.marker_options);
        if (!label)
            throw LoadError(LoadErrorKind::bad_enum, row_no,
                            "data row " + std::to_string(row_no) + ": answer_key '" + key +
                                "' not in {A,B,C,D,E}");
        item.answer_key = label;
    }

    for (const auto& col : extra_columns) {
        auto it = row.fields.find(col);
        if (it != row.fields.end() && !it->second.empty()) item.extra[col] = it->second;
    }
    return item;
}

}  // namespace

LoadResult load_dataset(const std::string& manifest_path, const std::string& image_root,
                        const LoadOptions& opts) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in.good())
        throw LoadError(LoadErrorKind::io, 0, "cannot open manifest: " + manifest_path);

    const bool strict =
        opts.strict.value_or(opts.split == Split::train || opts.split == Split::validation);

    LoadResult result;
    Dataset& ds = result.dataset;
    ds.source_path = manifest_path;
    ds.image_root = image_root;
    ds.split = opts.split;

    std::vector<RawRow> rows;

    if (is_jsonl_path(manifest_path)) {
        std::string line;
        std::size_t line_no = 0;
        std::vector<std::string> seen_extra;
        while (std::getline(in, line)) {
            ++line_no;
            auto trimmed = detail::trim_ascii(line);
            if (trimmed.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(trimmed);
            } catch (const nlohmann::json::exception& e) {
                throw LoadError(LoadErrorKind::bad_row, line_no,
                                "line " + std::to_string(line_no) + ": " + e.what());
            }
            RawRow row;
            for (auto it = j.begin(); it != j.end(); ++it) {
                std::string v;
                if (it.value().is_string()) v = it.value().get<std::string>();
                else if (it.value().is_null()) v = "";
                else v = it.value().dump();
                row.fields[it.key()] = v;
                row.column_order.push_back(it.key());
            }
            rows.push_back(std::move(row));
        }
        // Column set = union over rows, first-appearance order.
        for (const auto& row : rows)
            for (const auto& col : row.column_order)
                if (std::find(seen_extra.begin(), seen_extra.end(), col) == seen_extra.end())
                    seen_extra.push_back(col);
        for (const auto& col : seen_extra) {
            const bool canonical =
                std::find_if(kCanonicalColumns.begin(), kCanonicalColumns.end(),
                             [&](const char* c) { return col == c; }) != kCanonicalColumns.end() ||
                col == "answer_key" || col == "image";
            if (!canonical) ds.extra_columns.push_back(col);
        }
    } else {
        detail::CsvReader reader(in);
        auto header = reader.next();
        if (!header)
            throw LoadError(LoadErrorKind::io, 0, "empty manifest: " + manifest_path);
        std::vector<std::string> columns;
        for (auto& h : *header) columns.push_back(std::string(detail::trim_ascii(h)));
        // Tolerate a UTF-8 BOM on the first header cell.
        if (!columns.empty() && columns[0].rfind("\xEF\xBB\xBF", 0) == 0)
            columns[0] = columns[0].substr(3);

        for (const auto& col : columns) {
            const bool canonical =
                std::find_if(kCanonicalColumns.begin(), kCanonicalColumns.end(),
                             [&](const char* c) { return col == c; }) != kCanonicalColumns.end() ||
                col == "answer_key" || col == "image";
            if (!canonical) ds.extra_columns.push_back(col);
        }

        while (auto cells = reader.next()) {
            if (cells->size() == 1 && detail::trim_ascii((*cells)[0]).empty()) continue;
            RawRow row;
            for (std::size_t i = 0; i < columns.size() && i < cells->size(); ++i)
                row.fields[columns[i]] = (*cells)[i];
            rows.push_back(std::move(row));
        }
    }

    // Required columns must be present in every row source.
    for (const char* required : kCanonicalColumns) {
        const bool present = std::any_of(rows.begin(), rows.end(), [&](const RawRow& r) {
            return r.fields.count(required) > 0;
        });
        if (!rows.empty() && !present)
            throw LoadError(LoadErrorKind::missing_column, 0,
                            std::string("manifest lacks required column '") + required + "'");
    }

    std::size_t row_no = 0;
    for (const auto& row : rows) {
        ++row_no;
        try {
            ds.items.push_back(row_to_item(row, row_no, opts, ds.extra_columns));
        } catch (const LoadError& e) {
            if (strict) throw;
            result.skipped.push_back({row_no, e.what()});
        }
    }
    return result;
}

void write_manifest(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) throw LoadError(LoadErrorKind::io, 0, "cannot write manifest: " + path);

    std::vector<std::string> columns = {"sample_id", "subject", "type",   "grade",
                                        "answer_key", "language", "image"};
    for (const auto& col : ds.extra_columns) columns.push_back(col);

    auto cell_for = [](const ExamItem& item, const std::string& col) -> std::string {
        if (col == "sample_id") return item.sample_id;
        if (col == "subject") return item.subject;
        if (col == "type") return to_string(item.item_type);
        if (col == "grade") return std::to_string(item.grade);
        if (col == "answer_key") return item.answer_key ? to_string(*item.answer_key) : "";
        if (col == "language") return item.language;
        if (col == "image") return item.image_ref;
        auto it = item.extra.find(col);
        return it == item.extra.end() ? std::string() : it->second;
    };

    if (is_jsonl_path(path)) {
        for (const auto& item : ds.items) {
            nlohmann::json j = nlohmann::json::object();
            for (const auto& col : columns) {
                auto v = cell_for(item, col);
                if (col == "answer_key" && v.empty()) continue;
                j[col] = v;
            }
            out << j.dump() << '\n';
        }
    } else {
        detail::write_csv_row(out, columns);
        for (const auto& item : ds.items) {
            std::vector<std::string> cells;
            cells.reserve(columns.size());
            for (const auto& col : columns) cells.push_back(cell_for(item, col));
            detail::write_csv_row(out, cells);
        }
    }
}

std::vector<ValidationIssue> validate_dataset(const Dataset& ds) {
    std::vector<ValidationIssue> issues;

    std::map<std::string, std::vector<std::size_t>> by_id;
    for (std::size_t i = 0; i < ds.items.size(); ++i)
        by_id[ds.items[i].sample_id].push_back(i + 1);
    for (const auto& [id, rows] : by_id) {
        if (rows.size() > 1) {
            std::string where;
            for (std::size_t r : rows) {
                if (!where.empty()) where += ", ";
                where += std::to_string(r);
            }
            issues.push_back({id, "duplicate sample_id at rows " + where});
        }
    }

    for (const auto& item : ds.items) {
        if (item.sample_id.empty()) issues.push_back({item.sample_id, "empty sample_id"});
        if (item.grade < 4 || item.grade > 12)
            issues.push_back({item.sample_id, "grade " + std::to_string(item.grade) +
                                                  " outside [4,12]"});
        if (!is_supported_language(item.language))
            issues.push_back({item.sample_id, "unsupported language '" + item.language + "'"});
        if (item.item_type == ItemType::image_text) {
            if (item.image_ref.empty()) {
                issues.push_back({item.sample_id, "image_text item without image_ref"});
            } else {
                fs::path p = fs::path(ds.image_root) / item.image_ref;
                if (!fs::exists(p))
                    issues.push_back(
                        {item.sample_id, "unresolvable image_ref '" + item.image_ref + "'"});
            }
        }
    }
    return issues;
}

DatasetStats compute_stats(const Dataset& ds) {
    struct Agg {
        std::size_t questions = 0, visual = 0;
        std::set<std::string> subjects;
        std::set<int> grades;
    };
    std::map<std::string, Agg> by_lang;
    for (const auto& item : ds.items) {
        auto& agg = by_lang[item.language];
        ++agg.questions;
        if (item.item_type == ItemType::image_text) ++agg.visual;
        agg.subjects.insert(item.subject);
        agg.grades.insert(item.grade);
    }
    DatasetStats stats;
    for (const auto& [lang, agg] : by_lang) {
        DatasetStatsRow row;
        row.language = lang;
        row.n_questions = agg.questions;
        row.n_visual = agg.visual;
        row.n_text = agg.questions - agg.visual;
        row.n_subjects = agg.subjects.size();
        row.grades = agg.grades;
        stats.rows.push_back(std::move(row));
    }
    return stats;
}

namespace {

std::string grades_to_string(const std::set<int>& grades) {
    // Compress runs: {8,9,10,11,12} -> "8-12", {11,12} -> "11, 12".
    std::string out;
    auto it = grades.begin();
    while (it != grades.end()) {
        int lo = *it;
        int hi = lo;
        auto next = std::next(it);
        while (next != grades.end() && *next == hi + 1) {
            hi = *next;
            ++next;
        }
        if (!out.empty()) out += ", ";
        if (hi > lo + 1) out += std::to_string(lo) + "-" + std::to_string(hi);
        else if (hi == lo + 1) out += std::to_string(lo) + ", " + std::to_string(hi);
        else out += std::to_string(lo);
        it = next;
    }
    return out;
}

}  // namespace

std::string render_dataset_stats(const DatasetStats& stats, TableFormat format) {
    detail::Table t;
    t.headers = {"Language", "ISO", "Questions", "Visual / Text", "Subjects", "Grades"};
    std::size_t total_q = 0, total_v = 0;
    for (const auto& row : stats.rows) {
        total_q += row.n_questions;
        total_v += row.n_visual;
        t.rows.push_back({language_display_name(row.language), row.language,
                          std::to_string(row.n_questions),
                          std::to_string(row.n_visual) + " / " + std::to_string(row.n_text),
                          std::to_string(row.n_subjects), grades_to_string(row.grades)});
    }
    if (stats.rows.size() > 1)
        t.rows.push_back({"Total", "", std::to_string(total_q),
                          std::to_string(total_v) + " / " + std::to_string(total_q - total_v),
                          "", ""});
    switch (format) {
        case TableFormat::markdown: return detail::render_table_markdown(t);
        case TableFormat::csv: return detail::render_table_csv(t);
        case TableFormat::text: break;
    }
    return detail::render_table_text(t);
}

std::optional<MismatchFlag> detect_language_mismatch(const ExamItem& item,
                                                     std::string_view extracted_text) {
    const auto* info = find_language(item.language);
    if (!info) return std::nullopt;  // unknown declared language: nothing to compare against

    std::map<Script, std::size_t> counts;
    std::size_t total = 0;
    for (char32_t cp : detail::decode_utf8(extracted_text)) {
        if (!detail::is_alphabetic(cp)) continue;
        ++counts[detail::script_of(cp)];
        ++total;
    }
    if (total == 0) return std::nullopt;

    std::size_t compatible = 0;
    for (Script s : info->scripts) {
        auto it = counts.find(s);
        if (it != counts.end()) compatible += it->second;
    }
    if (compatible * 2 >= total) return std::nullopt;  // declared script supplies >= 50%

    Script dominant = Script::other;
    std::size_t dominant_count = 0;
    for (const auto& [script, count] : counts) {
        if (count > dominant_count) {
            dominant = script;
            dominant_count = count;
        }
    }
    if (dominant_count * 2 < total) return std::nullopt;  // no script reaches 50%

    MismatchFlag flag;
    flag.sample_id = item.sample_id;
    flag.declared_language = item.language;
    flag.dominant_script = dominant;
    flag.severity = (dominant_count * 4 >= total * 3) ? MismatchSeverity::error
                                                      : MismatchSeverity::warn;
    return flag;
}

bool is_supported_language(std::string_view iso) { return find_language(iso) != nullptr; }

const std::vector<std::string>& supported_languages() {
    static const std::vector<std::string> codes = [] {
        std::vector<std::string> out;
        for (const auto& info : language_table()) out.push_back(info.iso);
        return out;
    }();
    return codes;
}

std::vector<Script> compatible_scripts(std::string_view iso) {
    const auto* info = find_language(iso);
    return info ? info->scripts : std::vector<Script>{};
}

std::string language_display_name(std::string_view iso) {
    const auto* info = find_language(iso);
    if (info) return info->name;
    if (iso == "multilingual") return "Multilingual";
    return std::string(iso);
}

}  // namespace examqa
