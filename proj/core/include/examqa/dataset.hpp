#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "examqa/answer_norm.hpp"
#include "examqa/detail/utf8.hpp"

namespace examqa {

using detail::Script;

enum class ItemType { text, image_text };
enum class Split { train, validation, test };

const char* to_string(ItemType t);
const char* to_string(Split s);
std::optional<Split> split_from_string(std::string_view s);

// One exam question record from a manifest. The question content itself
// lives in the referenced image (or in opaque extra columns such as
// "question"/"options" for pre-extracted text).
struct ExamItem {
    std::string sample_id;
    std::string subject;
    ItemType item_type = ItemType::text;
    int grade = 0;
    std::optional<OptionLabel> answer_key;  // absent on test splits
    std::string language;                   // ISO 639-1
    std::string image_ref;                  // relative to the dataset image root
    std::map<std::string, std::string> extra;  // unknown manifest columns, preserved
};

struct Dataset {
    std::vector<ExamItem> items;
    std::string source_path;
    std::string image_root;
    Split split = Split::test;
    std::vector<std::string> extra_columns;  // manifest order of unknown columns
};

struct ValidationIssue {
    std::string sample_id;
    std::string reason;
};

struct DatasetStatsRow {
    std::string language;
    std::size_t n_questions = 0;
    std::size_t n_visual = 0;
    std::size_t n_text = 0;
    std::size_t n_subjects = 0;
    std::set<int> grades;
};

struct DatasetStats {
    std::vector<DatasetStatsRow> rows;  // sorted by language code
};

enum class MismatchSeverity { warn, error };

struct MismatchFlag {
    std::string sample_id;
    std::string declared_language;
    Script dominant_script = Script::other;
    MismatchSeverity severity = MismatchSeverity::warn;
};

enum class LoadErrorKind { io, missing_column, bad_enum, bad_row };

class LoadError : public std::runtime_error {
public:
    LoadError(LoadErrorKind kind, std::size_t row, const std::string& message)
        : std::runtime_error(message), kind_(kind), row_(row) {}
    LoadErrorKind kind() const { return kind_; }
    std::size_t row() const { return row_; }  // 1-based data row; 0 = file level

private:
    LoadErrorKind kind_;
    std::size_t row_;
};

struct LoadOptions {
    Split split = Split::test;
    // Strict aborts on the first bad row; lenient skips it. Unset picks
    // strict for train/validation and lenient for test.
    std::optional<bool> strict;
    MarkerOptions marker_options;  // governs answer_key digit forms
};

struct RowIssue {
    std::size_t row = 0;  // 1-based data row
    std::string message;
};

struct LoadResult {
    Dataset dataset;
    std::vector<RowIssue> skipped;  // lenient mode only
};

// Loads a CSV or JSONL manifest (picked by file extension). Unknown
// columns are preserved verbatim; row order is kept.
LoadResult load_dataset(const std::string& manifest_path, const std::string& image_root,
                        const LoadOptions& opts = {});

// Writes a manifest with the canonical columns plus the dataset's extra
// columns, CSV or JSONL by extension. load(write(ds)) reproduces ds.
void write_manifest(const Dataset& ds, const std::string& path);

// Empty result means every item invariant holds and every image_ref
// resolves under the dataset image root.
std::vector<ValidationIssue> validate_dataset(const Dataset& ds);

DatasetStats compute_stats(const Dataset& ds);

enum class TableFormat { text, markdown, csv };
std::string render_dataset_stats(const DatasetStats& stats, TableFormat format);

// Flags items whose caption/OCR text is dominated (>= 50% of alphabetic
// code points) by a script incompatible with the declared language.
std::optional<MismatchFlag> detect_language_mismatch(const ExamItem& item,
                                                     std::string_view extracted_text);

// Supported ISO 639-1 codes (union of the leaderboard and statistics
// language sets) and their writing systems.
bool is_supported_language(std::string_view iso);
const std::vector<std::string>& supported_languages();
std::vector<Script> compatible_scripts(std::string_view iso);
std::string language_display_name(std::string_view iso);

}  // namespace examqa
