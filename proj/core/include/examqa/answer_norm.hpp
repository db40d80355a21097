#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace examqa {

// Canonical choice identifier. The set is closed: any surface marker or
// model output is either mapped into it or rejected.
enum class OptionLabel : unsigned char { A = 0, B, C, D, E };

constexpr char to_char(OptionLabel l) { return static_cast<char>('A' + static_cast<int>(l)); }
constexpr int to_index(OptionLabel l) { return static_cast<int>(l); }

std::optional<OptionLabel> label_from_char(char c);
std::optional<OptionLabel> label_from_index(int i);
std::optional<OptionLabel> parse_label(std::string_view token);  // accepts any bare label form

std::string to_string(OptionLabel l);

enum class LabelingSource { explicit_markers, positional };

struct OptionEntry {
    OptionLabel label;
    std::string text;
};

struct OptionBlock {
    std::vector<OptionEntry> options;
    LabelingSource labeling_source = LabelingSource::explicit_markers;
};

enum class ExtractionMethod { exact, fallback_scan, script_mapped };

const char* extraction_method_name(ExtractionMethod m);
std::optional<ExtractionMethod> extraction_method_from_name(std::string_view name);

// A letter recovered from reasoner output, together with how it was
// obtained so downstream compliance reports can audit the run.
struct AnswerLetter {
    OptionLabel value;
    ExtractionMethod extraction_method;
};

struct MarkerOptions {
    // "1." / "1)" style markers capture enumerated sub-questions in some
    // sources, so digit labeling is opt-in per dataset.
    bool allow_digits = false;
};

// Maps one candidate marker token (the leading token of an option line,
// already trimmed) to its canonical label. Recognized forms: Latin or
// Cyrillic letters with . ) : - decorations or wrapped in parentheses,
// fullwidth Latin, circled digits, Arabic option letters, and plain
// digits when enabled. Anything else is std::nullopt.
std::optional<OptionLabel> normalize_marker(std::string_view token, MarkerOptions opts = {});

struct MarkerSplit {
    OptionLabel label;
    std::string text;  // remainder of the line, trimmed
};

// Recognizes a marker at the start of a full option line and splits it
// off. Bare letter markers require following whitespace; decorated ones
// may abut the text.
std::optional<MarkerSplit> split_leading_marker(std::string_view line, MarkerOptions opts = {});

enum class CanonicalizeErrorKind { too_few_options, too_many_options, inconsistent_labels };

class CanonicalizeError : public std::runtime_error {
public:
    CanonicalizeError(CanonicalizeErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    CanonicalizeErrorKind kind() const { return kind_; }

private:
    CanonicalizeErrorKind kind_;
};

// Turns candidate option lines (reading order) into a canonical block.
// Two or more recognizable markers select explicit labeling (markers
// stripped, unmarked lines joined onto the previous option); otherwise
// labels are assigned positionally. Throws CanonicalizeError.
OptionBlock canonicalize_options(std::span<const std::string> raw_lines, MarkerOptions opts = {});

// Lenient extraction: exact single letter, then last standalone A-E
// token, then script-mapped retry. std::nullopt means no answer; the
// item is scored incorrect, never crashed on.
std::optional<AnswerLetter> extract_answer_letter(std::string_view raw_output);

// Strict contract from the reasoner prompt: exactly one uppercase letter
// once surrounding whitespace is removed. Measured separately from the
// lenient extractor so format compliance reflects the prompt literally.
std::optional<OptionLabel> strip_and_validate_strict(std::string_view raw_output);

}  // namespace examqa
