#include "examqa/answer_norm.hpp"

#include <algorithm>
#include <array>

#include "examqa/detail/utf8.hpp"

namespace examqa {

using detail::decode_utf8;
using detail::encode_utf8;
using detail::is_word_char;

std::optional<OptionLabel> label_from_char(char c) {
    if (c >= 'A' && c <= 'E') return static_cast<OptionLabel>(c - 'A');
    if (c >= 'a' && c <= 'e') return static_cast<OptionLabel>(c - 'a');
    return std::nullopt;
}

std::optional<OptionLabel> label_from_index(int i) {
    if (i < 0 || i > 4) return std::nullopt;
    return static_cast<OptionLabel>(i);
}

std::string to_string(OptionLabel l) { return std::string(1, to_char(l)); }

const char* extraction_method_name(ExtractionMethod m) {
    switch (m) {
        case ExtractionMethod::exact: return "exact";
        case ExtractionMethod::fallback_scan: return "fallback_scan";
        case ExtractionMethod::script_mapped: return "script_mapped";
    }
    return "exact";
}

std::optional<ExtractionMethod> extraction_method_from_name(std::string_view name) {
    if (name == "exact") return ExtractionMethod::exact;
    if (name == "fallback_scan") return ExtractionMethod::fallback_scan;
    if (name == "script_mapped") return ExtractionMethod::script_mapped;
    return std::nullopt;
}

namespace {

constexpr char32_t kCyrUpperA = 0x0410;  // А Б В Г Д
constexpr char32_t kCyrLowerA = 0x0430;
constexpr char32_t kCircledOne = 0x2460;  // ① .. ⑤
constexpr char32_t kFullwidthA = 0xFF21;
constexpr char32_t kFullwidthLowerA = 0xFF41;
constexpr char32_t kFullwidthOne = 0xFF11;
constexpr char32_t kArabicIndicOne = 0x0661;
constexpr char32_t kTatweel = 0x0640;

// Arabic option letters in abjad order: أ ب ج د هـ
constexpr std::array<char32_t, 5> kArabicLabels = {0x0623, 0x0628, 0x062C, 0x062F, 0x0647};

std::optional<OptionLabel> label_from_letter_cp(char32_t cp) {
    if (cp >= U'A' && cp <= U'E') return label_from_index(static_cast<int>(cp - U'A'));
    if (cp >= U'a' && cp <= U'e') return label_from_index(static_cast<int>(cp - U'a'));
    if (cp >= kCyrUpperA && cp < kCyrUpperA + 5)
        return label_from_index(static_cast<int>(cp - kCyrUpperA));
    if (cp >= kCyrLowerA && cp < kCyrLowerA + 5)
        return label_from_index(static_cast<int>(cp - kCyrLowerA));
    if (cp >= kFullwidthA && cp < kFullwidthA + 5)
        return label_from_index(static_cast<int>(cp - kFullwidthA));
    if (cp >= kFullwidthLowerA && cp < kFullwidthLowerA + 5)
        return label_from_index(static_cast<int>(cp - kFullwidthLowerA));
    for (int i = 0; i < 5; ++i)
        if (cp == kArabicLabels[static_cast<std::size_t>(i)]) return label_from_index(i);
    return std::nullopt;
}

// Self-delimiting marker glyphs that may appear without a decoration.
bool bare_allowed(char32_t cp) {
    if (cp >= kCircledOne && cp < kCircledOne + 5) return true;                    // circled
    if (cp >= kFullwidthA && cp < kFullwidthA + 5) return true;                    // fullwidth
    if (cp >= kFullwidthLowerA && cp < kFullwidthLowerA + 5) return true;
    for (char32_t a : kArabicLabels)
        if (cp == a) return true;
    return false;
}

std::optional<OptionLabel> label_from_digit_cp(char32_t cp) {
    if (cp >= U'1' && cp <= U'5') return label_from_index(static_cast<int>(cp - U'1'));
    if (cp >= kFullwidthOne && cp < kFullwidthOne + 5)
        return label_from_index(static_cast<int>(cp - kFullwidthOne));
    if (cp >= kArabicIndicOne && cp < kArabicIndicOne + 5)
        return label_from_index(static_cast<int>(cp - kArabicIndicOne));
    return std::nullopt;
}

std::optional<OptionLabel> label_from_circled_cp(char32_t cp) {
    if (cp >= kCircledOne && cp < kCircledOne + 5)
        return label_from_index(static_cast<int>(cp - kCircledOne));
    return std::nullopt;
}

bool is_open_paren(char32_t cp) { return cp == U'(' || cp == 0xFF08; }
bool is_close_paren(char32_t cp) { return cp == U')' || cp == 0xFF09; }

bool is_decoration(char32_t cp) {
    switch (cp) {
        case U'.':
        case U')':
        case U':':
        case U'-':
        case 0xFF0E:  // ．
        case 0xFF09:  // ）
        case 0xFF1A:  // ：
        case 0x3002:  // 。
            return true;
        default:
            return false;
    }
}

struct ParsedMarker {
    OptionLabel label;
    std::size_t consumed;  // code points consumed, including decoration
    bool decorated;        // parenthesized or followed by a decoration
};

// Parses a marker at the start of a code-point sequence.
std::optional<ParsedMarker> parse_marker_prefix(std::u32string_view cps, MarkerOptions opts) {
    if (cps.empty()) return std::nullopt;

    std::size_t i = 0;
    const bool open = is_open_paren(cps[0]);
    if (open) ++i;
    if (i >= cps.size()) return std::nullopt;

    std::optional<OptionLabel> label;
    std::size_t glyph_len = 1;
    char32_t head = cps[i];

    label = label_from_letter_cp(head);
    if (!label) label = label_from_circled_cp(head);
    if (!label && opts.allow_digits) label = label_from_digit_cp(head);
    // هـ : heh plus tatweel is the canonical fifth Arabic label.
    if (label && head == kArabicLabels[4] && i + 1 < cps.size() && cps[i + 1] == kTatweel)
        glyph_len = 2;
    if (!label) return std::nullopt;

    i += glyph_len;
    if (open) {
        if (i < cps.size() && is_close_paren(cps[i]))
            return ParsedMarker{*label, i + 1, true};
        return std::nullopt;
    }
    if (i < cps.size() && is_decoration(cps[i])) return ParsedMarker{*label, i + 1, true};
    return ParsedMarker{*label, i, false};
}

bool marker_char_needs_decoration(char32_t head, bool digits_enabled) {
    (void)digits_enabled;
    if (bare_allowed(head)) return false;
    return true;  // Latin, Cyrillic and digit markers are too easy to confuse with text
}

std::u32string trim_u32(std::u32string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && detail::is_ascii_space(s[b])) ++b;
    while (e > b && detail::is_ascii_space(s[e - 1])) --e;
    return std::u32string(s.substr(b, e - b));
}

}  // namespace

std::optional<OptionLabel> parse_label(std::string_view token) {
    const std::u32string cps = trim_u32(decode_utf8(token));
    if (cps.empty()) return std::nullopt;
    if (cps.size() == 1) {
        if (auto l = label_from_letter_cp(cps[0])) return l;
        if (auto l = label_from_circled_cp(cps[0])) return l;
        return std::nullopt;
    }
    if (cps.size() == 2 && cps[0] == kArabicLabels[4] && cps[1] == kTatweel)
        return OptionLabel::E;
    return std::nullopt;
}

std::optional<OptionLabel> normalize_marker(std::string_view token, MarkerOptions opts) {
    const std::u32string cps = trim_u32(decode_utf8(token));
    if (cps.empty()) return std::nullopt;
    auto parsed = parse_marker_prefix(cps, opts);
    if (!parsed) return std::nullopt;
    if (parsed->consumed != cps.size()) return std::nullopt;  // trailing junk: not a marker
    char32_t head = is_open_paren(cps[0]) ? cps[1] : cps[0];
    if (!parsed->decorated && marker_char_needs_decoration(head, opts.allow_digits))
        return std::nullopt;
    return parsed->label;
}

std::optional<MarkerSplit> split_leading_marker(std::string_view line, MarkerOptions opts) {
    const std::u32string cps = trim_u32(decode_utf8(line));
    if (cps.empty()) return std::nullopt;
    auto parsed = parse_marker_prefix(cps, opts);
    if (!parsed) return std::nullopt;

    const char32_t head = is_open_paren(cps[0]) ? cps[1] : cps[0];
    const bool at_end = parsed->consumed == cps.size();
    const bool followed_by_space =
        !at_end && detail::is_ascii_space(cps[parsed->consumed]);

    if (parsed->decorated) {
        // "A.text" is acceptable: the decoration delimits the marker.
    } else {
        if (marker_char_needs_decoration(head, opts.allow_digits)) return std::nullopt;
        if (!at_end && !followed_by_space) return std::nullopt;  // bare marker glued to a word
    }

    std::u32string rest = trim_u32(std::u32string_view(cps).substr(parsed->consumed));
    return MarkerSplit{parsed->label, encode_utf8(rest)};
}

OptionBlock canonicalize_options(std::span<const std::string> raw_lines, MarkerOptions opts) {
    std::vector<std::string> usable;
    usable.reserve(raw_lines.size());
    for (const auto& line : raw_lines) {
        auto t = detail::trim_ascii(line);
        if (!t.empty()) usable.emplace_back(t);
    }
    if (usable.size() < 2)
        throw CanonicalizeError(CanonicalizeErrorKind::too_few_options,
                                "need at least 2 option lines, got " +
                                    std::to_string(usable.size()));

    std::vector<std::optional<MarkerSplit>> splits;
    splits.reserve(usable.size());
    std::size_t marked = 0;
    for (const auto& line : usable) {
        splits.push_back(split_leading_marker(line, opts));
        if (splits.back()) ++marked;
    }

    OptionBlock block;
    if (marked >= 2) {
        block.labeling_source = LabelingSource::explicit_markers;
        for (std::size_t i = 0; i < usable.size(); ++i) {
            if (splits[i]) {
                block.options.push_back({splits[i]->label, splits[i]->text});
            } else {
                // Unmarked line inside an explicit block: wrapped text
                // continuing the previous option.
                if (block.options.empty())
                    throw CanonicalizeError(CanonicalizeErrorKind::inconsistent_labels,
                                            "unmarked line before first marker");
                auto& prev = block.options.back().text;
                if (!prev.empty()) prev += ' ';
                prev += usable[i];
            }
        }
        for (std::size_t i = 0; i < block.options.size(); ++i) {
            if (to_index(block.options[i].label) != static_cast<int>(i)) {
                std::string got;
                for (const auto& o : block.options) {
                    if (!got.empty()) got += ',';
                    got += to_char(o.label);
                }
                throw CanonicalizeError(CanonicalizeErrorKind::inconsistent_labels,
                                        "markers map to " + got +
                                            "; expected consecutive labels from A");
            }
        }
    } else {
        block.labeling_source = LabelingSource::positional;
        for (std::size_t i = 0; i < usable.size(); ++i) {
            auto label = label_from_index(static_cast<int>(i));
            if (!label)
                throw CanonicalizeError(CanonicalizeErrorKind::too_many_options,
                                        "more than 5 option lines");
            block.options.push_back({*label, usable[i]});
        }
    }

    if (block.options.size() > 5)
        throw CanonicalizeError(CanonicalizeErrorKind::too_many_options,
                                "more than 5 options");
    if (block.options.size() < 2)
        throw CanonicalizeError(CanonicalizeErrorKind::too_few_options,
                                "fewer than 2 options after merging continuations");
    for (const auto& o : block.options)
        if (o.text.empty())
            throw CanonicalizeError(CanonicalizeErrorKind::inconsistent_labels,
                                    std::string("empty text for option ") + to_char(o.label));
    return block;
}

namespace {

bool is_markdown_strip_char(char32_t cp) {
    return detail::is_ascii_space(cp) || cp == U'*' || cp == U'_' || cp == U'`' ||
           cp == U'#' || cp == U'.';
}

std::u32string_view strip_decorations(std::u32string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_markdown_strip_char(s[b])) ++b;
    while (e > b && is_markdown_strip_char(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::optional<OptionLabel> exact_single_letter(std::u32string_view cps) {
    auto t = strip_decorations(cps);
    if (t.size() != 1) return std::nullopt;
    char32_t c = t[0];
    if (c >= U'a' && c <= U'e') c = c - U'a' + U'A';
    if (c >= U'A' && c <= U'E') return label_from_index(static_cast<int>(c - U'A'));
    return std::nullopt;
}

// Last standalone uppercase A-E. Lowercase is deliberately excluded:
// bare "a" / "e" / "i" are common words in several supported languages.
std::optional<OptionLabel> last_standalone_letter(std::u32string_view cps) {
    std::optional<OptionLabel> found;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t c = cps[i];
        if (c < U'A' || c > U'E') continue;
        const bool left_ok = (i == 0) || !is_word_char(cps[i - 1]);
        const bool right_ok = (i + 1 == cps.size()) || !is_word_char(cps[i + 1]);
        if (left_ok && right_ok) found = label_from_index(static_cast<int>(c - U'A'));
    }
    return found;
}

std::u32string map_script_letters(std::u32string_view cps, bool& changed) {
    std::u32string out;
    out.reserve(cps.size());
    changed = false;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t c = cps[i];
        if (c == kArabicLabels[4] && i + 1 < cps.size() && cps[i + 1] == kTatweel) {
            out.push_back(U'E');
            changed = true;
            ++i;
            continue;
        }
        char32_t m = c;
        if (c >= kCyrUpperA && c < kCyrUpperA + 5) m = U'A' + (c - kCyrUpperA);
        else if (c >= kCyrLowerA && c < kCyrLowerA + 5) m = U'a' + (c - kCyrLowerA);
        else if (c >= kCircledOne && c < kCircledOne + 5) m = U'A' + (c - kCircledOne);
        else if (c >= kFullwidthA && c < kFullwidthA + 5) m = U'A' + (c - kFullwidthA);
        else if (c >= kFullwidthLowerA && c < kFullwidthLowerA + 5)
            m = U'a' + (c - kFullwidthLowerA);
        else {
            for (int k = 0; k < 5; ++k) {
                if (c == kArabicLabels[static_cast<std::size_t>(k)]) {
                    m = static_cast<char32_t>(U'A' + k);
                    break;
                }
            }
        }
        if (m != c) changed = true;
        out.push_back(m);
    }
    return out;
}

}  // namespace

std::optional<AnswerLetter> extract_answer_letter(std::string_view raw_output) {
    const std::u32string cps = decode_utf8(raw_output);

    if (auto l = exact_single_letter(cps))
        return AnswerLetter{*l, ExtractionMethod::exact};
    if (auto l = last_standalone_letter(cps))
        return AnswerLetter{*l, ExtractionMethod::fallback_scan};

    bool changed = false;
    const std::u32string mapped = map_script_letters(cps, changed);
    if (changed) {
        if (auto l = exact_single_letter(mapped))
            return AnswerLetter{*l, ExtractionMethod::script_mapped};
        if (auto l = last_standalone_letter(mapped))
            return AnswerLetter{*l, ExtractionMethod::script_mapped};
    }
    return std::nullopt;
}

std::optional<OptionLabel> strip_and_validate_strict(std::string_view raw_output) {
    const auto t = detail::trim_ascii(raw_output);
    if (t.size() != 1) return std::nullopt;
    const char c = t[0];
    if (c >= 'A' && c <= 'E') return label_from_char(c);
    return std::nullopt;
}

}  // namespace examqa
