#include "examqa/caption.hpp"

#include <algorithm>
#include <sstream>

#include "examqa/detail/utf8.hpp"

namespace examqa {

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        auto line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

// Case-insensitive "Header:" match at the start of a trimmed line;
// returns the text after the colon.
std::optional<std::string> match_header(std::string_view line, std::string_view header) {
    auto t = detail::trim_ascii(line);
    if (t.size() < header.size() + 1) return std::nullopt;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(t[i])) !=
            std::tolower(static_cast<unsigned char>(header[i])))
            return std::nullopt;
    }
    if (t[header.size()] != ':') return std::nullopt;
    return std::string(detail::trim_ascii(t.substr(header.size() + 1)));
}

}  // namespace

std::string format_caption_text(const Caption& caption) {
    if (!caption.options) {
        if (!caption.raw_text.empty()) return caption.raw_text;
        // no structure at all: emit what we have
        std::string out;
        if (!caption.question_text.empty()) out += "Question: " + caption.question_text;
        if (!caption.figure_description.empty()) {
            if (!out.empty()) out += '\n';
            out += "Figure: " + caption.figure_description;
        }
        return out;
    }

    std::ostringstream out;
    out << "Question: " << caption.question_text << '\n';
    out << "Options:\n";
    for (const auto& option : caption.options->options)
        out << to_char(option.label) << ". " << option.text << '\n';
    if (!caption.figure_description.empty())
        out << "Figure: " << caption.figure_description << '\n';
    std::string s = out.str();
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

Caption parse_caption_text(std::string_view text, MarkerOptions opts) {
    Caption caption;
    caption.raw_text = std::string(text);

    enum class Section { preamble, question, options, figure };
    Section section = Section::preamble;

    std::vector<std::string> question_lines;
    std::vector<std::string> option_lines;
    std::vector<std::string> figure_lines;

    for (const auto& line : split_lines(text)) {
        if (auto rest = match_header(line, "question")) {
            section = Section::question;
            if (!rest->empty()) question_lines.push_back(*rest);
            continue;
        }
        if (auto rest = match_header(line, "options")) {
            section = Section::options;
            if (!rest->empty()) option_lines.push_back(*rest);
            continue;
        }
        if (auto rest = match_header(line, "figure")) {
            section = Section::figure;
            if (!rest->empty()) figure_lines.push_back(*rest);
            continue;
        }
        auto trimmed = detail::trim_ascii(line);
        if (trimmed.empty()) continue;
        if (trimmed.rfind("WARNING:", 0) == 0) {
            caption.warnings.emplace_back(detail::trim_ascii(trimmed.substr(8)));
            continue;
        }
        switch (section) {
            case Section::preamble: break;  // text before any header is ignored
            case Section::question: question_lines.emplace_back(trimmed); break;
            case Section::options: option_lines.emplace_back(trimmed); break;
            case Section::figure: figure_lines.emplace_back(trimmed); break;
        }
    }

    auto join = [](const std::vector<std::string>& lines) {
        std::string out;
        for (const auto& l : lines) {
            if (!out.empty()) out += '\n';
            out += l;
        }
        return out;
    };

    caption.question_text = join(question_lines);
    caption.figure_description = join(figure_lines);

    if (caption.question_text.empty() && option_lines.empty()) {
        // No recognizable structure; keep the whole text as the question.
        caption.question_text = std::string(detail::trim_ascii(text));
        caption.warnings.push_back("unstructured caption");
        return caption;
    }

    if (option_lines.empty()) {
        caption.warnings.push_back("unparsed options: no Options section");
        return caption;
    }
    try {
        caption.options = canonicalize_options(option_lines, opts);
    } catch (const CanonicalizeError& e) {
        caption.warnings.push_back(std::string("unparsed options: ") + e.what());
    }
    return caption;
}

}  // namespace examqa
