#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "examqa/answer_norm.hpp"

namespace examqa {

// Structured text produced by the describer and refined by the
// aggregator. `options` is empty (with an unparsed-options warning)
// when the model output did not yield a canonical block.
struct Caption {
    enum class Stage { draft, refined };

    std::string question_text;
    std::optional<OptionBlock> options;
    std::string figure_description;
    std::vector<std::string> warnings;
    std::string language;
    Stage stage = Stage::draft;
    std::string raw_text;  // verbatim model output this caption was parsed from
};

// Canonical caption serialization:
//   Question: ...
//   Options:
//   A. ...
//   Figure: ...
// Falls back to raw_text when no canonical block is available.
std::string format_caption_text(const Caption& caption);

// Parses model output in the canonical shape above. Header matching is
// case-insensitive; missing structure degrades to warnings, never throws.
Caption parse_caption_text(std::string_view text, MarkerOptions opts = {});

}  // namespace examqa
