#include "examqa/augmentation.hpp"

#include <algorithm>
#include <sstream>
#include <variant>

#include "examqa/detail/utf8.hpp"
#include "examqa/detail/worker_pool.hpp"

namespace examqa {

namespace {

std::vector<std::string> split_lines_field(const std::string& field) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : field) {
        if (c == '\n' || c == '|') {
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    lines.push_back(current);
    return lines;
}

// '|' keeps expanded manifests one physical line per row; the loader
// accepts either separator.
std::string join_option_lines(const OptionBlock& block) {
    std::string out;
    for (const auto& option : block.options) {
        if (!out.empty()) out += '|';
        out += to_char(option.label);
        out += ". ";
        out += option.text;
    }
    return out;
}

}  // namespace

TranslateOutcome translate_item(const ExamItem& item, const std::string& target,
                                ModelClient& client, const TemplateStore& templates,
                                const TranslateOptions& opts,
                                const std::optional<Caption>& caption) {
    TranslationRecord record;
    record.source_sample_id = item.sample_id;
    record.source_language = item.language;
    record.target_language = target;
    record.translator_id = client.routing().at(Role::translator).model_id;

    // gather source text
    std::string question;
    std::optional<OptionBlock> options;
    std::string figure;
    if (caption) {
        question = caption->question_text;
        options = caption->options;
        figure = caption->figure_description;
    } else {
        if (auto it = item.extra.find("question"); it != item.extra.end())
            question = it->second;
        if (auto it = item.extra.find("options"); it != item.extra.end()) {
            try {
                options = canonicalize_options(split_lines_field(it->second),
                                               opts.marker_options);
            } catch (const CanonicalizeError& e) {
                throw UntranslatableItem("item " + item.sample_id +
                                         ": options not canonical: " + e.what());
            }
        }
    }
    if (question.empty() && !options)
        throw UntranslatableItem("item " + item.sample_id +
                                 " has no extractable text (no question, options, or caption)");

    // identity target: nothing to translate, only provenance changes
    if (item.language == target) {
        TranslateOutcome outcome;
        outcome.item = item;
        outcome.item.extra["source_language"] = item.language;
        outcome.item.extra["translator_id"] = "identity";
        record.translated_question = question;
        record.translated_options = options;
        record.translator_id = "identity";
        outcome.record = std::move(record);
        return outcome;
    }

    Caption block;
    block.question_text = question;
    block.options = options;
    block.figure_description = figure;
    const std::string block_text = format_caption_text(block);

    auto prompt = render_translator(templates, block_text, item.language, target,
                                    opts.template_version);
    auto request = client.make_request(Role::translator, prompt.text);
    ModelResponse response;
    try {
        response = client.complete(request);
    } catch (const ClientError& e) {
        throw TranslatorError(std::string("translator backend failed for item ") +
                              item.sample_id + ": " + e.what());
    }
    record.provenance_digest = cache_key(request);

    Caption translated = parse_caption_text(response.text, opts.marker_options);
    if (translated.question_text.empty() && !translated.options)
        throw TranslatorError("translator returned no parsable item for " + item.sample_id);
    if (options) {
        if (!translated.options)
            throw TranslatorError("translator dropped the option block for " +
                                  item.sample_id);
        if (translated.options->options.size() != options->options.size())
            throw TranslatorError("translator changed the option count for " +
                                  item.sample_id);
    }

    record.translated_question = translated.question_text;
    record.translated_options = translated.options;

    TranslateOutcome outcome;
    outcome.item = item;
    outcome.item.language = target;
    outcome.item.sample_id = item.sample_id + "-" + item.language;
    outcome.item.extra["question"] = translated.question_text;
    if (translated.options)
        outcome.item.extra["options"] = join_option_lines(*translated.options);
    outcome.item.extra["source_language"] = item.language;
    outcome.item.extra["translator_id"] = record.translator_id;
    outcome.record = std::move(record);
    return outcome;
}

ExpandResult expand_dataset(const Dataset& base, std::span<const Dataset> foreign,
                            ModelClient& client, const TemplateStore& templates,
                            const ExpandOptions& opts) {
    ExpandResult result;
    result.dataset.items = base.items;
    result.dataset.source_path = base.source_path;
    result.dataset.image_root = base.image_root;
    result.dataset.split = base.split;

    // column union: base order first, then anything new
    auto add_column = [&](const std::string& col) {
        auto& cols = result.dataset.extra_columns;
        if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
    };
    for (const auto& col : base.extra_columns) add_column(col);
    for (const auto& ds : foreign)
        for (const auto& col : ds.extra_columns) add_column(col);
    for (const char* col : {"question", "options", "source_language", "translator_id"})
        add_column(col);

    std::vector<const ExamItem*> queue;
    for (const auto& ds : foreign)
        for (const auto& item : ds.items) queue.push_back(&item);

    result.report.base_count = base.items.size();
    result.report.input_total = base.items.size() + queue.size();

    using Slot = std::variant<std::monostate, TranslateOutcome, ExpansionFailure>;
    std::vector<Slot> slots(queue.size());
    detail::parallel_for(queue.size(), opts.parallelism, [&](std::size_t i) {
        const ExamItem& item = *queue[i];
        try {
            slots[i] = translate_item(item, opts.target, client, templates, opts.translate);
        } catch (const std::exception& e) {
            slots[i] = ExpansionFailure{item.sample_id, item.language, e.what()};
        }
    });

    for (auto& slot : slots) {
        if (std::holds_alternative<TranslateOutcome>(slot)) {
            auto outcome = std::get<TranslateOutcome>(std::move(slot));
            ++result.report.per_source[outcome.record.source_language];
            result.dataset.items.push_back(std::move(outcome.item));
        } else if (std::holds_alternative<ExpansionFailure>(slot)) {
            result.report.failures.push_back(std::get<ExpansionFailure>(std::move(slot)));
        }
    }
    return result;
}

std::string render_expansion_report(const ExpansionReport& report) {
    std::ostringstream out;
    std::size_t translated = 0;
    for (const auto& [lang, count] : report.per_source) translated += count;
    out << "base items: " << report.base_count << '\n';
    for (const auto& [lang, count] : report.per_source) {
        std::size_t failed = 0;
        for (const auto& f : report.failures)
            if (f.source_language == lang) ++failed;
        out << "  " << lang << ": " << count << " translated";
        if (failed) out << ", " << failed << " failed";
        out << '\n';
    }
    // sources where every item failed still need a line
    std::map<std::string, std::size_t> failures_only;
    for (const auto& f : report.failures)
        if (!report.per_source.count(f.source_language)) ++failures_only[f.source_language];
    for (const auto& [lang, failed] : failures_only)
        out << "  " << lang << ": 0 translated, " << failed << " failed\n";
    out << "expanded total: " << (report.base_count + translated) << " (input "
        << report.input_total << ", failures " << report.failures.size() << ")\n";
    return out.str();
}

}  // namespace examqa
