#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "examqa/caption.hpp"
#include "examqa/dataset.hpp"
#include "examqa/model_client.hpp"
#include "examqa/prompt_engine.hpp"

namespace examqa {

struct TranslationRecord {
    std::string source_sample_id;
    std::string source_language;
    std::string target_language;
    std::string translated_question;
    std::optional<OptionBlock> translated_options;
    std::string translator_id;
    std::string provenance_digest;  // translator request digest
};

class UntranslatableItem : public std::runtime_error {
public:
    explicit UntranslatableItem(const std::string& message) : std::runtime_error(message) {}
};

class TranslatorError : public std::runtime_error {
public:
    explicit TranslatorError(const std::string& message) : std::runtime_error(message) {}
};

struct TranslateOptions {
    std::string template_version = "v1";
    MarkerOptions marker_options;
};

struct TranslateOutcome {
    ExamItem item;
    TranslationRecord record;
};

// Produces a copy of the item in the target language: same answer key,
// grade, subject and image reference; sample_id suffixed with the source
// language; option order preserved. Text comes from the item's
// question/options fields or from a supplied caption (image items).
TranslateOutcome translate_item(const ExamItem& item, const std::string& target,
                                ModelClient& client, const TemplateStore& templates,
                                const TranslateOptions& opts = {},
                                const std::optional<Caption>& caption = std::nullopt);

struct ExpansionFailure {
    std::string sample_id;
    std::string source_language;
    std::string error;
};

struct ExpansionReport {
    std::size_t base_count = 0;
    std::size_t input_total = 0;  // |base| + sum of foreign sizes
    std::map<std::string, std::size_t> per_source;  // translated per source language
    std::vector<ExpansionFailure> failures;
};

struct ExpandResult {
    Dataset dataset;
    ExpansionReport report;
};

struct ExpandOptions {
    std::string target = "en";
    int parallelism = 1;
    TranslateOptions translate;
};

// base items plus translations of every foreign item; failures are
// reported, never fatal. |expanded| + |failures| = |base| + sum|foreign|.
ExpandResult expand_dataset(const Dataset& base, std::span<const Dataset> foreign,
                            ModelClient& client, const TemplateStore& templates,
                            const ExpandOptions& opts = {});

std::string render_expansion_report(const ExpansionReport& report);

}  // namespace examqa
