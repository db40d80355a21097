#include "examqa/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <variant>

#include "examqa/detail/hash.hpp"
#include "examqa/detail/utf8.hpp"
#include "examqa/detail/worker_pool.hpp"

namespace fs = std::filesystem;

namespace examqa {

namespace {

bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != haystack.end();
}

std::vector<std::string> split_option_field(const std::string& field) {
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

}  // namespace

Pipeline::Pipeline(ModelClient& client, const TemplateStore& templates, PipelineConfig config)
    : client_(client), templates_(templates), config_(std::move(config)) {}

std::optional<std::string> Pipeline::load_image(const ExamItem& item) const {
    if (item.item_type != ItemType::image_text || item.image_ref.empty())
        return std::nullopt;
    const fs::path path = fs::path(config_.image_root) / item.image_ref;
    std::ifstream in(path, std::ios::binary);
    if (!in.good())
        throw std::runtime_error("cannot read image '" + path.string() + "' for item " +
                                 item.sample_id);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Caption Pipeline::synthesize_draft(const ExamItem& item) const {
    Caption caption;
    caption.language = item.language;
    caption.stage = Caption::Stage::draft;
    auto q = item.extra.find("question");
    if (q != item.extra.end()) caption.question_text = q->second;
    auto opts_field = item.extra.find("options");
    if (opts_field != item.extra.end()) {
        try {
            caption.options =
                canonicalize_options(split_option_field(opts_field->second),
                                     config_.marker_options);
        } catch (const CanonicalizeError& e) {
            caption.warnings.push_back(std::string("unparsed options: ") + e.what());
        }
    }
    caption.raw_text = format_caption_text(caption);
    if (caption.raw_text.empty()) {
        caption.question_text = format_item_metadata(item);
        caption.raw_text = caption.question_text;
        caption.warnings.push_back("no question text available; using metadata");
    }
    return caption;
}

Pipeline::StageResult Pipeline::describe(const ExamItem& item) const {
    if (config_.skip_describe_for_text && item.item_type == ItemType::text)
        return {synthesize_draft(item), std::nullopt};

    auto prompt = render_describer(templates_, item, config_.describer_version);
    auto image = load_image(item);
    auto request = client_.make_request(Role::describer, prompt.text, std::move(image));
    auto response = client_.complete(request);

    Caption caption = parse_caption_text(response.text, config_.marker_options);
    caption.language = item.language;
    caption.stage = Caption::Stage::draft;

    StageTrace trace{"describe", cache_key(request), response.latency_ms,
                     response.from_cache};
    return {std::move(caption), trace};
}

Pipeline::StageResult Pipeline::aggregate(const ExamItem& item, const Caption& draft) const {
    if (draft.stage != Caption::Stage::draft)
        throw std::logic_error("aggregate expects a draft caption");

    auto prompt = render_aggregator(templates_, item, draft, config_.aggregator_version);
    std::optional<StageTrace> trace;
    Caption refined;
    try {
        auto image = load_image(item);
        auto request = client_.make_request(Role::aggregator, prompt.text, std::move(image));
        auto response = client_.complete(request);
        refined = parse_caption_text(response.text, config_.marker_options);
        if (contains_ci(response.text, "missing diagram") &&
            std::find(refined.warnings.begin(), refined.warnings.end(), "missing diagram") ==
                refined.warnings.end())
            refined.warnings.push_back("missing diagram");
        trace = StageTrace{"aggregate", cache_key(request), response.latency_ms,
                           response.from_cache};
    } catch (const ClientError&) {
        if (!config_.aggregator_fallback_to_draft) throw;
        refined = draft;
        refined.warnings.push_back("aggregator failed; fell back to draft caption");
    }

    // draft warnings carry forward
    for (const auto& w : draft.warnings)
        if (std::find(refined.warnings.begin(), refined.warnings.end(), w) ==
            refined.warnings.end())
            refined.warnings.push_back(w);
    refined.language = item.language;
    refined.stage = Caption::Stage::refined;
    return {std::move(refined), trace};
}

Pipeline::ReasonOutcome Pipeline::reason(const Caption& caption,
                                         const std::optional<std::string>& image_bytes) const {
    const std::string caption_text = format_caption_text(caption);
    auto prompt = render_reasoner(templates_, caption_text, config_.reasoner_version);

    // caption-only by default; image passthrough is an explicit override
    std::optional<std::string> image;
    if (config_.reasoner_image_passthrough) image = image_bytes;
    auto request = client_.make_request(Role::reasoner, prompt.text, std::move(image));
    auto response = client_.complete(request);

    ReasonOutcome outcome;
    outcome.raw_text = response.text;
    outcome.answer = extract_answer_letter(response.text);
    outcome.strict_compliant = strip_and_validate_strict(response.text).has_value();
    outcome.trace = StageTrace{"reason", cache_key(request), response.latency_ms,
                               response.from_cache};

    if (!outcome.answer && config_.resample_on_no_answer) {
        auto retry = client_.complete(request, /*bypass_cache_read=*/true);
        outcome.raw_text = retry.text;
        outcome.answer = extract_answer_letter(retry.text);
        outcome.strict_compliant = strip_and_validate_strict(retry.text).has_value();
    }
    return outcome;
}

namespace {

struct StageFailure : std::runtime_error {
    StageFailure(std::string stage_name, const std::string& message)
        : std::runtime_error(message), stage(std::move(stage_name)) {}
    std::string stage;
};

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure(stage, e.what());
    }
}

}  // namespace

Prediction Pipeline::run_item(const ExamItem& item) const {
    Prediction prediction;
    prediction.sample_id = item.sample_id;
    prediction.language = item.language;

    auto draft = run_stage("describe", [&] { return describe(item); });
    if (draft.trace) prediction.traces.push_back(*draft.trace);

    auto refined = run_stage("aggregate", [&] { return aggregate(item, draft.caption); });
    if (refined.trace) prediction.traces.push_back(*refined.trace);

    prediction.caption_text = format_caption_text(refined.caption);
    prediction.caption_digest = detail::sha256_hex(prediction.caption_text);
    prediction.warnings = refined.caption.warnings;

    if (auto mismatch = detect_language_mismatch(item, prediction.caption_text))
        prediction.warnings.push_back(
            std::string("language mismatch: dominant script ") +
            detail::script_name(mismatch->dominant_script) + " (" +
            (mismatch->severity == MismatchSeverity::error ? "error" : "warn") + ")");

    auto outcome = run_stage("reason", [&] {
        return reason(refined.caption, config_.reasoner_image_passthrough
                                           ? load_image(item)
                                           : std::nullopt);
    });
    prediction.traces.push_back(outcome.trace);
    prediction.answer = outcome.answer;
    prediction.strict_compliant = outcome.strict_compliant;
    if (!outcome.answer) prediction.warnings.push_back("no answer extracted");
    return prediction;
}

PredictionSet Pipeline::run_dataset(const Dataset& ds) const {
    client_.routing().validate();

    Pipeline runner = *this;
    if (runner.config_.image_root.empty()) runner.config_.image_root = ds.image_root;

    using Slot = std::variant<std::monostate, Prediction, FailureRecord>;
    std::vector<Slot> slots(ds.items.size());

    detail::parallel_for(ds.items.size(), config_.parallelism, [&](std::size_t i) {
        const ExamItem& item = ds.items[i];
        try {
            slots[i] = runner.run_item(item);
        } catch (const StageFailure& e) {
            slots[i] = FailureRecord{item.sample_id, e.stage, e.what()};
        } catch (const std::exception& e) {
            slots[i] = FailureRecord{item.sample_id, "pipeline", e.what()};
        }
    });

    PredictionSet set;
    for (auto& slot : slots) {
        if (std::holds_alternative<Prediction>(slot))
            set.predictions.push_back(std::get<Prediction>(std::move(slot)));
        else if (std::holds_alternative<FailureRecord>(slot))
            set.failures.push_back(std::get<FailureRecord>(std::move(slot)));
    }
    return set;
}

}  // namespace examqa
