#pragma once

#include <optional>
#include <string>

#include "examqa/caption.hpp"
#include "examqa/dataset.hpp"
#include "examqa/model_client.hpp"
#include "examqa/predictions.hpp"
#include "examqa/prompt_engine.hpp"

namespace examqa {

struct PipelineConfig {
    int parallelism = 1;
    std::string image_root;  // falls back to the dataset's image root
    // Text items normally traverse all three stages (the describer
    // degrades to transcription); this switch builds the draft caption
    // from item metadata instead.
    bool skip_describe_for_text = false;
    bool aggregator_fallback_to_draft = true;
    bool resample_on_no_answer = false;
    bool reasoner_image_passthrough = false;
    MarkerOptions marker_options;
    std::string describer_version = "v1";
    std::string aggregator_version = "v1";
    std::string reasoner_version = "strict_v1";
};

// Per-item flow: describe -> aggregate -> reason -> extract. Stages are
// strictly serial within an item; items run under a bounded worker pool.
class Pipeline {
public:
    Pipeline(ModelClient& client, const TemplateStore& templates, PipelineConfig config = {});

    struct StageResult {
        Caption caption;
        std::optional<StageTrace> trace;  // absent when no model call was made
    };

    StageResult describe(const ExamItem& item) const;
    StageResult aggregate(const ExamItem& item, const Caption& draft) const;

    struct ReasonOutcome {
        std::optional<AnswerLetter> answer;
        bool strict_compliant = false;
        std::string raw_text;
        StageTrace trace;
    };

    ReasonOutcome reason(const Caption& caption,
                         const std::optional<std::string>& image_bytes = std::nullopt) const;

    Prediction run_item(const ExamItem& item) const;
    PredictionSet run_dataset(const Dataset& ds) const;

    const PipelineConfig& config() const { return config_; }

private:
    std::optional<std::string> load_image(const ExamItem& item) const;
    Caption synthesize_draft(const ExamItem& item) const;

    ModelClient& client_;
    const TemplateStore& templates_;
    PipelineConfig config_;
};

}  // namespace examqa
