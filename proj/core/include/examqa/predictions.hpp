#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "examqa/answer_norm.hpp"

namespace examqa {

struct StageTrace {
    std::string stage;  // "describe" / "aggregate" / "reason"
    std::string request_digest;
    double latency_ms = 0.0;
    bool from_cache = false;
};

// Auditable per-item outcome: the answer plus everything needed to trace
// it back to the model calls that produced it.
struct Prediction {
    std::string sample_id;
    std::string language;
    std::optional<AnswerLetter> answer;  // nullopt = no answer, scored incorrect
    bool strict_compliant = false;
    std::string caption_text;  // refined caption as handed to the reasoner
    std::string caption_digest;
    std::vector<StageTrace> traces;
    std::vector<std::string> warnings;

    std::vector<std::string> trace_refs() const;
    std::map<std::string, double> stage_latencies() const;
};

struct FailureRecord {
    std::string sample_id;
    std::string stage;
    std::string error;
};

struct PredictionSet {
    std::vector<Prediction> predictions;  // dataset order
    std::vector<FailureRecord> failures;

    const Prediction* find(const std::string& sample_id) const;
};

// Submission format: header "sample_id,answer", letters A-E, empty cell
// for unanswered items.
void write_predictions_csv(const PredictionSet& preds, const std::string& path);
PredictionSet read_predictions_csv(const std::string& path);

// JSONL audit log: first line carries the serialized run config, then
// one line per prediction and per failure.
void write_audit_log(const PredictionSet& preds, const std::string& run_config_json,
                     const std::string& path);
PredictionSet read_audit_log(const std::string& path);

}  // namespace examqa
