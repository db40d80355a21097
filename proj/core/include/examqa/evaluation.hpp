#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "examqa/dataset.hpp"
#include "examqa/predictions.hpp"

namespace examqa {

enum class EvalErrorKind {
    unknown_sample_id,
    missing_gold_key,
    missing_baseline,
    inconsistent_grid,
    schema,
};

class EvalError : public std::runtime_error {
public:
    EvalError(EvalErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    EvalErrorKind kind() const { return kind_; }

private:
    EvalErrorKind kind_;
};

// Fraction of gold items answered with the correct letter. Missing and
// unanswered predictions count as incorrect; predictions for unknown
// sample ids are an error.
double score(const PredictionSet& preds, const Dataset& gold);

struct EvalRow {
    std::string language;  // ISO code, or "multilingual" for the pooled row
    std::optional<double> baseline_pct;
    double system_pct = 0.0;
    std::optional<double> delta_pct;  // system - baseline
    std::string rank;                 // input data, not computed
    std::size_t n_items = 0;
};

struct EvalReport {
    EvalRow multilingual;        // micro-average over the pooled items
    std::vector<EvalRow> rows;   // per-language
    double macro_average_pct = 0.0;
    std::size_t n_scored = 0;
    std::size_t n_no_answer = 0;
    std::vector<std::string> warnings;
};

// Per-language accuracies from gold slices, baseline deltas attached.
// Baselines are percentages keyed by ISO code; the "multilingual" key
// (optional) supplies the pooled row's baseline. Ranks are optional
// leaderboard inputs keyed the same way.
EvalReport leaderboard(const PredictionSet& preds, const Dataset& gold,
                       const std::map<std::string, double>& baseline_pct,
                       const std::map<std::string, std::string>& ranks = {});

// Renderer-facing entry: rows with already-known accuracies (e.g. from a
// published leaderboard) whose deltas this report recomputes.
struct LeaderboardEntry {
    std::string language;
    std::optional<double> baseline_pct;
    double system_pct = 0.0;
    std::string rank;
    std::size_t n_items = 0;
};

EvalReport build_report(std::span<const LeaderboardEntry> entries);

std::string render_report(const EvalReport& report, TableFormat format);

struct ComplianceReport {
    std::optional<double> strict_rate;  // null when there are no predictions
    std::map<std::string, std::size_t> method_histogram;  // exact/fallback_scan/...
    std::size_t n_predictions = 0;
    std::vector<std::string> warnings;
};

ComplianceReport compliance_report(const PredictionSet& preds);
std::string render_compliance(const ComplianceReport& report, TableFormat format);

enum class AblationLayout { grid, list };

struct AblationRow {
    std::string label;      // model name or prompt style
    std::string condition;  // e.g. "unexpanded" / "expanded", or shots
    double accuracy_pct = 0.0;
};

// grid: labels x conditions pivot (every cell required); list: one line
// per row. Accuracies render with two decimals.
std::string render_ablation_table(std::span<const AblationRow> rows, AblationLayout layout,
                                  TableFormat format);

// Two-decimal percent formatting, half away from zero: 67.567567…
// renders as "67.57". Deltas carry an explicit sign.
std::string format_pct(double value);
std::string format_delta(double value);

// Baselines file: either a flat {"en": 24.80, ...} object or
// {"baselines": {...}, "ranks": {...}}.
struct BaselineData {
    std::map<std::string, double> baselines;
    std::map<std::string, std::string> ranks;
};
BaselineData load_baselines(const std::string& path);

}  // namespace examqa
