#include "examqa/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "examqa/detail/table.hpp"
#include "json.hpp"

namespace examqa {

std::string format_pct(double value) {
    const long long cents = std::llround(value * 100.0);  // half away from zero
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", cents < 0 ? "-" : "",
                  std::llabs(cents) / 100, std::llabs(cents) % 100);
    return buf;
}

std::string format_delta(double value) {
    const long long cents = std::llround(value * 100.0);
    return (cents >= 0 ? "+" : "") + format_pct(value);
}

namespace {

std::size_t count_correct(const PredictionSet& preds, const Dataset& gold) {
    std::map<std::string, OptionLabel> keys;
    for (const auto& item : gold.items) {
        if (!item.answer_key)
            throw EvalError(EvalErrorKind::missing_gold_key,
                            "gold item " + item.sample_id + " has no answer_key");
        keys.emplace(item.sample_id, *item.answer_key);
    }
    std::size_t correct = 0;
    for (const auto& p : preds.predictions) {
        auto it = keys.find(p.sample_id);
        if (it == keys.end())
            throw EvalError(EvalErrorKind::unknown_sample_id,
                            "prediction for unknown sample_id '" + p.sample_id + "'");
        if (p.answer && p.answer->value == it->second) ++correct;
    }
    return correct;
}

}  // namespace

double score(const PredictionSet& preds, const Dataset& gold) {
    const std::size_t correct = count_correct(preds, gold);
    if (gold.items.empty()) return 0.0;
    return static_cast<double>(correct) / static_cast<double>(gold.items.size());
}

namespace {

EvalRow make_row(std::string language, std::optional<double> baseline, double system_pct,
                 std::string rank, std::size_t n_items) {
    EvalRow row;
    row.language = std::move(language);
    row.baseline_pct = baseline;
    row.system_pct = system_pct;
    if (baseline) row.delta_pct = system_pct - *baseline;
    row.rank = std::move(rank);
    row.n_items = n_items;
    return row;
}

}  // namespace

EvalReport leaderboard(const PredictionSet& preds, const Dataset& gold,
                       const std::map<std::string, double>& baseline_pct,
                       const std::map<std::string, std::string>& ranks) {
    EvalReport report;

    std::map<std::string, Dataset> slices;
    for (const auto& item : gold.items) {
        auto& slice = slices[item.language];
        slice.split = gold.split;
        slice.items.push_back(item);
    }

    // predictions keyed by sample id; language slicing follows gold
    std::map<std::string, const Prediction*> by_id;
    for (const auto& p : preds.predictions) by_id[p.sample_id] = &p;

    std::size_t total_correct = 0;
    double macro_sum = 0.0;
    auto rank_of = [&](const std::string& lang) {
        auto it = ranks.find(lang);
        return it == ranks.end() ? std::string() : it->second;
    };

    for (const auto& [lang, slice] : slices) {
        PredictionSet slice_preds;
        for (const auto& item : slice.items) {
            auto it = by_id.find(item.sample_id);
            if (it != by_id.end()) slice_preds.predictions.push_back(*it->second);
        }
        const std::size_t correct = count_correct(slice_preds, slice);
        const double pct =
            100.0 * static_cast<double>(correct) / static_cast<double>(slice.items.size());
        auto baseline_it = baseline_pct.find(lang);
        if (baseline_it == baseline_pct.end())
            throw EvalError(EvalErrorKind::missing_baseline,
                            "no baseline accuracy for language '" + lang + "'");
        report.rows.push_back(
            make_row(lang, baseline_it->second, pct, rank_of(lang), slice.items.size()));
        total_correct += correct;
        macro_sum += pct;
    }

    for (const auto& [lang, value] : baseline_pct) {
        (void)value;
        if (lang != "multilingual" && !slices.count(lang))
            report.warnings.push_back("no items for language '" + lang + "'; row omitted");
    }

    const std::size_t n = gold.items.size();
    const double micro_pct =
        n == 0 ? 0.0 : 100.0 * static_cast<double>(total_correct) / static_cast<double>(n);
    std::optional<double> multilingual_baseline;
    if (auto it = baseline_pct.find("multilingual"); it != baseline_pct.end())
        multilingual_baseline = it->second;
    report.multilingual =
        make_row("multilingual", multilingual_baseline, micro_pct, rank_of("multilingual"), n);
    report.macro_average_pct =
        slices.empty() ? 0.0 : macro_sum / static_cast<double>(slices.size());

    report.n_scored = preds.predictions.size();
    for (const auto& p : preds.predictions)
        if (!p.answer) ++report.n_no_answer;
    return report;
}

EvalReport build_report(std::span<const LeaderboardEntry> entries) {
    EvalReport report;
    double macro_sum = 0.0;
    std::size_t n_rows = 0;
    bool saw_multilingual = false;
    for (const auto& e : entries) {
        auto row = make_row(e.language, e.baseline_pct, e.system_pct, e.rank, e.n_items);
        if (e.language == "multilingual") {
            report.multilingual = std::move(row);
            saw_multilingual = true;
        } else {
            report.rows.push_back(std::move(row));
            macro_sum += e.system_pct;
            ++n_rows;
        }
    }
    if (n_rows) report.macro_average_pct = macro_sum / static_cast<double>(n_rows);
    if (!saw_multilingual) report.multilingual.language = "multilingual";
    return report;
}

namespace {

std::vector<std::string> report_row_cells(const EvalRow& row, bool with_rank) {
    std::vector<std::string> cells = {
        language_display_name(row.language),
        row.baseline_pct ? format_pct(*row.baseline_pct) : "-",
        format_pct(row.system_pct),
        row.delta_pct ? format_delta(*row.delta_pct) : "-",
    };
    if (with_rank) cells.push_back(row.rank);
    return cells;
}

}  // namespace

std::string render_report(const EvalReport& report, TableFormat format) {
    bool with_rank = !report.multilingual.rank.empty();
    for (const auto& row : report.rows) with_rank |= !row.rank.empty();

    detail::Table table;
    table.headers = {"Language", "Baseline", "System", "Delta"};
    if (with_rank) table.headers.push_back("Rank");
    if (report.multilingual.n_items > 0 || report.multilingual.baseline_pct ||
        report.multilingual.system_pct != 0.0)
        table.rows.push_back(report_row_cells(report.multilingual, with_rank));
    for (const auto& row : report.rows)
        table.rows.push_back(report_row_cells(row, with_rank));

    std::string out;
    switch (format) {
        case TableFormat::markdown: out = detail::render_table_markdown(table); break;
        case TableFormat::csv: out = detail::render_table_csv(table); break;
        case TableFormat::text: out = detail::render_table_text(table); break;
    }
    if (format != TableFormat::csv) {
        std::ostringstream extra;
        extra << "macro average: " << format_pct(report.macro_average_pct) << '\n';
        extra << "scored: " << report.n_scored << ", no answer: " << report.n_no_answer
              << '\n';
        for (const auto& w : report.warnings) extra << "warning: " << w << '\n';
        out += extra.str();
    }
    return out;
}

ComplianceReport compliance_report(const PredictionSet& preds) {
    ComplianceReport report;
    report.n_predictions = preds.predictions.size();
    if (preds.predictions.empty()) {
        report.warnings.push_back("no predictions; strict rate undefined");
        return report;
    }
    std::size_t strict = 0;
    for (const auto& p : preds.predictions) {
        if (p.strict_compliant) ++strict;
        const std::string method =
            p.answer ? extraction_method_name(p.answer->extraction_method) : "none";
        ++report.method_histogram[method];
    }
    report.strict_rate =
        static_cast<double>(strict) / static_cast<double>(preds.predictions.size());
    return report;
}

std::string render_compliance(const ComplianceReport& report, TableFormat format) {
    detail::Table table;
    table.headers = {"Metric", "Value"};
    table.rows.push_back({"predictions", std::to_string(report.n_predictions)});
    table.rows.push_back(
        {"strict_rate",
         report.strict_rate ? format_pct(*report.strict_rate * 100.0) : "null"});
    for (const auto& [method, count] : report.method_histogram)
        table.rows.push_back({"method." + method, std::to_string(count)});

    std::string out;
    switch (format) {
        case TableFormat::markdown: out = detail::render_table_markdown(table); break;
        case TableFormat::csv: out = detail::render_table_csv(table); break;
        case TableFormat::text: out = detail::render_table_text(table); break;
    }
    if (format != TableFormat::csv)
        for (const auto& w : report.warnings) out += "warning: " + w + '\n';
    return out;
}

std::string render_ablation_table(std::span<const AblationRow> rows, AblationLayout layout,
                                  TableFormat format) {
    for (const auto& row : rows)
        if (row.accuracy_pct < 0.0 || row.accuracy_pct > 100.0)
            throw EvalError(EvalErrorKind::inconsistent_grid,
                            "accuracy outside [0,100] for '" + row.label + "'");

    detail::Table table;
    if (layout == AblationLayout::list) {
        table.headers = {"Label", "Condition", "Accuracy"};
        for (const auto& row : rows)
            table.rows.push_back({row.label, row.condition, format_pct(row.accuracy_pct)});
    } else {
        // first-appearance order for both axes
        std::vector<std::string> labels;
        std::vector<std::string> conditions;
        std::map<std::pair<std::string, std::string>, double> cells;
        for (const auto& row : rows) {
            if (std::find(labels.begin(), labels.end(), row.label) == labels.end())
                labels.push_back(row.label);
            if (std::find(conditions.begin(), conditions.end(), row.condition) ==
                conditions.end())
                conditions.push_back(row.condition);
            auto key = std::make_pair(row.label, row.condition);
            if (cells.count(key))
                throw EvalError(EvalErrorKind::inconsistent_grid,
                                "duplicate cell " + row.label + " / " + row.condition);
            cells[key] = row.accuracy_pct;
        }
        table.headers = {"Label"};
        for (const auto& c : conditions) table.headers.push_back(c);
        for (const auto& label : labels) {
            std::vector<std::string> out_row = {label};
            for (const auto& condition : conditions) {
                auto it = cells.find({label, condition});
                if (it == cells.end())
                    throw EvalError(EvalErrorKind::inconsistent_grid,
                                    "missing cell " + label + " / " + condition);
                out_row.push_back(format_pct(it->second));
            }
            table.rows.push_back(std::move(out_row));
        }
    }

    switch (format) {
        case TableFormat::markdown: return detail::render_table_markdown(table);
        case TableFormat::csv: return detail::render_table_csv(table);
        case TableFormat::text: break;
    }
    return detail::render_table_text(table);
}

BaselineData load_baselines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw EvalError(EvalErrorKind::schema, "cannot read baselines: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw EvalError(EvalErrorKind::schema, path + ": " + e.what());
    }
    BaselineData data;
    const nlohmann::json& baselines = j.contains("baselines") ? j.at("baselines") : j;
    for (auto it = baselines.begin(); it != baselines.end(); ++it) {
        if (!it.value().is_number())
            throw EvalError(EvalErrorKind::schema,
                            path + ": baseline for '" + it.key() + "' is not a number");
        data.baselines[it.key()] = it.value().get<double>();
    }
    if (j.contains("ranks"))
        for (auto it = j.at("ranks").begin(); it != j.at("ranks").end(); ++it)
            data.ranks[it.key()] = it.value().get<std::string>();
    return data;
}

}  // namespace examqa
