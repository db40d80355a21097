#include "examqa/predictions.hpp"

#include <fstream>
#include <stdexcept>

#include "examqa/detail/csv.hpp"
#include "examqa/detail/utf8.hpp"
#include "json.hpp"

namespace examqa {

std::vector<std::string> Prediction::trace_refs() const {
    std::vector<std::string> refs;
    refs.reserve(traces.size());
    for (const auto& t : traces) refs.push_back(t.request_digest);
    return refs;
}

std::map<std::string, double> Prediction::stage_latencies() const {
    std::map<std::string, double> out;
    for (const auto& t : traces) out[t.stage] = t.latency_ms;
    return out;
}

const Prediction* PredictionSet::find(const std::string& sample_id) const {
    for (const auto& p : predictions)
        if (p.sample_id == sample_id) return &p;
    return nullptr;
}

void write_predictions_csv(const PredictionSet& preds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) throw std::runtime_error("cannot write predictions: " + path);
    detail::write_csv_row(out, {"sample_id", "answer"});
    for (const auto& p : preds.predictions)
        detail::write_csv_row(out, {p.sample_id, p.answer ? to_string(p.answer->value) : ""});
}

PredictionSet read_predictions_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw std::runtime_error("cannot read predictions: " + path);
    detail::CsvReader reader(in);
    auto header = reader.next();
    if (!header || header->size() < 2 || (*header)[0] != "sample_id" ||
        (*header)[1] != "answer")
        throw std::runtime_error(path + ": expected header sample_id,answer");

    PredictionSet set;
    while (auto cells = reader.next()) {
        if (cells->empty() || (cells->size() == 1 && (*cells)[0].empty())) continue;
        Prediction p;
        p.sample_id = (*cells)[0];
        const std::string answer = cells->size() > 1 ? (*cells)[1] : "";
        if (!answer.empty()) {
            auto label = parse_label(answer);
            if (!label)
                throw std::runtime_error(path + ": bad answer '" + answer + "' for " +
                                         p.sample_id);
            p.answer = AnswerLetter{*label, ExtractionMethod::exact};
        }
        set.predictions.push_back(std::move(p));
    }
    return set;
}

namespace {

nlohmann::json prediction_to_json(const Prediction& p) {
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& t : p.traces)
        traces.push_back({{"stage", t.stage},
                          {"digest", t.request_digest},
                          {"latency_ms", t.latency_ms},
                          {"from_cache", t.from_cache}});
    nlohmann::json j = {
        {"sample_id", p.sample_id},
        {"language", p.language},
        {"answer", p.answer ? nlohmann::json(to_string(p.answer->value))
                            : nlohmann::json(nullptr)},
        {"method",
         p.answer ? nlohmann::json(extraction_method_name(p.answer->extraction_method))
                  : nlohmann::json(nullptr)},
        {"strict_compliant", p.strict_compliant},
        {"caption", p.caption_text},
        {"caption_digest", p.caption_digest},
        {"warnings", p.warnings},
        {"traces", traces},
    };
    return j;
}

Prediction prediction_from_json(const nlohmann::json& j) {
    Prediction p;
    p.sample_id = j.at("sample_id").get<std::string>();
    p.language = j.value("language", std::string());
    if (!j.at("answer").is_null()) {
        auto label = parse_label(j.at("answer").get<std::string>());
        auto method = extraction_method_from_name(j.value("method", "exact"));
        if (label)
            p.answer = AnswerLetter{*label, method.value_or(ExtractionMethod::exact)};
    }
    p.strict_compliant = j.value("strict_compliant", false);
    p.caption_text = j.value("caption", std::string());
    p.caption_digest = j.value("caption_digest", std::string());
    if (j.contains("warnings"))
        p.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("traces")) {
        for (const auto& t : j.at("traces")) {
            StageTrace trace;
            trace.stage = t.value("stage", std::string());
            trace.request_digest = t.value("digest", std::string());
            trace.latency_ms = t.value("latency_ms", 0.0);
            trace.from_cache = t.value("from_cache", false);
            p.traces.push_back(std::move(trace));
        }
    }
    return p;
}

}  // namespace

void write_audit_log(const PredictionSet& preds, const std::string& run_config_json,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) throw std::runtime_error("cannot write audit log: " + path);
    nlohmann::json header = {{"run_config", nlohmann::json::parse(
                                                run_config_json.empty() ? "{}"
                                                                        : run_config_json)}};
    out << header.dump() << '\n';
    for (const auto& p : preds.predictions) out << prediction_to_json(p).dump() << '\n';
    for (const auto& f : preds.failures) {
        nlohmann::json j = {{"failure", true},
                            {"sample_id", f.sample_id},
                            {"stage", f.stage},
                            {"error", f.error}};
        out << j.dump() << '\n';
    }
}

PredictionSet read_audit_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw std::runtime_error("cannot read audit log: " + path);
    PredictionSet set;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (detail::trim_ascii(line).empty()) continue;
        auto j = nlohmann::json::parse(line);
        if (first && j.contains("run_config")) {
            first = false;
            continue;
        }
        first = false;
        if (j.value("failure", false)) {
            set.failures.push_back({j.at("sample_id").get<std::string>(),
                                    j.value("stage", std::string()),
                                    j.value("error", std::string())});
        } else {
            set.predictions.push_back(prediction_from_json(j));
        }
    }
    return set;
}

}  // namespace examqa
