#include "examqa/config.hpp"

#include <filesystem>
#include <fstream>

#include "examqa/prompt_engine.hpp"
#include "json.hpp"

namespace examqa {

std::string RunConfig::effective_cache_path() const {
    if (!cache_path.empty()) return cache_path;
    return (std::filesystem::path(output_dir) / "cache.jsonl").string();
}

PipelineConfig RunConfig::pipeline_config() const {
    PipelineConfig cfg;
    cfg.parallelism = parallelism;
    cfg.image_root = image_root;
    cfg.skip_describe_for_text = skip_describe_for_text;
    cfg.aggregator_fallback_to_draft = aggregator_fallback_to_draft;
    cfg.resample_on_no_answer = resample_on_no_answer;
    cfg.reasoner_image_passthrough = reasoner_image_passthrough;
    cfg.marker_options.allow_digits = digit_markers;
    cfg.describer_version = template_version(Role::describer);
    cfg.aggregator_version = template_version(Role::aggregator);
    cfg.reasoner_version = template_version(Role::reasoner);
    return cfg;
}

std::string RunConfig::template_version(Role role) const {
    auto it = template_versions.find(role);
    if (it != template_versions.end()) return it->second;
    return default_template_version(role);
}

namespace {

Role parse_role_key(const std::string& key) {
    auto role = role_from_string(key);
    if (!role) throw ConfigError("unknown role '" + key + "' in config");
    return *role;
}

void merge_json(RunConfig& config, const nlohmann::json& j) {
    auto get_string = [&](const char* key, std::string& into) {
        if (j.contains(key)) into = j.at(key).get<std::string>();
    };
    get_string("manifest", config.manifest);
    get_string("image_root", config.image_root);
    get_string("output_dir", config.output_dir);
    get_string("templates_dir", config.templates_dir);

    if (j.contains("split")) {
        const auto s = j.at("split").get<std::string>();
        auto split = split_from_string(s);
        if (!split) throw ConfigError("unknown split '" + s + "'");
        config.split = *split;
    }
    if (j.contains("strict_load")) config.strict_load = j.at("strict_load").get<bool>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("parallelism")) config.parallelism = j.at("parallelism").get<int>();

    if (j.contains("cache")) {
        const auto& c = j.at("cache");
        if (c.contains("enabled")) config.cache_enabled = c.at("enabled").get<bool>();
        if (c.contains("path")) config.cache_path = c.at("path").get<std::string>();
    }

    if (j.contains("routing")) {
        for (auto it = j.at("routing").begin(); it != j.at("routing").end(); ++it) {
            const Role role = parse_role_key(it.key());
            RoleBinding binding = config.routing.bindings.count(role)
                                      ? config.routing.bindings.at(role)
                                      : RoleBinding{};
            const auto& b = it.value();
            if (b.contains("model")) binding.model_id = b.at("model").get<std::string>();
            if (b.contains("temperature"))
                binding.temperature = b.at("temperature").get<double>();
            if (b.contains("backend")) binding.backend = b.at("backend").get<std::string>();
            if (b.contains("max_output")) binding.max_output = b.at("max_output").get<int>();
            config.routing.bindings[role] = binding;
        }
    }

    if (j.contains("retry")) {
        const auto& r = j.at("retry");
        if (r.contains("base_ms"))
            config.retry.base = std::chrono::milliseconds(r.at("base_ms").get<long long>());
        if (r.contains("factor")) config.retry.factor = r.at("factor").get<double>();
        if (r.contains("max_attempts"))
            config.retry.max_attempts = r.at("max_attempts").get<int>();
        if (r.contains("jitter_fraction"))
            config.retry.jitter_fraction = r.at("jitter_fraction").get<double>();
    }
    if (j.contains("rate_limit")) {
        const auto& r = j.at("rate_limit");
        if (r.contains("capacity")) config.rate_limit.capacity = r.at("capacity").get<double>();
        if (r.contains("refill_per_sec"))
            config.rate_limit.refill_per_sec = r.at("refill_per_sec").get<double>();
    }

    if (j.contains("http_backends")) {
        config.http_backends.clear();
        for (const auto& b : j.at("http_backends")) {
            HttpBackendConfig http;
            if (b.contains("name")) http.name = b.at("name").get<std::string>();
            http.base_url = b.at("base_url").get<std::string>();
            if (b.contains("path")) http.path = b.at("path").get<std::string>();
            if (b.contains("api_key_env"))
                http.api_key_env = b.at("api_key_env").get<std::string>();
            if (b.contains("timeout_sec")) http.timeout_sec = b.at("timeout_sec").get<int>();
            if (b.contains("headers"))
                for (auto it = b.at("headers").begin(); it != b.at("headers").end(); ++it)
                    http.extra_headers[it.key()] = it.value().get<std::string>();
            config.http_backends.push_back(std::move(http));
        }
    }

    if (j.contains("mock")) {
        const auto& m = j.at("mock");
        if (m.contains("misbehavior")) {
            const auto name = m.at("misbehavior").get<std::string>();
            auto mode = mock_misbehavior_from_string(name);
            if (!mode) throw ConfigError("unknown mock misbehavior '" + name + "'");
            config.mock.misbehavior = *mode;
        }
        if (m.contains("translator_fail_rate"))
            config.mock.translator_fail_rate = m.at("translator_fail_rate").get<double>();
        if (m.contains("latency_ms")) config.mock.latency_ms = m.at("latency_ms").get<int>();
    }

    if (j.contains("templates")) {
        const auto& t = j.at("templates");
        if (t.contains("dir")) config.templates_dir = t.at("dir").get<std::string>();
        for (const char* key :
             {"describer_version", "aggregator_version", "reasoner_version",
              "translator_version"}) {
            if (!t.contains(key)) continue;
            const std::string role_name = std::string(key).substr(0, std::string(key).find('_'));
            config.template_versions[parse_role_key(role_name)] =
                t.at(key).get<std::string>();
        }
    }

    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        if (p.contains("skip_describe_for_text"))
            config.skip_describe_for_text = p.at("skip_describe_for_text").get<bool>();
        if (p.contains("aggregator_fallback_to_draft"))
            config.aggregator_fallback_to_draft =
                p.at("aggregator_fallback_to_draft").get<bool>();
        if (p.contains("resample_on_no_answer"))
            config.resample_on_no_answer = p.at("resample_on_no_answer").get<bool>();
        if (p.contains("reasoner_image_passthrough"))
            config.reasoner_image_passthrough =
                p.at("reasoner_image_passthrough").get<bool>();
        if (p.contains("digit_markers")) config.digit_markers = p.at("digit_markers").get<bool>();
    }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    RunConfig config;
    try {
        merge_json(config, j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config;
}

std::string run_config_to_json(const RunConfig& config) {
    nlohmann::json routing = nlohmann::json::object();
    for (const auto& [role, binding] : config.routing.bindings)
        routing[to_string(role)] = {{"model", binding.model_id},
                                    {"temperature", binding.temperature},
                                    {"backend", binding.backend},
                                    {"max_output", binding.max_output}};
    nlohmann::json http = nlohmann::json::array();
    for (const auto& b : config.http_backends)
        http.push_back({{"name", b.name},
                        {"base_url", b.base_url},
                        {"path", b.path},
                        {"api_key_env", b.api_key_env},
                        {"timeout_sec", b.timeout_sec}});

    nlohmann::json j = {
        {"manifest", config.manifest},
        {"image_root", config.image_root},
        {"split", to_string(config.split)},
        {"output_dir", config.output_dir},
        {"parallelism", config.parallelism},
        {"cache", {{"enabled", config.cache_enabled}, {"path", config.effective_cache_path()}}},
        {"routing", routing},
        {"retry",
         {{"base_ms", config.retry.base.count()},
          {"factor", config.retry.factor},
          {"max_attempts", config.retry.max_attempts},
          {"jitter_fraction", config.retry.jitter_fraction}}},
        {"rate_limit",
         {{"capacity", config.rate_limit.capacity},
          {"refill_per_sec", config.rate_limit.refill_per_sec}}},
        {"http_backends", http},
        {"mock",
         {{"misbehavior", to_string(config.mock.misbehavior)},
          {"translator_fail_rate", config.mock.translator_fail_rate},
          {"latency_ms", config.mock.latency_ms}}},
        {"templates",
         {{"dir", config.templates_dir},
          {"describer_version", config.template_version(Role::describer)},
          {"aggregator_version", config.template_version(Role::aggregator)},
          {"reasoner_version", config.template_version(Role::reasoner)},
          {"translator_version", config.template_version(Role::translator)}}},
        {"pipeline",
         {{"skip_describe_for_text", config.skip_describe_for_text},
          {"aggregator_fallback_to_draft", config.aggregator_fallback_to_draft},
          {"resample_on_no_answer", config.resample_on_no_answer},
          {"reasoner_image_passthrough", config.reasoner_image_passthrough},
          {"digit_markers", config.digit_markers}}},
    };
    if (config.seed) j["seed"] = *config.seed;
    if (config.strict_load) j["strict_load"] = *config.strict_load;
    return j.dump();
}

}  // namespace examqa
