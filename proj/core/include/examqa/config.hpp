#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "examqa/dataset.hpp"
#include "examqa/model_client.hpp"
#include "examqa/pipeline.hpp"

namespace examqa {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

// One struct drives a whole run; a JSON config file populates it and CLI
// flags override individual fields. The full value is serialized into
// every run's audit log.
struct RunConfig {
    std::string manifest;
    std::string image_root;
    Split split = Split::test;
    std::optional<bool> strict_load;

    std::string output_dir = "out";
    std::optional<std::uint64_t> seed;  // mandatory for mock runs
    int parallelism = 1;

    bool cache_enabled = true;
    std::string cache_path;  // defaults to <output_dir>/cache.jsonl

    RoleRouting routing = RoleRouting::defaults();
    RetryPolicy retry;
    RateLimitConfig rate_limit;
    std::vector<HttpBackendConfig> http_backends;
    MockOptions mock;

    std::string templates_dir;
    std::map<Role, std::string> template_versions;  // unset roles use defaults

    bool skip_describe_for_text = false;
    bool aggregator_fallback_to_draft = true;
    bool resample_on_no_answer = false;
    bool reasoner_image_passthrough = false;
    bool digit_markers = false;

    std::string effective_cache_path() const;
    PipelineConfig pipeline_config() const;
    std::string template_version(Role role) const;
};

RunConfig load_run_config(const std::string& path);  // throws ConfigError
std::string run_config_to_json(const RunConfig& config);

}  // namespace examqa
