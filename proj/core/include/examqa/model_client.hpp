#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "examqa/role.hpp"

namespace examqa {

struct ModelRequest {
    Role role = Role::describer;
    std::string model_id;
    std::string prompt_text;
    std::optional<std::string> image_bytes;  // raw binary
    double temperature = 0.0;                // [0, 2]
    int max_output = 1024;
};

struct ModelResponse {
    std::string text;
    std::string model_id;
    double latency_ms = 0.0;
    bool from_cache = false;
    int attempt_count = 1;
};

struct RoleBinding {
    std::string model_id;
    double temperature = 0.0;
    std::string backend = "mock";
    int max_output = 1024;
};

// role -> {model, temperature, backend}. Defaults carry the ensemble
// inference temperatures: describer 1.5, aggregator 1.5, reasoner 0.2.
struct RoleRouting {
    std::map<Role, RoleBinding> bindings;

    static RoleRouting defaults();
    const RoleBinding& at(Role role) const;  // throws ClientError(config)
    bool bound(Role role) const { return bindings.count(role) > 0; }
    // The three pipeline roles must always be routable.
    void validate() const;
};

// Injectable time source so backoff and rate limiting are testable with
// a virtual clock.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::milliseconds now() = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
public:
    std::chrono::milliseconds now() override;
    void sleep_for(std::chrono::milliseconds d) override;
};

class VirtualClock final : public Clock {
public:
    std::chrono::milliseconds now() override;
    void sleep_for(std::chrono::milliseconds d) override;  // advances instantly
    void advance(std::chrono::milliseconds d);
    std::vector<std::chrono::milliseconds> sleeps() const;

private:
    mutable std::mutex mu_;
    std::chrono::milliseconds now_{0};
    std::vector<std::chrono::milliseconds> sleeps_;
};

enum class BackendStatus { ok, transient, auth, fatal };

struct BackendReply {
    BackendStatus status = BackendStatus::ok;
    std::string text;
    int http_status = 0;
    std::string error;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual BackendReply generate(const ModelRequest& request) = 0;
};

// ---- deterministic mock backend ----

enum class MockMisbehavior { none, overflow, cyrillic, empty, mixed };

const char* to_string(MockMisbehavior m);
std::optional<MockMisbehavior> mock_misbehavior_from_string(std::string_view s);

struct MockOptions {
    MockMisbehavior misbehavior = MockMisbehavior::none;
    double translator_fail_rate = 0.0;  // per-request deterministic failures
    int latency_ms = 0;                 // simulated per-call wall time
};

// Same seed and request stream in => byte-identical outputs out, across
// runs, platforms and thread schedules. Describer/aggregator echo canned
// captions derived from the request digest; the reasoner picks a letter
// by seeded hash of the prompt.
std::shared_ptr<Backend> make_mock_backend(std::uint64_t seed, MockOptions opts = {});

// ---- HTTP backend (chat-completions style JSON API) ----

struct HttpBackendConfig {
    std::string name = "http";
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string api_key_env;  // credentials come from the environment only
    int timeout_sec = 120;
    std::map<std::string, std::string> extra_headers;
};

std::shared_ptr<Backend> make_http_backend(const HttpBackendConfig& config);

// ---- cache ----

// Content-addressed digest over everything that shapes a generation:
// model, temperature, output budget, image bytes, prompt. Stable across
// runs and platforms.
std::string cache_key(const ModelRequest& request);

// Append-only JSONL store keyed by digest. Lines are written atomically
// under a lock and flushed, so a killed run leaves a loadable prefix;
// malformed tail lines are skipped on reload. No eviction.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path file);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& text, const std::string& model_id,
             Role role);
    bool contains(const std::string& key) const;
    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> entries_;
    std::ofstream out_;
};

// ---- client ----

struct RetryPolicy {
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    int max_attempts = 5;
    double jitter_fraction = 0.5;  // delay *= 1 + U[0, jitter_fraction)
    std::uint64_t jitter_seed = 0;
};

struct RateLimitConfig {
    double capacity = 0.0;        // tokens; 0 disables limiting
    double refill_per_sec = 0.0;  // tokens per second
};

struct ClientConfig {
    RetryPolicy retry;
    RateLimitConfig rate_limit;  // applied per backend
    bool cache_enabled = false;
    std::filesystem::path cache_path;
};

enum class ClientErrorKind { rate_limited, auth, backend, config };

class ClientError : public std::runtime_error {
public:
    ClientError(ClientErrorKind kind, Role role, std::string model_id,
                const std::string& message)
        : std::runtime_error(message), kind_(kind), role_(role),
          model_id_(std::move(model_id)) {}
    ClientErrorKind kind() const { return kind_; }
    Role role() const { return role_; }
    const std::string& model_id() const { return model_id_; }

private:
    ClientErrorKind kind_;
    Role role_;
    std::string model_id_;
};

// Token bucket; acquire blocks through the injected clock until a token
// is available. Linearizable under concurrent use.
class TokenBucket {
public:
    TokenBucket(RateLimitConfig config, std::shared_ptr<Clock> clock);
    void acquire();

private:
    RateLimitConfig config_;
    std::shared_ptr<Clock> clock_;
    std::mutex mu_;
    double tokens_;
    std::chrono::milliseconds last_;
};

// Uniform generation front end: role routing, temperature control,
// exponential-backoff retries, per-backend rate limiting, and the
// response cache. Safe for concurrent use by many workers.
class ModelClient {
public:
    ModelClient(RoleRouting routing, ClientConfig config,
                std::shared_ptr<Clock> clock = nullptr);

    void register_backend(const std::string& name, std::shared_ptr<Backend> backend);

    ModelRequest make_request(Role role, std::string prompt_text,
                              std::optional<std::string> image_bytes = std::nullopt) const;

    ModelResponse complete(const ModelRequest& request);
    // bypass_cache_read forces a fresh backend call (resample); the
    // result still lands in the cache.
    ModelResponse complete(const ModelRequest& request, bool bypass_cache_read);

    ModelResponse complete_role(Role role, std::string prompt_text,
                                std::optional<std::string> image_bytes = std::nullopt);

    const RoleRouting& routing() const { return routing_; }
    ResponseCache* cache() { return cache_ ? cache_.get() : nullptr; }
    Clock& clock() { return *clock_; }

private:
    std::chrono::milliseconds backoff_delay(int attempt);

    RoleRouting routing_;
    ClientConfig config_;
    std::shared_ptr<Clock> clock_;
    std::map<std::string, std::shared_ptr<Backend>> backends_;
    std::map<std::string, std::unique_ptr<TokenBucket>> buckets_;
    std::unique_ptr<ResponseCache> cache_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_;
};

}  // namespace examqa
