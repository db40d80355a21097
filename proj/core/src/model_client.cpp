#include "examqa/model_client.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include "examqa/detail/hash.hpp"
#include "examqa/detail/utf8.hpp"

namespace examqa {

// ---- routing ----

RoleRouting RoleRouting::defaults() {
    RoleRouting r;
    r.bindings[Role::describer] = {"gemini-2.5-flash", 1.5, "mock", 1024};
    r.bindings[Role::aggregator] = {"gemini-1.5-pro", 1.5, "mock", 1024};
    r.bindings[Role::reasoner] = {"gemini-2.5-pro", 0.2, "mock", 8};
    r.bindings[Role::translator] = {"gemini-1.5-pro", 0.2, "mock", 2048};
    return r;
}

const RoleBinding& RoleRouting::at(Role role) const {
    auto it = bindings.find(role);
    if (it == bindings.end())
        throw ClientError(ClientErrorKind::config, role, "",
                          std::string("no routing bound for role ") + to_string(role));
    return it->second;
}

void RoleRouting::validate() const {
    for (Role role : {Role::describer, Role::aggregator, Role::reasoner}) {
        const auto& binding = at(role);
        if (binding.model_id.empty())
            throw ClientError(ClientErrorKind::config, role, "",
                              std::string("empty model_id for role ") + to_string(role));
        if (binding.temperature < 0.0 || binding.temperature > 2.0)
            throw ClientError(ClientErrorKind::config, role, binding.model_id,
                              "temperature outside [0,2] for role " +
                                  std::string(to_string(role)));
    }
}

// ---- clocks ----

std::chrono::milliseconds SystemClock::now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

std::chrono::milliseconds VirtualClock::now() {
    std::lock_guard lock(mu_);
    return now_;
}

void VirtualClock::sleep_for(std::chrono::milliseconds d) {
    std::lock_guard lock(mu_);
    now_ += d;
    sleeps_.push_back(d);
}

void VirtualClock::advance(std::chrono::milliseconds d) {
    std::lock_guard lock(mu_);
    now_ += d;
}

std::vector<std::chrono::milliseconds> VirtualClock::sleeps() const {
    std::lock_guard lock(mu_);
    return sleeps_;
}

// ---- mock backend ----

const char* to_string(MockMisbehavior m) {
    switch (m) {
        case MockMisbehavior::none: return "none";
        case MockMisbehavior::overflow: return "overflow";
        case MockMisbehavior::cyrillic: return "cyrillic";
        case MockMisbehavior::empty: return "empty";
        case MockMisbehavior::mixed: return "mixed";
    }
    return "none";
}

std::optional<MockMisbehavior> mock_misbehavior_from_string(std::string_view s) {
    if (s == "none") return MockMisbehavior::none;
    if (s == "overflow") return MockMisbehavior::overflow;
    if (s == "cyrillic") return MockMisbehavior::cyrillic;
    if (s == "empty") return MockMisbehavior::empty;
    if (s == "mixed") return MockMisbehavior::mixed;
    return std::nullopt;
}

namespace {

std::uint64_t fnv1a64(std::uint64_t seed, std::string_view role, std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (i * 8)));
    for (char c : role) mix(static_cast<unsigned char>(c));
    mix(0x1F);
    for (char c : text) mix(static_cast<unsigned char>(c));
    return h;
}

// First ``` fenced block in a prompt, or the whole prompt if none.
std::string extract_fenced_block(const std::string& prompt) {
    const auto open = prompt.find("```\n");
    if (open == std::string::npos) return prompt;
    const auto start = open + 4;
    const auto close = prompt.find("\n```", start);
    if (close == std::string::npos) return prompt.substr(start);
    return prompt.substr(start, close - start);
}

class MockBackend final : public Backend {
public:
    MockBackend(std::uint64_t seed, MockOptions opts) : seed_(seed), opts_(opts) {}

    std::string name() const override { return "mock"; }

    BackendReply generate(const ModelRequest& request) override {
        if (opts_.latency_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(opts_.latency_ms));
        const std::uint64_t h = fnv1a64(seed_, to_string(request.role), request.prompt_text);
        switch (request.role) {
            case Role::describer: return {BackendStatus::ok, describe(h, request), 200, ""};
            case Role::aggregator:
                return {BackendStatus::ok, extract_fenced_block(request.prompt_text), 200, ""};
            case Role::reasoner: return {BackendStatus::ok, reason(h), 200, ""};
            case Role::translator: return translate(h, request);
        }
        return {BackendStatus::fatal, "", 0, "unknown role"};
    }

private:
    std::string describe(std::uint64_t h, const ModelRequest& request) const {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%08" PRIx64,
                      static_cast<std::uint64_t>(h & 0xFFFFFFFFu));
        const std::string tag = buf;
        const bool text_item = request.prompt_text.find("type: text") != std::string::npos;
        std::ostringstream out;
        out << "Question: Sample question " << tag << " from the scanned item?\n";
        out << "Options:\n";
        static const char* words[] = {"alpha", "beta", "gamma", "delta"};
        std::uint64_t x = h;
        for (int i = 0; i < 4; ++i) {
            x = x * 6364136223846793005ULL + 1442695040888963407ULL;
            out << static_cast<char>('A' + i) << ". option " << words[i] << ' '
                << (x % 900 + 100) << '\n';
        }
        if (text_item) out << "Figure: none";
        else out << "Figure: Synthetic figure " << tag << " with four labeled parts.";
        return out.str();
    }

    std::string reason(std::uint64_t h) const {
        const int idx = static_cast<int>(h % 5);
        const char letter = static_cast<char>('A' + idx);
        MockMisbehavior mode = opts_.misbehavior;
        if (mode == MockMisbehavior::mixed) {
            const std::uint64_t pick = (h >> 8) % 10;
            if (pick < 6) mode = MockMisbehavior::none;
            else if (pick < 8) mode = MockMisbehavior::overflow;
            else if (pick < 9) mode = MockMisbehavior::cyrillic;
            else mode = MockMisbehavior::empty;
        }
        switch (mode) {
            case MockMisbehavior::overflow:
                return std::string("The answer is ") + letter + ".";
            case MockMisbehavior::cyrillic: {
                static const char* cyr[] = {"А", "Б", "В", "Г", "Д"};
                return cyr[idx];
            }
            case MockMisbehavior::empty: return "";
            default: return std::string(1, letter);
        }
    }

    BackendReply translate(std::uint64_t h, const ModelRequest& request) const {
        if (opts_.translator_fail_rate > 0.0) {
            const auto threshold =
                static_cast<std::uint64_t>(opts_.translator_fail_rate * 1000000.0);
            if ((h >> 16) % 1000000 < threshold)
                return {BackendStatus::fatal, "", 422, "synthetic translator failure"};
        }
        const std::string block = extract_fenced_block(request.prompt_text);
        std::ostringstream out;
        std::istringstream in(block);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (!first) out << '\n';
            first = false;
            out << translate_line(line);
        }
        return {BackendStatus::ok, out.str(), 200, ""};
    }

    static std::string translate_line(const std::string& line) {
        auto tag = [](const std::string& prefix, const std::string& rest) {
            return prefix + "[t] " + rest;
        };
        if (line.rfind("Question: ", 0) == 0) return tag("Question: ", line.substr(10));
        if (line.rfind("Figure: ", 0) == 0) return tag("Figure: ", line.substr(8));
        if (line == "Options:" || detail::trim_ascii(line).empty()) return line;
        if (line.size() >= 3 && line[0] >= 'A' && line[0] <= 'E' && line[1] == '.' &&
            line[2] == ' ')
            return tag(line.substr(0, 3), line.substr(3));
        return tag("", line);
    }

    std::uint64_t seed_;
    MockOptions opts_;
};

}  // namespace

std::shared_ptr<Backend> make_mock_backend(std::uint64_t seed, MockOptions opts) {
    return std::make_shared<MockBackend>(seed, opts);
}

// ---- HTTP backend ----

namespace {

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

    std::string name() const override { return config_.name; }

    BackendReply generate(const ModelRequest& request) override {
        std::string api_key;
        if (!config_.api_key_env.empty()) {
            const char* v = std::getenv(config_.api_key_env.c_str());
            if (!v || !*v)
                return {BackendStatus::auth, "", 0,
                        "environment variable " + config_.api_key_env + " is not set"};
            api_key = v;
        }

        nlohmann::json content;
        if (request.image_bytes) {
            content = nlohmann::json::array();
            content.push_back({{"type", "text"}, {"text", request.prompt_text}});
            content.push_back(
                {{"type", "image_url"},
                 {"image_url",
                  {{"url", "data:image/png;base64," +
                               detail::base64_encode(*request.image_bytes)}}}});
        } else {
            content = request.prompt_text;
        }
        const nlohmann::json body = {
            {"model", request.model_id},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})},
        };

        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_sec, 0);
        client.set_read_timeout(config_.timeout_sec, 0);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        for (const auto& [k, v] : config_.extra_headers) headers.emplace(k, v);

        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!res)
            return {BackendStatus::transient, "", 0,
                    "connection error: " + httplib::to_string(res.error())};
        if (res->status == 401 || res->status == 403)
            return {BackendStatus::auth, "", res->status, res->body};
        if (res->status == 429 || res->status >= 500)
            return {BackendStatus::transient, "", res->status, res->body};
        if (res->status != 200)
            return {BackendStatus::fatal, "", res->status, res->body};

        try {
            auto j = nlohmann::json::parse(res->body);
            return {BackendStatus::ok,
                    j.at("choices").at(0).at("message").at("content").get<std::string>(),
                    res->status, ""};
        } catch (const nlohmann::json::exception& e) {
            return {BackendStatus::fatal, "", res->status,
                    std::string("malformed response body: ") + e.what()};
        }
    }

private:
    HttpBackendConfig config_;
};

}  // namespace

std::shared_ptr<Backend> make_http_backend(const HttpBackendConfig& config) {
    return std::make_shared<HttpBackend>(config);
}

// ---- cache ----

std::string cache_key(const ModelRequest& request) {
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.6f", request.temperature);
    std::string material = "examqa-cache-v1";
    material.push_back('\x1F');
    material += request.model_id;
    material.push_back('\x1F');
    material += temp;
    material.push_back('\x1F');
    material += std::to_string(request.max_output);
    material.push_back('\x1F');
    material += request.image_bytes ? detail::sha256_hex(*request.image_bytes) : "-";
    material.push_back('\x1F');
    material += request.prompt_text;
    return detail::sha256_hex(material);
}

ResponseCache::ResponseCache(std::filesystem::path file) : path_(std::move(file)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    bool ends_mid_line = false;
    {
        std::ifstream in(path_, std::ios::binary);
        std::string line;
        char last = '\n';
        int ci;
        std::string buf;
        while ((ci = in.get()) != EOF) {
            last = static_cast<char>(ci);
            if (last == '\n') {
                if (!buf.empty()) {
                    try {
                        auto j = nlohmann::json::parse(buf);
                        entries_[j.at("key").get<std::string>()] =
                            j.at("text").get<std::string>();
                    } catch (const nlohmann::json::exception&) {
                        // malformed line from an interrupted run; skip it
                    }
                }
                buf.clear();
            } else {
                buf.push_back(last);
            }
        }
        // no final newline: salvage the tail if it parses, and in any
        // case make the next append start on a fresh line
        ends_mid_line = last != '\n';
        if (ends_mid_line && !buf.empty()) {
            try {
                auto j = nlohmann::json::parse(buf);
                entries_[j.at("key").get<std::string>()] = j.at("text").get<std::string>();
            } catch (const nlohmann::json::exception&) {
            }
        }
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (ends_mid_line) {
        out_ << '\n';
        out_.flush();
    }
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::put(const std::string& key, const std::string& text,
                        const std::string& model_id, Role role) {
    nlohmann::json j = {
        {"key", key}, {"text", text}, {"model_id", model_id}, {"role", to_string(role)}};
    const std::string line = j.dump();
    std::lock_guard lock(mu_);
    entries_[key] = text;
    out_ << line << '\n';
    out_.flush();
}

bool ResponseCache::contains(const std::string& key) const {
    std::lock_guard lock(mu_);
    return entries_.count(key) > 0;
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

// ---- token bucket ----

TokenBucket::TokenBucket(RateLimitConfig config, std::shared_ptr<Clock> clock)
    : config_(config), clock_(std::move(clock)), tokens_(config.capacity),
      last_(clock_->now()) {
    if (config_.capacity > 0.0 && config_.refill_per_sec <= 0.0)
        throw std::invalid_argument("rate limit capacity without a refill rate");
}

void TokenBucket::acquire() {
    if (config_.capacity <= 0.0) return;
    std::lock_guard lock(mu_);
    auto refill = [this] {
        const auto now = clock_->now();
        const double elapsed_s =
            std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min(config_.capacity, tokens_ + elapsed_s * config_.refill_per_sec);
        last_ = now;
    };
    refill();
    while (tokens_ < 1.0) {
        const double need = 1.0 - tokens_;
        const auto wait = std::chrono::milliseconds(
            static_cast<long long>(std::ceil(need / config_.refill_per_sec * 1000.0)));
        clock_->sleep_for(std::max(wait, std::chrono::milliseconds(1)));
        refill();
    }
    tokens_ -= 1.0;
}

// ---- client ----

ModelClient::ModelClient(RoleRouting routing, ClientConfig config,
                         std::shared_ptr<Clock> clock)
    : routing_(std::move(routing)), config_(std::move(config)),
      clock_(clock ? std::move(clock) : std::make_shared<SystemClock>()),
      rng_(config_.retry.jitter_seed) {
    if (config_.cache_enabled) {
        if (config_.cache_path.empty())
            throw ClientError(ClientErrorKind::config, Role::describer, "",
                              "cache enabled but no cache path configured");
        cache_ = std::make_unique<ResponseCache>(config_.cache_path);
    }
}

void ModelClient::register_backend(const std::string& name, std::shared_ptr<Backend> backend) {
    backends_[name] = std::move(backend);
    if (config_.rate_limit.capacity > 0.0)
        buckets_[name] = std::make_unique<TokenBucket>(config_.rate_limit, clock_);
}

ModelRequest ModelClient::make_request(Role role, std::string prompt_text,
                                       std::optional<std::string> image_bytes) const {
    const auto& binding = routing_.at(role);
    ModelRequest request;
    request.role = role;
    request.model_id = binding.model_id;
    request.prompt_text = std::move(prompt_text);
    request.image_bytes = std::move(image_bytes);
    request.temperature = binding.temperature;
    request.max_output = binding.max_output;
    return request;
}

ModelResponse ModelClient::complete(const ModelRequest& request) {
    return complete(request, false);
}

ModelResponse ModelClient::complete(const ModelRequest& request, bool bypass_cache_read) {
    if (request.temperature < 0.0 || request.temperature > 2.0)
        throw ClientError(ClientErrorKind::config, request.role, request.model_id,
                          "temperature outside [0,2]");

    const std::string key = cache_key(request);
    if (cache_ && !bypass_cache_read) {
        const auto t0 = clock_->now();
        if (auto hit = cache_->get(key)) {
            ModelResponse response;
            response.text = *hit;
            response.model_id = request.model_id;
            response.latency_ms =
                static_cast<double>((clock_->now() - t0).count());
            response.from_cache = true;
            response.attempt_count = 1;
            return response;
        }
    }

    const auto& binding = routing_.at(request.role);
    auto backend_it = backends_.find(binding.backend);
    if (backend_it == backends_.end())
        throw ClientError(ClientErrorKind::config, request.role, request.model_id,
                          "backend '" + binding.backend + "' is not registered");
    Backend& backend = *backend_it->second;
    TokenBucket* bucket = nullptr;
    if (auto it = buckets_.find(binding.backend); it != buckets_.end())
        bucket = it->second.get();

    const int max_attempts = std::max(1, config_.retry.max_attempts);
    std::string last_error;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (bucket) bucket->acquire();
        const auto t0 = clock_->now();
        const BackendReply reply = backend.generate(request);
        const double latency = static_cast<double>((clock_->now() - t0).count());

        switch (reply.status) {
            case BackendStatus::ok: {
                if (cache_) cache_->put(key, reply.text, request.model_id, request.role);
                ModelResponse response;
                response.text = reply.text;
                response.model_id = request.model_id;
                response.latency_ms = latency;
                response.from_cache = false;
                response.attempt_count = attempt;
                return response;
            }
            case BackendStatus::auth:
                throw ClientError(ClientErrorKind::auth, request.role, request.model_id,
                                  "auth failure from backend '" + binding.backend +
                                      "': " + reply.error);
            case BackendStatus::fatal:
                throw ClientError(ClientErrorKind::backend, request.role, request.model_id,
                                  "backend '" + binding.backend + "' failed (status " +
                                      std::to_string(reply.http_status) + "): " + reply.error);
            case BackendStatus::transient:
                last_error = reply.error;
                if (attempt < max_attempts) clock_->sleep_for(backoff_delay(attempt));
                break;
        }
    }
    throw ClientError(ClientErrorKind::rate_limited, request.role, request.model_id,
                      "retry budget exhausted after " + std::to_string(max_attempts) +
                          " attempts; last error: " + last_error);
}

ModelResponse ModelClient::complete_role(Role role, std::string prompt_text,
                                         std::optional<std::string> image_bytes) {
    return complete(make_request(role, std::move(prompt_text), std::move(image_bytes)));
}

std::chrono::milliseconds ModelClient::backoff_delay(int attempt) {
    double delay =
        static_cast<double>(config_.retry.base.count()) *
        std::pow(config_.retry.factor, attempt - 1);
    if (config_.retry.jitter_fraction > 0.0) {
        std::lock_guard lock(rng_mu_);
        std::uniform_real_distribution<double> dist(0.0, config_.retry.jitter_fraction);
        delay *= 1.0 + dist(rng_);
    }
    return std::chrono::milliseconds(static_cast<long long>(std::llround(delay)));
}

}  // namespace examqa
