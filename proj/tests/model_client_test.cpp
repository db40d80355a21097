#include "examqa/model_client.hpp"

#include <filesystem>
#include <random>

#include "doctest.h"
#include "examqa/answer_norm.hpp"
#include "support/scripted_backend.hpp"

using namespace examqa;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("examqa_mc_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ClientConfig no_retry_config() {
    ClientConfig config;
    config.retry.max_attempts = 1;
    config.retry.jitter_fraction = 0.0;
    return config;
}

RoleRouting scripted_routing() {
    auto routing = RoleRouting::defaults();
    for (auto& [role, binding] : routing.bindings) binding.backend = "scripted";
    return routing;
}

}  // namespace

TEST_CASE("routing defaults carry the ensemble temperatures") {
    auto routing = RoleRouting::defaults();
    CHECK(routing.at(Role::describer).temperature == doctest::Approx(1.5));
    CHECK(routing.at(Role::aggregator).temperature == doctest::Approx(1.5));
    CHECK(routing.at(Role::reasoner).temperature == doctest::Approx(0.2));
    routing.validate();

    RoleRouting incomplete;
    incomplete.bindings[Role::describer] = {"m", 1.0, "mock", 10};
    CHECK_THROWS_AS(incomplete.validate(), ClientError);
}

TEST_CASE("mock backend is deterministic and role-aware") {
    auto a = make_mock_backend(42);
    auto b = make_mock_backend(42);
    ModelRequest request;
    request.role = Role::reasoner;
    request.model_id = "m";
    request.prompt_text = "P";

    auto first = a->generate(request);
    auto second = b->generate(request);
    CHECK(first.text == second.text);
    CHECK(first.text.size() == 1);
    CHECK(first.text[0] >= 'A');
    CHECK(first.text[0] <= 'E');

    // different seed, different stream (with overwhelming probability
    // over several prompts)
    auto c = make_mock_backend(43);
    bool any_diff = false;
    for (int i = 0; i < 8; ++i) {
        request.prompt_text = "P" + std::to_string(i);
        any_diff |= (a->generate(request).text != c->generate(request).text);
    }
    CHECK(any_diff);
}

TEST_CASE("mock describer output parses as a canonical caption") {
    auto mock = make_mock_backend(7);
    ModelRequest request;
    request.role = Role::describer;
    request.prompt_text = "type: image_text sample";
    auto reply = mock->generate(request);
    CHECK(reply.text.find("Question: ") != std::string::npos);
    CHECK(reply.text.find("Options:") != std::string::npos);
    CHECK(reply.text.find("A. ") != std::string::npos);
    CHECK(reply.text.find("D. ") != std::string::npos);
    CHECK(reply.text.find("Figure: Synthetic") != std::string::npos);

    request.prompt_text = "metadata with type: text inside";
    CHECK(mock->generate(request).text.find("Figure: none") != std::string::npos);
}

TEST_CASE("mock misbehavior modes shape reasoner output") {
    ModelRequest request;
    request.role = Role::reasoner;
    request.prompt_text = "prompt";

    MockOptions overflow;
    overflow.misbehavior = MockMisbehavior::overflow;
    auto text = make_mock_backend(1, overflow)->generate(request).text;
    CHECK(text.rfind("The answer is ", 0) == 0);
    auto extracted = extract_answer_letter(text);
    REQUIRE(extracted.has_value());
    CHECK(extracted->extraction_method == ExtractionMethod::fallback_scan);

    MockOptions cyr;
    cyr.misbehavior = MockMisbehavior::cyrillic;
    auto cyr_text = make_mock_backend(1, cyr)->generate(request).text;
    auto cyr_letter = extract_answer_letter(cyr_text);
    REQUIRE(cyr_letter.has_value());
    CHECK(cyr_letter->extraction_method == ExtractionMethod::script_mapped);

    MockOptions empty;
    empty.misbehavior = MockMisbehavior::empty;
    CHECK(make_mock_backend(1, empty)->generate(request).text.empty());
}

TEST_CASE("cache_key: field sensitivity and frozen digests") {
    ModelRequest request;
    request.role = Role::reasoner;
    request.model_id = "gemini-2.5-pro";
    request.prompt_text = "P";
    request.temperature = 0.2;
    request.max_output = 8;

    CHECK(cache_key(request) == cache_key(request));
    // digest recorded once with an independent sha256 implementation
    CHECK(cache_key(request) ==
          "ec8ec7cff97cec52d69576456be7e71680e9dfdfbdbe3a196fef927f355914c5");

    auto hot = request;
    hot.temperature = 1.5;
    CHECK(cache_key(hot) != cache_key(request));

    auto other_model = request;
    other_model.model_id = "gemini-2.5-flash";
    CHECK(cache_key(other_model) != cache_key(request));

    auto other_budget = request;
    other_budget.max_output = 1024;
    CHECK(cache_key(other_budget) != cache_key(request));

    ModelRequest imaged;
    imaged.model_id = "gemini-2.5-flash";
    imaged.prompt_text = "describe this";
    imaged.temperature = 1.5;
    imaged.max_output = 1024;
    imaged.image_bytes = std::string("imgbytes");
    CHECK(cache_key(imaged) ==
          "b97e7de4885ac3bdeebf28c5fbaed4e483fc1420147126366ab17136fe788243");
    auto no_image = imaged;
    no_image.image_bytes.reset();
    CHECK(cache_key(no_image) != cache_key(imaged));
}

TEST_CASE("cache: second completion is served from cache, byte-identical") {
    TempDir dir;
    ClientConfig config = no_retry_config();
    config.cache_enabled = true;
    config.cache_path = dir.path / "cache.jsonl";

    ModelClient client(RoleRouting::defaults(), config);
    client.register_backend("mock", make_mock_backend(42));

    auto first = client.complete_role(Role::reasoner, "P");
    CHECK(!first.from_cache);
    auto second = client.complete_role(Role::reasoner, "P");
    CHECK(second.from_cache);
    CHECK(second.attempt_count == 1);
    CHECK(second.text == first.text);

    // a fresh client over the same file still hits
    ModelClient reloaded(RoleRouting::defaults(), config);
    reloaded.register_backend("mock", make_mock_backend(42));
    auto third = reloaded.complete_role(Role::reasoner, "P");
    CHECK(third.from_cache);
    CHECK(third.text == first.text);
}

TEST_CASE("cache: torn tail lines are tolerated") {
    TempDir dir;
    const auto path = dir.path / "cache.jsonl";
    {
        ResponseCache cache(path);
        cache.put("k1", "v1", "m", Role::reasoner);
    }
    {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << "{\"key\": \"k2\", \"tex";  // interrupted write
    }
    ResponseCache cache(path);
    CHECK(cache.size() == 1);
    CHECK(cache.get("k1") == std::string("v1"));
    CHECK(!cache.get("k2").has_value());
    // and the file still accepts appends
    cache.put("k3", "v3", "m", Role::reasoner);
    ResponseCache again(path);
    CHECK(again.get("k3") == std::string("v3"));
}

TEST_CASE("retry: two transient failures then success gives attempt_count 3") {
    auto clock = std::make_shared<VirtualClock>();
    auto scripted = std::make_shared<testsupport::ScriptedBackend>(
        std::vector<BackendReply>{
            {BackendStatus::transient, "", 503, "busy"},
            {BackendStatus::transient, "", 503, "busy"},
            {BackendStatus::ok, "done", 200, ""},
        },
        clock);

    ClientConfig config;
    config.retry.max_attempts = 5;
    config.retry.jitter_fraction = 0.0;
    ModelClient client(scripted_routing(), config, clock);
    client.register_backend("scripted", scripted);

    auto response = client.complete_role(Role::reasoner, "P");
    CHECK(response.text == "done");
    CHECK(response.attempt_count == 3);
    CHECK(scripted->call_count() == 3);
    // backoff spacing: 1s then 2s
    auto sleeps = clock->sleeps();
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[0] == 1000ms);
    CHECK(sleeps[1] == 2000ms);
}

TEST_CASE("retry: exhaustion raises rate_limited after the full backoff ladder") {
    auto clock = std::make_shared<VirtualClock>();
    auto scripted = std::make_shared<testsupport::ScriptedBackend>(
        std::vector<BackendReply>{{BackendStatus::transient, "", 429, "slow down"}}, clock);

    ClientConfig config;
    config.retry.max_attempts = 5;
    config.retry.jitter_fraction = 0.0;
    ModelClient client(scripted_routing(), config, clock);
    client.register_backend("scripted", scripted);

    try {
        client.complete_role(Role::reasoner, "P");
        FAIL("expected ClientError");
    } catch (const ClientError& e) {
        CHECK(e.kind() == ClientErrorKind::rate_limited);
        CHECK(e.role() == Role::reasoner);
        CHECK(e.model_id() == "gemini-2.5-pro");
    }
    CHECK(scripted->call_count() == 5);
    auto sleeps = clock->sleeps();
    REQUIRE(sleeps.size() == 4);
    CHECK(sleeps[0] == 1000ms);
    CHECK(sleeps[1] == 2000ms);
    CHECK(sleeps[2] == 4000ms);
    CHECK(sleeps[3] == 8000ms);
}

TEST_CASE("retry: non-retryable errors are never retried") {
    for (auto [status, kind] :
         {std::pair{BackendStatus::auth, ClientErrorKind::auth},
          std::pair{BackendStatus::fatal, ClientErrorKind::backend}}) {
        auto scripted = std::make_shared<testsupport::ScriptedBackend>(
            std::vector<BackendReply>{{status, "", 400, "nope"}});
        ModelClient client(scripted_routing(), no_retry_config());
        client.register_backend("scripted", scripted);
        try {
            client.complete_role(Role::reasoner, "P");
            FAIL("expected ClientError");
        } catch (const ClientError& e) {
            CHECK(e.kind() == kind);
        }
        CHECK(scripted->call_count() == 1);
    }
}

TEST_CASE("retry: jittered delays stay inside the declared envelope") {
    auto clock = std::make_shared<VirtualClock>();
    auto scripted = std::make_shared<testsupport::ScriptedBackend>(
        std::vector<BackendReply>{{BackendStatus::transient, "", 503, "busy"}}, clock);

    ClientConfig config;
    config.retry.max_attempts = 5;
    config.retry.jitter_fraction = 0.5;
    config.retry.jitter_seed = 1234;
    ModelClient client(scripted_routing(), config, clock);
    client.register_backend("scripted", scripted);

    CHECK_THROWS_AS(client.complete_role(Role::reasoner, "P"), ClientError);
    auto sleeps = clock->sleeps();
    REQUIRE(sleeps.size() == 4);
    const long long bases[] = {1000, 2000, 4000, 8000};
    for (int i = 0; i < 4; ++i) {
        CHECK(sleeps[static_cast<std::size_t>(i)].count() >= bases[i]);
        CHECK(sleeps[static_cast<std::size_t>(i)].count() <= bases[i] * 3 / 2);
    }
}

TEST_CASE("rate limiter: issued calls respect the token budget over time") {
    auto clock = std::make_shared<VirtualClock>();
    auto scripted = std::make_shared<testsupport::ScriptedBackend>(
        std::vector<BackendReply>{{BackendStatus::ok, "ok", 200, ""}}, clock);

    ClientConfig config = no_retry_config();
    config.rate_limit.capacity = 2.0;
    config.rate_limit.refill_per_sec = 1.0;
    ModelClient client(scripted_routing(), config, clock);
    client.register_backend("scripted", scripted);

    for (int i = 0; i < 5; ++i)
        client.complete_role(Role::reasoner, "P" + std::to_string(i));

    auto calls = scripted->calls();
    REQUIRE(calls.size() == 5);
    // bucket starts full (2 tokens) then refills at 1/s
    CHECK(calls[0].at == 0ms);
    CHECK(calls[1].at == 0ms);
    CHECK(calls[2].at == 1000ms);
    CHECK(calls[3].at == 2000ms);
    CHECK(calls[4].at == 3000ms);

    // property: no 1-second window contains more than capacity+refill calls
    for (std::size_t i = 0; i + 3 < calls.size(); ++i)
        CHECK(calls[i + 3].at - calls[i].at >= 1000ms);
}

TEST_CASE("rate limiter config validation") {
    auto clock = std::make_shared<VirtualClock>();
    RateLimitConfig bad;
    bad.capacity = 2.0;
    bad.refill_per_sec = 0.0;
    CHECK_THROWS_AS(TokenBucket(bad, clock), std::invalid_argument);
}

TEST_CASE("mock translator failure injection is deterministic") {
    MockOptions opts;
    opts.translator_fail_rate = 0.5;
    auto mock = make_mock_backend(9, opts);
    ModelRequest request;
    request.role = Role::translator;
    int failures = 0;
    for (int i = 0; i < 40; ++i) {
        request.prompt_text = "```\nQuestion: q" + std::to_string(i) + "\n```";
        auto first = mock->generate(request);
        auto second = mock->generate(request);
        CHECK(first.status == second.status);
        if (first.status == BackendStatus::fatal) ++failures;
    }
    CHECK(failures > 5);
    CHECK(failures < 35);
}

TEST_CASE("mock translator preserves option structure") {
    auto mock = make_mock_backend(3);
    ModelRequest request;
    request.role = Role::translator;
    request.prompt_text =
        "Translate...\n```\nQuestion: Кой е отговорът?\nOptions:\nA. първи\nB. втори\n```\n";
    auto reply = mock->generate(request);
    CHECK(reply.text == "Question: [t] Кой е отговорът?\nOptions:\nA. [t] първи\nB. [t] втори");
}

TEST_CASE("unregistered backend is a config error") {
    ModelClient client(RoleRouting::defaults(), no_retry_config());
    try {
        client.complete_role(Role::reasoner, "P");
        FAIL("expected ClientError");
    } catch (const ClientError& e) {
        CHECK(e.kind() == ClientErrorKind::config);
    }
}
