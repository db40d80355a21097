#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "examqa/answer_norm.hpp"
#include "examqa/evaluation.hpp"
#include "examqa/model_client.hpp"
#include "examqa/pipeline.hpp"
#include "examqa/prompt_engine.hpp"

using namespace examqa;

namespace {

void BM_NormalizeMarker(benchmark::State& state) {
    const std::vector<std::string> tokens = {"(A)", "B.", "③", "Г)", "هـ", "Q7.", "x",
                                             "Ｅ．"};
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalize_marker(tokens[i % tokens.size()]));
        ++i;
    }
}
BENCHMARK(BM_NormalizeMarker);

void BM_ExtractExact(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(extract_answer_letter(" D\n"));
}
BENCHMARK(BM_ExtractExact);

void BM_ExtractOverflow(benchmark::State& state) {
    const std::string text =
        "Considering the vessel orientation and the oxygenation gradient described in the "
        "caption, options A and C can be ruled out; the remaining evidence points to B.";
    for (auto _ : state) benchmark::DoNotOptimize(extract_answer_letter(text));
}
BENCHMARK(BM_ExtractOverflow);

void BM_ExtractScriptMapped(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(extract_answer_letter("Отговор: Г"));
}
BENCHMARK(BM_ExtractScriptMapped);

void BM_CanonicalizeOptions(benchmark::State& state) {
    const std::vector<std::string> lines = {"А) дихателна система", "Б) кръвоносна система",
                                            "В) нервна система", "Г) отделителна система"};
    for (auto _ : state) benchmark::DoNotOptimize(canonicalize_options(lines));
}
BENCHMARK(BM_CanonicalizeOptions);

void BM_CacheKey(benchmark::State& state) {
    ModelRequest request;
    request.role = Role::reasoner;
    request.model_id = "gemini-2.5-pro";
    request.temperature = 0.2;
    request.max_output = 8;
    request.prompt_text = std::string(2048, 'q');
    for (auto _ : state) benchmark::DoNotOptimize(cache_key(request));
}
BENCHMARK(BM_CacheKey);

void BM_RenderReasoner(benchmark::State& state) {
    const auto store = TemplateStore::with_builtins();
    const std::string caption(static_cast<std::size_t>(state.range(0)), 'c');
    for (auto _ : state) benchmark::DoNotOptimize(render_reasoner(store, caption));
}
BENCHMARK(BM_RenderReasoner)->Arg(256)->Arg(4096);

void BM_Score(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Dataset gold;
    PredictionSet preds;
    std::mt19937 rng(1);
    std::uniform_int_distribution<int> letter(0, 4);
    for (std::size_t i = 0; i < n; ++i) {
        ExamItem item;
        item.sample_id = "s" + std::to_string(i);
        item.grade = 8;
        item.language = "en";
        item.answer_key = label_from_index(letter(rng));
        gold.items.push_back(item);
        Prediction p;
        p.sample_id = item.sample_id;
        p.answer = AnswerLetter{*label_from_index(letter(rng)), ExtractionMethod::exact};
        preds.predictions.push_back(p);
    }
    for (auto _ : state) benchmark::DoNotOptimize(score(preds, gold));
}
BENCHMARK(BM_Score)->Arg(1000);

void BM_MockPipelineItem(benchmark::State& state) {
    ClientConfig config;
    config.retry.max_attempts = 1;
    ModelClient client(RoleRouting::defaults(), config);
    client.register_backend("mock", make_mock_backend(42));
    const auto templates = TemplateStore::with_builtins();
    Pipeline pipeline(client, templates, {});

    ExamItem item;
    item.sample_id = "bench-1";
    item.subject = "biology";
    item.item_type = ItemType::text;
    item.grade = 10;
    item.language = "en";
    item.extra["question"] = "Which organ pumps blood?";

    for (auto _ : state) benchmark::DoNotOptimize(pipeline.run_item(item));
}
BENCHMARK(BM_MockPipelineItem);

}  // namespace

BENCHMARK_MAIN();
