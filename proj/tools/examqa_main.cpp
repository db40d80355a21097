#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "examqa/augmentation.hpp"
#include "examqa/config.hpp"
#include "examqa/evaluation.hpp"
#include "examqa/pipeline.hpp"

namespace fs = std::filesystem;
using namespace examqa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;   // validation issues, config/schema errors
constexpr int kExitEnv = 2;      // unreadable inputs, IO failures

TemplateStore make_templates(const RunConfig& config) {
    auto store = TemplateStore::with_builtins();
    if (!config.templates_dir.empty()) store.load_directory(config.templates_dir);
    return store;
}

std::unique_ptr<ModelClient> make_client(const RunConfig& config, bool with_cache) {
    bool uses_mock = false;
    for (const auto& [role, binding] : config.routing.bindings)
        uses_mock |= binding.backend == "mock";
    if (uses_mock && !config.seed)
        throw ConfigError("mock backend requires --seed for reproducible runs");

    ClientConfig client_config;
    client_config.retry = config.retry;
    if (config.seed) client_config.retry.jitter_seed = *config.seed;
    client_config.rate_limit = config.rate_limit;
    client_config.cache_enabled = with_cache && config.cache_enabled;
    client_config.cache_path = config.effective_cache_path();

    auto client = std::make_unique<ModelClient>(config.routing, client_config);
    if (uses_mock)
        client->register_backend("mock", make_mock_backend(*config.seed, config.mock));
    for (const auto& http : config.http_backends)
        client->register_backend(http.name, make_http_backend(http));
    return client;
}

TableFormat format_from_name(const std::string& name) {
    if (name == "md" || name == "markdown") return TableFormat::markdown;
    if (name == "csv") return TableFormat::csv;
    return TableFormat::text;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const LoadError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == LoadErrorKind::io ? kExitEnv : kExitDomain;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const EvalError& e) {
        std::cerr << "eval error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const ClientError& e) {
        std::cerr << "client error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const PromptError& e) {
        std::cerr << "template error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitEnv;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}

// ---- validate ----

struct ValidateArgs {
    std::string manifest;
    std::string image_root;
    std::string split = "test";
    bool as_json = false;
};

int cmd_validate(const ValidateArgs& args) {
    LoadOptions opts;
    if (auto split = split_from_string(args.split)) opts.split = *split;
    opts.strict = false;  // collect row problems as issues instead of aborting

    auto result = load_dataset(args.manifest, args.image_root, opts);
    auto issues = validate_dataset(result.dataset);

    std::size_t total = issues.size() + result.skipped.size();
    if (args.as_json) {
        for (const auto& skip : result.skipped) {
            nlohmann::json j = {{"sample_id", nullptr},
                                {"reason", skip.message},
                                {"row", skip.row}};
            std::cout << j.dump() << '\n';
        }
        for (const auto& issue : issues) {
            nlohmann::json j = {{"sample_id", issue.sample_id}, {"reason", issue.reason}};
            std::cout << j.dump() << '\n';
        }
    } else {
        for (const auto& skip : result.skipped)
            std::cout << "row " << skip.row << ": " << skip.message << '\n';
        for (const auto& issue : issues)
            std::cout << issue.sample_id << ": " << issue.reason << '\n';
        std::cout << result.dataset.items.size() << " items, " << total << " issue(s)\n";
    }
    return total == 0 ? kExitOk : kExitDomain;
}

// ---- run ----

struct RunArgs {
    RunConfig config;
    bool resume = false;
    long long max_items = -1;
};

int cmd_run(const RunArgs& args) {
    const RunConfig& config = args.config;
    if (config.manifest.empty()) throw ConfigError("run requires --manifest (or a config file)");
    if (args.resume && !config.cache_enabled)
        throw ConfigError("--resume needs the response cache; do not pass --no-cache");

    LoadOptions load_opts;
    load_opts.split = config.split;
    load_opts.strict = config.strict_load;
    load_opts.marker_options.allow_digits = config.digit_markers;
    auto loaded = load_dataset(config.manifest, config.image_root, load_opts);
    Dataset ds = std::move(loaded.dataset);
    for (const auto& skip : loaded.skipped)
        std::cerr << "skipped row " << skip.row << ": " << skip.message << '\n';
    if (args.max_items >= 0 && ds.items.size() > static_cast<std::size_t>(args.max_items))
        ds.items.resize(static_cast<std::size_t>(args.max_items));

    fs::create_directories(config.output_dir);
    auto templates = make_templates(config);
    auto client = make_client(config, /*with_cache=*/true);
    Pipeline pipeline(*client, templates, config.pipeline_config());

    const auto t0 = std::chrono::steady_clock::now();
    auto predictions = pipeline.run_dataset(ds);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

    const auto csv_path = (fs::path(config.output_dir) / "predictions.csv").string();
    const auto audit_path = (fs::path(config.output_dir) / "audit.jsonl").string();
    write_predictions_csv(predictions, csv_path);
    write_audit_log(predictions, run_config_to_json(config), audit_path);

    auto compliance = compliance_report(predictions);
    std::size_t cache_hits = 0;
    for (const auto& p : predictions.predictions)
        for (const auto& t : p.traces) cache_hits += t.from_cache ? 1 : 0;

    std::cout << "items: " << ds.items.size() << '\n';
    std::cout << "predictions: " << predictions.predictions.size() << '\n';
    std::cout << "failures: " << predictions.failures.size() << '\n';
    std::cout << "no_answer: "
              << (compliance.method_histogram.count("none")
                      ? compliance.method_histogram.at("none")
                      : 0)
              << '\n';
    std::cout << "strict_rate: "
              << (compliance.strict_rate ? format_pct(*compliance.strict_rate * 100.0)
                                         : std::string("null"))
              << '\n';
    std::cout << "cache_hits: " << cache_hits << '\n';
    std::cout << "elapsed_ms: " << elapsed << '\n';
    std::cout << "wrote " << csv_path << " and " << audit_path << '\n';
    return kExitOk;
}

// ---- eval ----

struct EvalArgs {
    std::string preds;
    std::string gold;
    std::string baselines;
    std::string audit;
    std::string split = "test";
    std::string out_dir = "out";
    std::string format = "all";
    bool compliance = false;
};

int cmd_eval(const EvalArgs& args) {
    LoadOptions opts;
    if (auto split = split_from_string(args.split)) opts.split = *split;
    opts.strict = false;
    auto gold = load_dataset(args.gold, "", opts).dataset;

    auto preds = read_predictions_csv(args.preds);
    auto baseline_data = load_baselines(args.baselines);
    auto report = leaderboard(preds, gold, baseline_data.baselines, baseline_data.ranks);

    fs::create_directories(args.out_dir);
    auto write_format = [&](TableFormat format, const char* ext) {
        std::ofstream out(fs::path(args.out_dir) / (std::string("report.") + ext));
        out << render_report(report, format);
    };
    if (args.format == "all" || args.format == "text") write_format(TableFormat::text, "txt");
    if (args.format == "all" || args.format == "csv") write_format(TableFormat::csv, "csv");
    if (args.format == "all" || args.format == "md" || args.format == "markdown")
        write_format(TableFormat::markdown, "md");

    std::cout << render_report(report, format_from_name(
                                           args.format == "all" ? "text" : args.format));

    if (args.compliance) {
        if (args.audit.empty())
            throw ConfigError("--compliance needs --audit (extraction methods are not in "
                              "the submission CSV)");
        auto audited = read_audit_log(args.audit);
        auto comp = compliance_report(audited);
        std::ofstream out(fs::path(args.out_dir) / "compliance.txt");
        out << render_compliance(comp, TableFormat::text);
        std::cout << render_compliance(comp, TableFormat::text);
    }
    return kExitOk;
}

// ---- expand ----

struct ExpandArgs {
    RunConfig config;
    std::string base;
    std::vector<std::string> foreign;
    std::string target = "en";
    std::string out;
};

int cmd_expand(const ExpandArgs& args) {
    LoadOptions opts;
    opts.split = args.config.split;
    opts.strict = args.config.strict_load;

    auto base = load_dataset(args.base, args.config.image_root, opts).dataset;
    std::vector<Dataset> foreign;
    for (const auto& path : args.foreign)
        foreign.push_back(load_dataset(path, args.config.image_root, opts).dataset);

    if (args.out.empty()) throw ConfigError("expand requires --out");
    if (fs::path(args.out).has_parent_path())
        fs::create_directories(fs::path(args.out).parent_path());

    auto templates = make_templates(args.config);
    auto client = make_client(args.config, /*with_cache=*/true);

    ExpandOptions expand_opts;
    expand_opts.target = args.target;
    expand_opts.parallelism = args.config.parallelism;
    expand_opts.translate.marker_options.allow_digits = args.config.digit_markers;
    expand_opts.translate.template_version = args.config.template_version(Role::translator);

    auto result = expand_dataset(base, foreign, *client, templates, expand_opts);
    write_manifest(result.dataset, args.out);

    const auto failures_path = args.out + ".failures.jsonl";
    std::ofstream failures(failures_path, std::ios::binary);
    for (const auto& f : result.report.failures) {
        nlohmann::json j = {{"sample_id", f.sample_id},
                            {"source_language", f.source_language},
                            {"error", f.error}};
        failures << j.dump() << '\n';
    }

    std::cout << render_expansion_report(result.report);
    std::cout << "wrote " << args.out << " (" << result.dataset.items.size() << " rows)";
    if (!result.report.failures.empty())
        std::cout << " and " << failures_path << " (" << result.report.failures.size()
                  << " failures)";
    std::cout << '\n';
    return kExitOk;
}

// ---- report ----

struct StatsArgs {
    std::string manifest;
    std::string image_root;
    std::string split = "test";
    std::string format = "text";
};

int cmd_report_stats(const StatsArgs& args) {
    LoadOptions opts;
    if (auto split = split_from_string(args.split)) opts.split = *split;
    opts.strict = false;
    auto ds = load_dataset(args.manifest, args.image_root, opts).dataset;
    std::cout << render_dataset_stats(compute_stats(ds), format_from_name(args.format));
    return kExitOk;
}

struct AblationArgs {
    std::string rows;
    std::string layout = "list";
    std::string format = "text";
};

int cmd_report_ablation(const AblationArgs& args) {
    std::ifstream in(args.rows, std::ios::binary);
    if (!in.good()) throw EvalError(EvalErrorKind::schema, "cannot read rows: " + args.rows);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw EvalError(EvalErrorKind::schema, args.rows + ": " + e.what());
    }
    std::vector<AblationRow> rows;
    for (const auto& r : j) {
        AblationRow row;
        row.label = r.at("label").get<std::string>();
        row.condition = r.value("condition", std::string());
        row.accuracy_pct = r.at("accuracy").get<double>();
        rows.push_back(std::move(row));
    }
    const auto layout =
        args.layout == "grid" ? AblationLayout::grid : AblationLayout::list;
    std::cout << render_ablation_table(rows, layout, format_from_name(args.format));
    return kExitOk;
}

void add_config_overrides(CLI::App* cmd, RunConfig& config, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON run config file");
    cmd->add_option("--manifest", config.manifest, "dataset manifest (CSV or JSONL)");
    cmd->add_option("--image-root", config.image_root, "directory image refs resolve against");
    cmd->add_option("--output-dir", config.output_dir, "output directory");
    cmd->add_option("--seed", [&config](const CLI::results_t& values) {
        config.seed = std::stoull(values.at(0));
        return true;
    }, "seed for the mock backend and retry jitter")->type_name("UINT");
    cmd->add_option("--parallelism", config.parallelism, "worker pool width");
    cmd->add_option("--cache-path", config.cache_path, "response cache file");
    cmd->add_flag_callback("--no-cache", [&config] { config.cache_enabled = false; },
                           "disable the response cache");
    cmd->add_option("--templates-dir", config.templates_dir,
                    "directory of .prompt template files");
    cmd->add_option("--split",
                    [&config](const CLI::results_t& values) {
                        auto split = split_from_string(values.at(0));
                        if (!split) return false;
                        config.split = *split;
                        return true;
                    },
                    "train | validation | test")
        ->type_name("SPLIT");
    cmd->add_option("--backend",
                    [&config](const CLI::results_t& values) {
                        for (auto& [role, binding] : config.routing.bindings)
                            binding.backend = values.at(0);
                        return true;
                    },
                    "backend for every role (mock or a configured http backend name)")
        ->type_name("NAME");
    cmd->add_option("--mock-misbehavior",
                    [&config](const CLI::results_t& values) {
                        auto mode = mock_misbehavior_from_string(values.at(0));
                        if (!mode) return false;
                        config.mock.misbehavior = *mode;
                        return true;
                    },
                    "none | overflow | cyrillic | empty | mixed")
        ->type_name("MODE");
    cmd->add_option("--mock-latency-ms",
                    [&config](const CLI::results_t& values) {
                        config.mock.latency_ms = std::stoi(values.at(0));
                        return true;
                    },
                    "simulated per-call latency for the mock backend")
        ->type_name("MS");
    for (auto [flag, role] :
         {std::pair{"--describer-version", Role::describer},
          {"--aggregator-version", Role::aggregator},
          {"--reasoner-version", Role::reasoner},
          {"--translator-version", Role::translator}}) {
        cmd->add_option(flag,
                        [&config, role = role](const CLI::results_t& values) {
                            config.template_versions[role] = values.at(0);
                            return true;
                        },
                        "template version override")
            ->type_name("VERSION");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stage multilingual exam QA pipeline: describe, aggregate, reason"};
    app.require_subcommand(1);

    // validate
    ValidateArgs validate_args;
    auto* validate = app.add_subcommand("validate", "check a manifest and its images");
    validate->add_option("manifest", validate_args.manifest, "manifest path")->required();
    validate->add_option("--image-root", validate_args.image_root, "image root");
    validate->add_option("--split", validate_args.split, "train | validation | test");
    validate->add_flag("--json", validate_args.as_json, "emit issues as JSONL");

    // run
    RunArgs run_args;
    std::string run_config_path;
    auto* run = app.add_subcommand("run", "run the pipeline over a dataset");
    add_config_overrides(run, run_args.config, run_config_path);
    run->add_flag("--resume", run_args.resume, "continue an interrupted run from its cache");
    run->add_option("--max-items", run_args.max_items,
                    "process only the first N items (partial-run control)");

    // eval
    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "score predictions and build the leaderboard");
    eval->add_option("--preds", eval_args.preds, "predictions CSV")->required();
    eval->add_option("--gold", eval_args.gold, "gold manifest with answer keys")->required();
    eval->add_option("--baselines", eval_args.baselines, "baseline accuracies JSON")
        ->required();
    eval->add_option("--audit", eval_args.audit, "audit JSONL from the run");
    eval->add_option("--split", eval_args.split, "train | validation | test");
    eval->add_option("-o,--out", eval_args.out_dir, "report output directory");
    eval->add_option("--format", eval_args.format, "text | csv | md | all");
    eval->add_flag("--compliance", eval_args.compliance,
                   "also report strict compliance and extraction methods");

    // expand
    ExpandArgs expand_args;
    std::string expand_config_path;
    auto* expand = app.add_subcommand("expand", "translate foreign manifests into the target");
    add_config_overrides(expand, expand_args.config, expand_config_path);
    expand->add_option("--base", expand_args.base, "base manifest")->required();
    expand->add_option("--foreign", expand_args.foreign, "foreign manifest (repeatable)")
        ->required();
    expand->add_option("--target", expand_args.target, "target language (default en)");
    expand->add_option("--out", expand_args.out, "expanded manifest path")->required();

    // report
    auto* report = app.add_subcommand("report", "render dataset and ablation tables");
    report->require_subcommand(1);
    StatsArgs stats_args;
    auto* stats = report->add_subcommand("stats", "per-language dataset statistics");
    stats->add_option("--manifest", stats_args.manifest, "manifest path")->required();
    stats->add_option("--image-root", stats_args.image_root, "image root");
    stats->add_option("--split", stats_args.split, "split");
    stats->add_option("--format", stats_args.format, "text | csv | md");
    AblationArgs ablation_args;
    auto* ablation = report->add_subcommand("ablation", "render an ablation table");
    ablation->add_option("--rows", ablation_args.rows, "JSON rows file")->required();
    ablation->add_option("--layout", ablation_args.layout, "grid | list");
    ablation->add_option("--format", ablation_args.format, "text | csv | md");

    // The config file loads before CLI11 assigns flag values, so flags
    // given on the command line override file contents field by field.
    std::string pre_config;
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        if (arg == "--config" && i + 1 < argc) pre_config = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0) pre_config = std::string(arg.substr(9));
    }
    if (!pre_config.empty()) {
        const int code = run_guarded([&] {
            RunConfig loaded = load_run_config(pre_config);
            run_args.config = loaded;
            expand_args.config = std::move(loaded);
            return kExitOk;
        });
        if (code != kExitOk) return code;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitDomain;
    }

    if (validate->parsed()) return run_guarded([&] { return cmd_validate(validate_args); });
    if (run->parsed()) return run_guarded([&] { return cmd_run(run_args); });
    if (eval->parsed()) return run_guarded([&] { return cmd_eval(eval_args); });
    if (expand->parsed()) return run_guarded([&] { return cmd_expand(expand_args); });
    if (report->parsed()) {
        if (stats->parsed()) return run_guarded([&] { return cmd_report_stats(stats_args); });
        if (ablation->parsed())
            return run_guarded([&] { return cmd_report_ablation(ablation_args); });
    }
    return kExitDomain;
}
