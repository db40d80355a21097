#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"

// End-to-end checks of the installed command surface: exit codes, output
// files, determinism. Each case shells out to the built binary.

namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() /
              ("examqa_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }

    void write(const std::string& rel, const std::string& content) const {
        const fs::path p = dir / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out << content;
    }

    std::string slurp(const std::string& rel) const {
        std::ifstream in(dir / rel, std::ios::binary);
        REQUIRE(in.good());
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }
};

// Runs the CLI with output captured to files inside the workspace.
int run_cli(const Workspace& ws, const std::string& args, const std::string& tag = "cmd") {
    const std::string command = std::string(EXAMQA_CLI_PATH) + " " + args + " > " +
                                (ws.dir / (tag + ".out")).string() + " 2> " +
                                (ws.dir / (tag + ".err")).string();
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

const char* kManifest =
    "sample_id,subject,type,grade,answer_key,language,image,question\n"
    "s1,biology,text,10,A,en,,What color is the sky?\n"
    "s2,chemistry,text,11,B,bg,,Коя от тези е киселина?\n"
    "s3,physics,image_text,12,C,de,img/s3.png,\n"
    "s4,math,text,9,D,zh,,什么是质数?\n";

void seed_workspace(const Workspace& ws) {
    ws.write("m.csv", kManifest);
    ws.write("img/s3.png", "fake-png-bytes");
}

}  // namespace

TEST_CASE("cli validate: exit codes 0, 1, 2") {
    Workspace ws;
    seed_workspace(ws);
    CHECK(run_cli(ws, "validate " + (ws.dir / "m.csv").string() + " --image-root " +
                          ws.dir.string()) == 0);

    // broken image reference: one issue, exit 1
    ws.write("broken.csv",
             "sample_id,subject,type,grade,answer_key,language,image\n"
             "x1,physics,image_text,12,C,de,missing.png\n");
    CHECK(run_cli(ws, "validate " + (ws.dir / "broken.csv").string() + " --image-root " +
                          ws.dir.string(),
                  "broken") == 1);
    CHECK(ws.slurp("broken.out").find("unresolvable image_ref") != std::string::npos);

    // unreadable manifest: exit 2
    CHECK(run_cli(ws, "validate " + (ws.dir / "nope.csv").string(), "missing") == 2);
}

TEST_CASE("cli validate: --json emits one issue per line") {
    Workspace ws;
    ws.write("dup.csv",
             "sample_id,subject,type,grade,answer_key,language,image\n"
             "d,biology,text,10,A,en,\n"
             "d,biology,text,10,B,en,\n");
    CHECK(run_cli(ws, "validate " + (ws.dir / "dup.csv").string() + " --json", "dup") == 1);
    auto out = ws.slurp("dup.out");
    CHECK(out.find("\"sample_id\":\"d\"") != std::string::npos);
    CHECK(out.find("duplicate sample_id") != std::string::npos);
}

TEST_CASE("cli run: deterministic across reruns and parallelism") {
    Workspace ws;
    seed_workspace(ws);
    const std::string base = "run --manifest " + (ws.dir / "m.csv").string() +
                             " --image-root " + ws.dir.string() + " --backend mock --seed 7";
    CHECK(run_cli(ws, base + " --output-dir " + (ws.dir / "a").string(), "a") == 0);
    CHECK(run_cli(ws, base + " --output-dir " + (ws.dir / "b").string(), "b") == 0);
    CHECK(run_cli(ws, base + " --parallelism 8 --output-dir " + (ws.dir / "c").string(),
                  "c") == 0);

    const auto a = ws.slurp("a/predictions.csv");
    CHECK(a == ws.slurp("b/predictions.csv"));
    CHECK(a == ws.slurp("c/predictions.csv"));
    CHECK(a.rfind("sample_id,answer\n", 0) == 0);
}

TEST_CASE("cli run: mock without seed is a config error") {
    Workspace ws;
    seed_workspace(ws);
    CHECK(run_cli(ws, "run --manifest " + (ws.dir / "m.csv").string() + " --backend mock",
                  "noseed") == 1);
    CHECK(ws.slurp("noseed.err").find("seed") != std::string::npos);
}

TEST_CASE("cli run: --max-items then --resume completes from cache") {
    Workspace ws;
    seed_workspace(ws);
    const std::string out_dir = (ws.dir / "out").string();
    const std::string base = "run --manifest " + (ws.dir / "m.csv").string() +
                             " --image-root " + ws.dir.string() +
                             " --backend mock --seed 7 --output-dir " + out_dir;

    CHECK(run_cli(ws, base + " --max-items 2", "partial") == 0);
    auto partial = ws.slurp("out/predictions.csv");
    CHECK(std::count(partial.begin(), partial.end(), '\n') == 3);  // header + 2 rows

    CHECK(run_cli(ws, base + " --resume", "resume") == 0);
    auto resumed = ws.slurp("out/predictions.csv");
    CHECK(std::count(resumed.begin(), resumed.end(), '\n') == 5);
    auto summary = ws.slurp("resume.out");
    auto hits_pos = summary.find("cache_hits: ");
    REQUIRE(hits_pos != std::string::npos);
    CHECK(summary.substr(hits_pos, 14).find("0") != 12);  // at least some hits

    // and a fresh full run produces the same bytes
    CHECK(run_cli(ws, "run --manifest " + (ws.dir / "m.csv").string() + " --image-root " +
                          ws.dir.string() + " --backend mock --seed 7 --output-dir " +
                          (ws.dir / "fresh").string(),
                  "fresh") == 0);
    CHECK(resumed == ws.slurp("fresh/predictions.csv"));
}

TEST_CASE("cli run: config file values with flag overrides") {
    Workspace ws;
    seed_workspace(ws);
    ws.write("config.json", std::string("{\n") +
                                "  \"manifest\": \"" + (ws.dir / "m.csv").string() + "\",\n" +
                                "  \"image_root\": \"" + ws.dir.string() + "\",\n" +
                                "  \"seed\": 7,\n" +
                                "  \"output_dir\": \"" + (ws.dir / "cfg_out").string() +
                                "\",\n" +
                                "  \"mock\": {\"misbehavior\": \"mixed\"}\n" +
                                "}\n");
    CHECK(run_cli(ws, "run --config " + (ws.dir / "config.json").string(), "cfg") == 0);
    CHECK(fs::exists(ws.dir / "cfg_out/predictions.csv"));

    // flag wins over the file value
    CHECK(run_cli(ws, "run --config " + (ws.dir / "config.json").string() +
                          " --output-dir " + (ws.dir / "flag_out").string(),
                  "cfg2") == 0);
    CHECK(fs::exists(ws.dir / "flag_out/predictions.csv"));
    // audit log embeds the effective config
    auto audit = ws.slurp("flag_out/audit.jsonl");
    CHECK(audit.find("\"misbehavior\":\"mixed\"") != std::string::npos);
}

TEST_CASE("cli eval: reports, compliance, and failure modes") {
    Workspace ws;
    seed_workspace(ws);
    const std::string out_dir = (ws.dir / "run").string();
    CHECK(run_cli(ws, "run --manifest " + (ws.dir / "m.csv").string() + " --image-root " +
                          ws.dir.string() + " --backend mock --seed 7 --output-dir " +
                          out_dir,
                  "run") == 0);

    ws.write("baselines.json",
             R"({"baselines": {"en": 20.0, "bg": 25.0, "de": 30.0, "zh": 30.0,)"
             R"( "multilingual": 26.0}})");
    CHECK(run_cli(ws, "eval --preds " + out_dir + "/predictions.csv --gold " +
                          (ws.dir / "m.csv").string() + " --baselines " +
                          (ws.dir / "baselines.json").string() + " --audit " + out_dir +
                          "/audit.jsonl --compliance -o " + (ws.dir / "report").string(),
                  "eval") == 0);
    CHECK(fs::exists(ws.dir / "report/report.txt"));
    CHECK(fs::exists(ws.dir / "report/report.csv"));
    CHECK(fs::exists(ws.dir / "report/report.md"));
    CHECK(fs::exists(ws.dir / "report/compliance.txt"));
    auto text = ws.slurp("eval.out");
    CHECK(text.find("Multilingual") != std::string::npos);
    CHECK(text.find("strict_rate") != std::string::npos);

    // missing baseline for a present language: exit 1, names the language
    ws.write("missing.json", R"({"baselines": {"en": 20.0}})");
    CHECK(run_cli(ws, "eval --preds " + out_dir + "/predictions.csv --gold " +
                          (ws.dir / "m.csv").string() + " --baselines " +
                          (ws.dir / "missing.json").string() + " -o " +
                          (ws.dir / "r2").string(),
                  "eval2") == 1);
    CHECK(ws.slurp("eval2.err").find("bg") != std::string::npos);
}

TEST_CASE("cli expand: accounting and idempotent rerun via cache") {
    Workspace ws;
    ws.write("base.csv",
             "sample_id,subject,type,grade,answer_key,language,image,question,options\n"
             "e1,s,text,10,A,en,,Question one,A. x|B. y\n"
             "e2,s,text,10,B,en,,Question two,A. x|B. y\n");
    std::string foreign = "sample_id,subject,type,grade,answer_key,language,image,question,options\n";
    for (int i = 0; i < 5; ++i)
        foreign += "f" + std::to_string(i) + ",s,text,10,A,de,,Frage " + std::to_string(i) +
                   ",A. eins|B. zwei\n";
    ws.write("foreign.csv", foreign);

    const std::string cmd = "expand --base " + (ws.dir / "base.csv").string() +
                            " --foreign " + (ws.dir / "foreign.csv").string() +
                            " --backend mock --seed 3 --cache-path " +
                            (ws.dir / "cache.jsonl").string() + " --out " +
                            (ws.dir / "expanded.csv").string();
    CHECK(run_cli(ws, cmd, "exp1") == 0);
    auto first = ws.slurp("expanded.csv");
    CHECK(std::count(first.begin(), first.end(), '\n') == 8);  // header + 2 base + 5
    CHECK(ws.slurp("exp1.out").find("expanded total: 7") != std::string::npos);

    CHECK(run_cli(ws, cmd, "exp2") == 0);
    CHECK(ws.slurp("expanded.csv") == first);
}

TEST_CASE("cli report: stats and ablation tables") {
    Workspace ws;
    seed_workspace(ws);
    CHECK(run_cli(ws, "report stats --manifest " + (ws.dir / "m.csv").string(), "stats") ==
          0);
    auto stats = ws.slurp("stats.out");
    CHECK(stats.find("English") != std::string::npos);
    CHECK(stats.find("Chinese") != std::string::npos);

    ws.write("rows.json", R"([
        {"label": "2.5 Flash", "condition": "long descriptive / few", "accuracy": 55.91},
        {"label": "2.5 Flash", "condition": "strict letter-only / few", "accuracy": 57.06},
        {"label": "1.5 Pro", "condition": "strict letter-only / few", "accuracy": 61.67}
    ])");
    CHECK(run_cli(ws, "report ablation --rows " + (ws.dir / "rows.json").string() +
                          " --layout list",
                  "abl") == 0);
    auto ablation = ws.slurp("abl.out");
    CHECK(ablation.find("55.91") != std::string::npos);
    CHECK(ablation.find("61.67") != std::string::npos);
}

TEST_CASE("cli: usage errors exit 1") {
    Workspace ws;
    CHECK(run_cli(ws, "frobnicate", "bad") == 1);
    CHECK(run_cli(ws, "eval", "noargs") == 1);
}
