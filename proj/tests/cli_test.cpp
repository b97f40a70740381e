#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>

#include "support/helpers.hpp"
#include "vitd/cli.hpp"

using namespace vitd;
using test::TempDir;
using test::write_file;

namespace {

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    RunResult r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Runs the installed binary; used to pin the process-level exit codes.
RunResult run_binary(const std::string& args) {
    RunResult r;
    const std::string cmd = std::string(VITD_CLI_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) r.out += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::filesystem::path write_train_tsv(const TempDir& tmp, std::size_t rows,
                                      const char* name = "train.tsv") {
    static const char* kLabels[] = {"Non-Violence", "Passive-Violence",
                                    "Direct-Violence"};
    std::string tsv = "text\tlabel\n";
    for (std::size_t i = 0; i < rows; ++i) {
        tsv += "row text number " + std::to_string(i) + "\t" + kLabels[i % 3] + "\n";
    }
    return write_file(tmp / name, tsv);
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<nlohmann::json> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
    }
    return rows;
}

}  // namespace

TEST_CASE("augment: 10 rows fan out to 70 with the mock translator") {
    TempDir tmp("cli");
    const auto train = write_train_tsv(tmp, 10);
    const auto r = run_cli({"augment", "--train", train.string(), "--translator",
                            "mock", "--cache", (tmp / "cache").string(), "--out",
                            (tmp / "aug").string()});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    const auto out =
        corpus::load_dataset(tmp.path() / "aug" / "train.augmented.tsv", "t", true);
    CHECK(out.size() == 70);

    const auto manifest = nlohmann::json::parse(
        test::read_file(tmp.path() / "aug" / "augment_manifest.json"));
    CHECK(manifest.at("splits").at("train").at("output_rows") == 70);
    CHECK(manifest.at("cache").at("hit_ratio") == 0.0);
    CHECK(manifest.contains("config_hash"));
    CHECK(manifest.contains("data_hash"));
    CHECK(manifest.contains("wall_time_ms"));
}

TEST_CASE("augment: missing train file exits 2 and names the path") {
    TempDir tmp("cli");
    const auto r = run_cli({"augment", "--train", (tmp / "nope.tsv").string(),
                            "--out", (tmp / "aug").string()});
    CHECK(r.code == cli::kExitInput);
    CHECK(r.err.find("nope.tsv") != std::string::npos);
}

TEST_CASE("augment: a warm cache produces hit ratio 1.0 and identical output") {
    TempDir tmp("cli");
    const auto train = write_train_tsv(tmp, 5);
    const auto cache = (tmp / "cache").string();
    REQUIRE(run_cli({"augment", "--train", train.string(), "--cache", cache, "--out",
                     (tmp / "a1").string()})
                .code == 0);
    REQUIRE(run_cli({"augment", "--train", train.string(), "--cache", cache, "--out",
                     (tmp / "a2").string()})
                .code == 0);
    const auto m2 = nlohmann::json::parse(
        test::read_file(tmp.path() / "a2" / "augment_manifest.json"));
    CHECK(m2.at("cache").at("hit_ratio") == 1.0);
    CHECK(test::read_file(tmp.path() / "a1" / "train.augmented.tsv") ==
          test::read_file(tmp.path() / "a2" / "train.augmented.tsv"));
}

TEST_CASE("augment honors --include-dev") {
    TempDir tmp("cli");
    const auto train = write_train_tsv(tmp, 3);
    const auto dev = write_train_tsv(tmp, 2, "dev.tsv");
    const auto r = run_cli({"augment", "--train", train.string(), "--dev",
                            dev.string(), "--include-dev", "--cache",
                            (tmp / "cache").string(), "--out", (tmp / "aug").string()});
    REQUIRE(r.code == 0);
    CHECK(corpus::load_dataset(tmp.path() / "aug" / "dev.augmented.tsv", "d", true)
              .size() == 14);
}

TEST_CASE("train cascade writes stage directories and a manifest") {
    TempDir tmp("cli");
    corpus::save_dataset(test::make_synthetic_corpus(7, 123),
                         tmp / "synth.tsv");
    const auto r = run_cli({"train", "--train", (tmp / "synth.tsv").string(),
                            "--mode", "cascade", "--out", (tmp / "model").string()});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(tmp.path() / "model" / "manifest.json"));
    CHECK(std::filesystem::exists(tmp.path() / "model" / "stage1" / "model.json"));
    CHECK(std::filesystem::exists(tmp.path() / "model" / "stage2" / "vectorizer.json"));
    const auto manifest =
        nlohmann::json::parse(test::read_file(tmp.path() / "model" / "manifest.json"));
    CHECK(manifest.at("mode") == "cascade");
    CHECK(manifest.at("stage1").at("kind") == "logreg");
    CHECK(manifest.contains("created_at"));
}

TEST_CASE("train flat logreg writes a single model directory") {
    TempDir tmp("cli");
    corpus::save_dataset(test::make_synthetic_corpus(5, 9), tmp / "synth.tsv");
    const auto r = run_cli({"train", "--train", (tmp / "synth.tsv").string(),
                            "--mode", "flat", "--model1", "logreg", "--out",
                            (tmp / "flat").string()});
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(tmp.path() / "flat" / "model.json"));
    CHECK(std::filesystem::exists(tmp.path() / "flat" / "vectorizer.json"));
    const auto manifest =
        nlohmann::json::parse(test::read_file(tmp.path() / "flat" / "manifest.json"));
    CHECK(manifest.at("mode") == "flat");
}

TEST_CASE("train cascade on all-NonViolence data exits 3") {
    TempDir tmp("cli");
    std::string tsv = "text\tlabel\n";
    for (int i = 0; i < 6; ++i)
        tsv += "calm text " + std::to_string(i) + "\tNon-Violence\n";
    const auto train = write_file(tmp / "calm.tsv", tsv);
    const auto r = run_cli({"train", "--train", train.string(), "--mode", "cascade",
                            "--out", (tmp / "model").string()});
    CHECK(r.code == cli::kExitTraining);
    CHECK(r.err.find("no violent examples") != std::string::npos);
}

TEST_CASE("train with single-class stage 2 exits 3 naming the stage") {
    TempDir tmp("cli");
    std::string tsv = "text\tlabel\n";
    for (int i = 0; i < 4; ++i)
        tsv += "calm text " + std::to_string(i) + "\tNon-Violence\n";
    for (int i = 0; i < 4; ++i)
        tsv += "taunt text " + std::to_string(i) + "\tPassive-Violence\n";
    const auto train = write_file(tmp / "two.tsv", tsv);
    const auto r = run_cli({"train", "--train", train.string(), "--mode", "cascade",
                            "--out", (tmp / "model").string()});
    CHECK(r.code == cli::kExitTraining);
    CHECK(r.err.find("single-class stage 2") != std::string::npos);
}

TEST_CASE("train rejects unknown modes") {
    TempDir tmp("cli");
    const auto train = write_train_tsv(tmp, 6);
    const auto r = run_cli({"train", "--train", train.string(), "--mode", "sideways",
                            "--out", (tmp / "m").string()});
    CHECK(r.code == cli::kExitInput);
}

TEST_CASE("predict with a cascade model emits stage fields in input order") {
    TempDir tmp("cli");
    corpus::save_dataset(test::make_synthetic_corpus(7, 31), tmp / "synth.tsv");
    REQUIRE(run_cli({"train", "--train", (tmp / "synth.tsv").string(), "--mode",
                     "cascade", "--out", (tmp / "model").string()})
                .code == 0);
    const auto input = write_file(tmp / "input.tsv",
                                  "text\n"
                                  "calm peace garden\n"
                                  "strike burn attack\n"
                                  "taunt mock insult\n"
                                  "peace flower gentle\n"
                                  "raid smash strike\n");
    const auto r = run_cli({"predict", "--model", (tmp / "model").string(),
                            "--input", input.string(), "--out",
                            (tmp / "preds.jsonl").string()});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    const auto rows = read_jsonl(tmp / "preds.jsonl");
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].at("id") == "input-" + std::to_string(i));
        CHECK(rows[i].contains("final"));
        CHECK(rows[i].contains("stage1"));
        CHECK(rows[i].contains("stage2"));
        if (rows[i].at("stage1") == 0) CHECK(rows[i].at("stage2").is_null());
    }
    CHECK(rows[0].at("final") == 0);
    CHECK(rows[1].at("final") == 2);
    CHECK(rows[2].at("final") == 1);
}

TEST_CASE("predict with a flat model emits final labels only") {
    TempDir tmp("cli");
    corpus::save_dataset(test::make_synthetic_corpus(5, 77), tmp / "synth.tsv");
    REQUIRE(run_cli({"train", "--train", (tmp / "synth.tsv").string(), "--mode",
                     "flat", "--out", (tmp / "model").string()})
                .code == 0);
    const auto input =
        write_file(tmp / "input.tsv", "text\ncalm peace\nstrike burn\n");
    REQUIRE(run_cli({"predict", "--model", (tmp / "model").string(), "--input",
                     input.string(), "--out", (tmp / "p.jsonl").string()})
                .code == 0);
    const auto rows = read_jsonl(tmp / "p.jsonl");
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.contains("final"));
        CHECK_FALSE(row.contains("stage1"));
    }
}

TEST_CASE("predict with a corrupted manifest exits 4") {
    TempDir tmp("cli");
    corpus::save_dataset(test::make_synthetic_corpus(5, 13), tmp / "synth.tsv");
    REQUIRE(run_cli({"train", "--train", (tmp / "synth.tsv").string(), "--mode",
                     "flat", "--out", (tmp / "model").string()})
                .code == 0);
    write_file(tmp.path() / "model" / "manifest.json", "{broken");
    const auto input = write_file(tmp / "in.tsv", "text\nx\n");
    const auto r = run_cli({"predict", "--model", (tmp / "model").string(),
                            "--input", input.string(), "--out",
                            (tmp / "p.jsonl").string()});
    CHECK(r.code == cli::kExitIntegrity);
}

TEST_CASE("predict with a tampered model file exits 4") {
    TempDir tmp("cli");
    corpus::save_dataset(test::make_synthetic_corpus(5, 14), tmp / "synth.tsv");
    REQUIRE(run_cli({"train", "--train", (tmp / "synth.tsv").string(), "--mode",
                     "flat", "--out", (tmp / "model").string()})
                .code == 0);
    auto blob = test::read_file(tmp.path() / "model" / "model.json");
    blob.replace(blob.find("\"classes\""), 9, "\"clasxes\"");
    write_file(tmp.path() / "model" / "model.json", blob);
    const auto input = write_file(tmp / "in.tsv", "text\nx\n");
    const auto r = run_cli({"predict", "--model", (tmp / "model").string(),
                            "--input", input.string(), "--out",
                            (tmp / "p.jsonl").string()});
    CHECK(r.code == cli::kExitIntegrity);
    CHECK(r.err.find("hash mismatch") != std::string::npos);
}

TEST_CASE("evaluate prints a 4-decimal macro F1 and writes the report bundle") {
    TempDir tmp("cli");
    const auto gold = write_file(tmp / "gold.tsv",
                                 "text\tlabel\n"
                                 "a a a\tNon-Violence\n"
                                 "b b\tPassive-Violence\n"
                                 "c\tDirect-Violence\n");
    std::string jsonl;
    jsonl += R"({"id":"gold-0","final":0})" "\n";
    jsonl += R"({"id":"gold-1","final":1})" "\n";
    jsonl += R"({"id":"gold-2","final":2})" "\n";
    const auto pred = write_file(tmp / "pred.jsonl", jsonl);
    const auto r = run_cli({"evaluate", "--gold", gold.string(), "--pred",
                            pred.string(), "--out", (tmp / "report").string()});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("macro_f1=1.0000") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.path() / "report" / "report.md"));
    CHECK(std::filesystem::exists(tmp.path() / "report" / "report.json"));
    CHECK(std::filesystem::exists(tmp.path() / "report" / "plot_data.csv"));
}

TEST_CASE("evaluate reproduces the 6-pair derived fixture") {
    TempDir tmp("cli");
    std::string tsv = "text\tlabel\n";
    const char* labels[] = {"Non-Violence", "Non-Violence", "Passive-Violence",
                            "Passive-Violence", "Direct-Violence", "Direct-Violence"};
    for (int i = 0; i < 6; ++i)
        tsv += "t" + std::to_string(i) + "\t" + labels[i] + "\n";
    const auto gold = write_file(tmp / "gold.tsv", tsv);
    std::string jsonl;
    const int finals[] = {0, 0, 1, 1, 1, 1};
    for (int i = 0; i < 6; ++i)
        jsonl += nlohmann::json{{"id", "gold-" + std::to_string(i)},
                                {"final", finals[i]}}
                     .dump() +
                 "\n";
    const auto pred = write_file(tmp / "pred.jsonl", jsonl);
    const auto r = run_cli({"evaluate", "--gold", gold.string(), "--pred",
                            pred.string(), "--out", (tmp / "report").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("macro_f1=0.5556") != std::string::npos);
}

TEST_CASE("evaluate exits 5 on id mismatch, listing offenders") {
    TempDir tmp("cli");
    const auto gold = write_file(tmp / "gold.tsv",
                                 "text\tlabel\nx\tNon-Violence\ny\tNon-Violence\n");
    std::string jsonl = R"({"id":"gold-0","final":0})" "\n";
    jsonl += R"({"id":"stray-7","final":0})" "\n";
    const auto pred = write_file(tmp / "pred.jsonl", jsonl);
    const auto r = run_cli({"evaluate", "--gold", gold.string(), "--pred",
                            pred.string(), "--out", (tmp / "report").string()});
    CHECK(r.code == cli::kExitAlignment);
    CHECK(r.err.find("gold-1") != std::string::npos);
    CHECK(r.err.find("stray-7") != std::string::npos);
}

TEST_CASE("analyze-length prints the bucket table and writes CSV") {
    TempDir tmp("cli");
    const auto gold = write_file(tmp / "gold.tsv",
                                 "text\tlabel\n"
                                 "one two three\tNon-Violence\n"
                                 "a b c d e f g h i j k l\tPassive-Violence\n");
    std::string jsonl = R"({"id":"gold-0","final":0})" "\n";
    jsonl += R"({"id":"gold-1","final":1})" "\n";
    const auto pred = write_file(tmp / "pred.jsonl", jsonl);
    const auto r = run_cli({"analyze-length", "--gold", gold.string(), "--pred",
                            pred.string(), "--out", (tmp / "buckets.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("| (0, 10] |") != std::string::npos);
    CHECK(r.out.find("| (10, 20] |") != std::string::npos);
    const auto csv = test::read_file(tmp / "buckets.csv");
    CHECK(csv.find("\"(0, 10]\",10,") != std::string::npos);

    const auto custom = run_cli({"analyze-length", "--gold", gold.string(), "--pred",
                                 pred.string(), "--bins", "5,15"});
    REQUIRE(custom.code == 0);
    CHECK(custom.out.find("| (0, 5] |") != std::string::npos);
    CHECK(custom.out.find("| (5, 15] |") != std::string::npos);
}

TEST_CASE("config files drive commands, flags override, unknown keys fail") {
    TempDir tmp("cli");
    const auto train = write_train_tsv(tmp, 4);
    const nlohmann::json config{
        {"translator", "mock"},
        {"cache_dir", (tmp / "cache").string()},
        {"paths", {{"train", train.string()}}},
        {"augment", {{"similar_langs", {"hi"}}, {"pivot_langs", {"zu"}}}},
    };
    const auto cfg_path = write_file(tmp / "run.json", config.dump());
    const auto r = run_cli({"augment", "--config", cfg_path.string(), "--out",
                            (tmp / "aug").string()});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    // 1 + 1 similar + 1 pivot = 3x
    CHECK(corpus::load_dataset(tmp.path() / "aug" / "train.augmented.tsv", "t", true)
              .size() == 12);

    // flag overrides config: identity translator (and a fresh cache, so the
    // mock-warmed entries cannot be served) leaves texts unchanged
    const auto r2 = run_cli({"augment", "--config", cfg_path.string(), "--translator",
                             "identity", "--cache", (tmp / "cache2").string(),
                             "--out", (tmp / "aug2").string()});
    REQUIRE(r2.code == 0);
    const auto out2 = corpus::load_dataset(tmp.path() / "aug2" / "train.augmented.tsv",
                                           "t", true);
    for (const auto& ex : out2.examples)
        CHECK(ex.text.find("\xC2\xA7") == std::string::npos);

    nlohmann::json bad = config;
    bad["turbo"] = true;
    const auto bad_path = write_file(tmp / "bad.json", bad.dump());
    const auto r3 =
        run_cli({"augment", "--config", bad_path.string(), "--out",
                 (tmp / "aug3").string()});
    CHECK(r3.code == cli::kExitInput);
    CHECK(r3.err.find("turbo") != std::string::npos);

    nlohmann::json nested = config;
    nested["tfidf"] = {{"min_df", 1}, {"stemming", true}};
    const auto nested_path = write_file(tmp / "nested.json", nested.dump());
    CHECK(run_cli({"augment", "--config", nested_path.string(), "--out",
                   (tmp / "aug4").string()})
              .code == cli::kExitInput);
}

TEST_CASE("self-transfer training works through the CLI") {
    TempDir tmp("cli");
    corpus::save_dataset(test::make_synthetic_corpus(5, 3), tmp / "synth.tsv");
    const auto r = run_cli({"train", "--train", (tmp / "synth.tsv").string(),
                            "--mode", "self-transfer", "--translator", "identity",
                            "--cache", (tmp / "cache").string(), "--out",
                            (tmp / "model").string()});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    const auto manifest =
        nlohmann::json::parse(test::read_file(tmp.path() / "model" / "manifest.json"));
    CHECK(manifest.at("mode") == "self-transfer");
    CHECK(std::filesystem::exists(tmp.path() / "model" / "model.json"));
}

TEST_CASE("external stages can be trained against and used for prediction") {
    TempDir tmp("cli");
    corpus::save_dataset(test::make_synthetic_corpus(5, 17), tmp / "synth.tsv");
    // stage 2 delegated to a subprocess that always answers Direct-Violence
    const std::string endpoint =
        "external:cmd:python3 -c \"import sys, json; "
        "req = json.loads(sys.stdin.readline()); "
        "print(json.dumps({'labels': [2] * len(req['texts'])}))\"";
    const auto r = run_cli({"train", "--train", (tmp / "synth.tsv").string(),
                            "--mode", "cascade", "--model2", endpoint, "--out",
                            (tmp / "model").string()});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);

    const auto input = write_file(tmp / "in.tsv", "text\nstrike burn attack\n");
    const auto p = run_cli({"predict", "--model", (tmp / "model").string(),
                            "--input", input.string(), "--out",
                            (tmp / "p.jsonl").string()});
    CAPTURE(p.err);
    REQUIRE(p.code == 0);
    const auto rows = read_jsonl(tmp / "p.jsonl");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].at("stage1") == 1);
    CHECK(rows[0].at("final") == 2);
}

TEST_CASE("the built binary wires everything together") {
    TempDir tmp("cli");
    const auto train = write_train_tsv(tmp, 6);
    auto r = run_binary("augment --train " + train.string() + " --cache " +
                        (tmp / "cache").string() + " --out " + (tmp / "aug").string());
    CAPTURE(r.out);
    REQUIRE(r.code == 0);

    corpus::save_dataset(test::make_synthetic_corpus(7, 911), tmp / "synth.tsv");
    r = run_binary("train --train " + (tmp / "synth.tsv").string() +
                   " --mode cascade --out " + (tmp / "model").string());
    REQUIRE(r.code == 0);

    corpus::save_dataset(test::make_synthetic_corpus(4, 912), tmp / "eval.tsv");
    r = run_binary("predict --model " + (tmp / "model").string() + " --input " +
                   (tmp / "eval.tsv").string() + " --out " + (tmp / "p.jsonl").string());
    REQUIRE(r.code == 0);

    r = run_binary("evaluate --gold " + (tmp / "eval.tsv").string() + " --pred " +
                   (tmp / "p.jsonl").string() + " --out " + (tmp / "report").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("macro_f1=") != std::string::npos);

    // process-level exit codes
    CHECK(run_binary("train --train /missing.tsv --out " + (tmp / "m2").string())
              .code == 2);
    CHECK(run_binary("predict --model " + (tmp / "nomodel").string() + " --input " +
                     (tmp / "eval.tsv").string() + " --out " + (tmp / "x.jsonl").string())
              .code == 4);
    CHECK(run_binary("--help").code == 0);
    CHECK(run_binary("bogus-subcommand").code == 2);
}

TEST_CASE("live translator without TRANSLATE_API_URL exits 2") {
    TempDir tmp("cli");
    const auto train = write_train_tsv(tmp, 2);
    unsetenv("TRANSLATE_API_URL");
    const auto r = run_cli({"augment", "--train", train.string(), "--translator",
                            "live", "--cache", (tmp / "cache").string(), "--out",
                            (tmp / "aug").string()});
    CHECK(r.code == cli::kExitInput);
    CHECK(r.err.find("TRANSLATE_API_URL") != std::string::npos);
}

TEST_CASE("bad flags and unparsable bins exit 2") {
    CHECK(run_cli({"train"}).code == cli::kExitInput);  // missing required --out
    TempDir tmp("cli");
    const auto gold = write_file(tmp / "g.tsv", "text\tlabel\nx\tNon-Violence\n");
    const auto pred = write_file(tmp / "p.jsonl", R"({"id":"g-0","final":0})" "\n");
    const auto r = run_cli({"analyze-length", "--gold", gold.string(), "--pred",
                            pred.string(), "--bins", "10,5"});
    CHECK(r.code == cli::kExitInput);
}
