#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vitd/augment.hpp"
#include "vitd/cascade.hpp"
#include "vitd/corpus.hpp"
#include "vitd/errors.hpp"
#include "vitd/eval.hpp"
#include "vitd/hash.hpp"
#include "vitd/models.hpp"
#include "vitd/textproc.hpp"
#include "vitd/translate_http.hpp"

// Command-line surface: augment, train, predict, evaluate, analyze-length.
// Commands are driven by a declarative JSON config plus flag overrides
// (flags win). Everything a command writes is reproducible byte for byte;
// manifest timestamps live in their own fields.

namespace vitd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitTraining = 3;
inline constexpr int kExitIntegrity = 4;
inline constexpr int kExitAlignment = 5;

struct RunConfig {
    textproc::TfidfConfig tfidf;
    models::TrainConfig train1;       // flat model / stage 1
    models::TrainConfig train2;       // stage 2
    augment::AugmentConfig aug;
    bool include_dev = false;
    std::string translator = "mock";  // live | mock | identity
    std::filesystem::path cache_dir = ".vitd-cache";
    std::optional<std::filesystem::path> train_path;
    std::optional<std::filesystem::path> dev_path;
    std::optional<std::filesystem::path> test_path;
    std::string mode = "cascade";     // flat | cascade | self-transfer
    std::string model1 = "logreg";
    std::string model2 = "logreg";
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw InputError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read_if(const nlohmann::json& obj, const char* key, T& slot) {
    if (obj.contains(key) && !obj.at(key).is_null()) slot = obj.at(key).get<T>();
}

inline void parse_train_section(const nlohmann::json& obj, const std::string& where,
                                models::TrainConfig& cfg) {
    reject_unknown_keys(obj, {"learning_rate", "epochs", "l2_lambda", "tolerance"},
                        where);
    read_if(obj, "learning_rate", cfg.learning_rate);
    read_if(obj, "epochs", cfg.epochs);
    read_if(obj, "l2_lambda", cfg.l2_lambda);
    read_if(obj, "tolerance", cfg.tolerance);
}

}  // namespace detail

// Strict parse: unknown keys anywhere are errors.
inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        detail::reject_unknown_keys(
            j,
            {"tfidf", "train", "train_stage2", "augment", "translator", "cache_dir",
             "paths", "mode", "model1", "model2"},
            "config root");
        if (j.contains("tfidf")) {
            const auto& t = j.at("tfidf");
            detail::reject_unknown_keys(
                t, {"min_df", "max_features", "lowercase", "sublinear_tf"}, "tfidf");
            detail::read_if(t, "min_df", cfg.tfidf.min_df);
            if (t.contains("max_features") && !t.at("max_features").is_null())
                cfg.tfidf.max_features = t.at("max_features").get<std::size_t>();
            detail::read_if(t, "lowercase", cfg.tfidf.lowercase);
            detail::read_if(t, "sublinear_tf", cfg.tfidf.sublinear_tf);
        }
        if (j.contains("train"))
            detail::parse_train_section(j.at("train"), "train", cfg.train1);
        cfg.train2 = cfg.train1;
        if (j.contains("train_stage2"))
            detail::parse_train_section(j.at("train_stage2"), "train_stage2",
                                        cfg.train2);
        if (j.contains("augment")) {
            const auto& a = j.at("augment");
            detail::reject_unknown_keys(a,
                                        {"source_lang", "similar_langs", "pivot_langs",
                                         "dedup", "max_concurrency", "include_dev",
                                         "retry_base_delay_ms"},
                                        "augment");
            detail::read_if(a, "source_lang", cfg.aug.source_lang);
            detail::read_if(a, "similar_langs", cfg.aug.similar_langs);
            detail::read_if(a, "pivot_langs", cfg.aug.pivot_langs);
            detail::read_if(a, "dedup", cfg.aug.dedup);
            detail::read_if(a, "max_concurrency", cfg.aug.max_concurrency);
            detail::read_if(a, "include_dev", cfg.include_dev);
            if (a.contains("retry_base_delay_ms"))
                cfg.aug.retry.base_delay =
                    std::chrono::milliseconds(a.at("retry_base_delay_ms").get<int>());
        }
        detail::read_if(j, "translator", cfg.translator);
        if (j.contains("cache_dir"))
            cfg.cache_dir = j.at("cache_dir").get<std::string>();
        if (j.contains("paths")) {
            const auto& p = j.at("paths");
            detail::reject_unknown_keys(p, {"train", "dev", "test"}, "paths");
            if (p.contains("train")) cfg.train_path = p.at("train").get<std::string>();
            if (p.contains("dev")) cfg.dev_path = p.at("dev").get<std::string>();
            if (p.contains("test")) cfg.test_path = p.at("test").get<std::string>();
        }
        detail::read_if(j, "mode", cfg.mode);
        detail::read_if(j, "model1", cfg.model1);
        detail::read_if(j, "model2", cfg.model2);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config file " + path.string() + " is not valid JSON: " +
                         e.what());
    }
    return parse_run_config(j);
}

// Canonical form of the effective configuration; hashed into manifests.
inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
    const auto train_json = [](const models::TrainConfig& t) {
        return nlohmann::json{{"learning_rate", t.learning_rate},
                              {"epochs", t.epochs},
                              {"l2_lambda", t.l2_lambda},
                              {"tolerance", t.tolerance}};
    };
    return nlohmann::json{
        {"tfidf",
         {{"min_df", cfg.tfidf.min_df},
          {"max_features", cfg.tfidf.max_features
                               ? nlohmann::json(*cfg.tfidf.max_features)
                               : nlohmann::json(nullptr)},
          {"lowercase", cfg.tfidf.lowercase},
          {"sublinear_tf", cfg.tfidf.sublinear_tf}}},
        {"train", train_json(cfg.train1)},
        {"train_stage2", train_json(cfg.train2)},
        {"augment",
         {{"source_lang", cfg.aug.source_lang},
          {"similar_langs", cfg.aug.similar_langs},
          {"pivot_langs", cfg.aug.pivot_langs},
          {"dedup", cfg.aug.dedup},
          {"max_concurrency", cfg.aug.max_concurrency},
          {"include_dev", cfg.include_dev}}},
        {"translator", cfg.translator},
        {"mode", cfg.mode},
        {"model1", cfg.model1},
        {"model2", cfg.model2},
    };
}

inline std::string config_hash(const RunConfig& cfg) {
    return hash::sha256_hex(run_config_to_json(cfg).dump());
}

namespace detail {

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::unique_ptr<augment::Translator> make_translator(const RunConfig& cfg) {
    if (cfg.translator == "mock") return std::make_unique<augment::MockTranslator>();
    if (cfg.translator == "identity")
        return std::make_unique<augment::IdentityTranslator>();
    if (cfg.translator == "live")
        return std::make_unique<augment::HttpTranslator>(
            augment::HttpTranslator::from_env());
    throw InputError("unknown translator '" + cfg.translator +
                     "' (expected live, mock, or identity)");
}

inline void require_file(const std::optional<std::filesystem::path>& path,
                         const char* what) {
    if (!path) throw InputError(std::string("no ") + what + " file given");
    if (!std::filesystem::exists(*path))
        throw InputError(std::string(what) + " file not found: " + path->string());
}

inline std::string stem_of(const std::filesystem::path& p) {
    auto s = p.stem().string();
    return s.empty() ? "data" : s;
}

struct PredRow {
    std::string id;
    int final_label = 0;
};

inline std::vector<PredRow> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open predictions file: " + path.string());
    std::vector<PredRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            rows.push_back({j.at("id").get<std::string>(), j.at("final").get<int>()});
        } catch (const nlohmann::json::exception& e) {
            throw InputError(path.string() + ": line " + std::to_string(line_no) +
                             ": bad prediction row: " + e.what());
        }
    }
    return rows;
}

// Gold-order final labels; throws AlignmentError naming up to five
// missing/extra/duplicate ids.
inline std::vector<int> align_predictions(const corpus::Dataset& gold,
                                          const std::vector<PredRow>& preds) {
    std::unordered_map<std::string, int> by_id;
    std::vector<std::string> offending;
    for (const auto& row : preds) {
        if (!by_id.emplace(row.id, row.final_label).second)
            offending.push_back(row.id + " (duplicate)");
    }
    std::unordered_set<std::string> gold_ids;
    std::vector<int> aligned;
    aligned.reserve(gold.size());
    for (const auto& ex : gold.examples) {
        gold_ids.insert(ex.id);
        const auto it = by_id.find(ex.id);
        if (it == by_id.end()) {
            offending.push_back(ex.id + " (missing prediction)");
        } else {
            aligned.push_back(it->second);
        }
    }
    for (const auto& row : preds) {
        if (!gold_ids.count(row.id)) offending.push_back(row.id + " (no gold row)");
    }
    if (!offending.empty()) {
        std::string msg = "gold/prediction id mismatch; offending ids:";
        for (std::size_t i = 0; i < offending.size() && i < 5; ++i)
            msg += " " + offending[i] + (i + 1 < std::min<std::size_t>(offending.size(), 5)
                                             ? ","
                                             : "");
        if (offending.size() > 5)
            msg += " (and " + std::to_string(offending.size() - 5) + " more)";
        throw AlignmentError(msg);
    }
    return aligned;
}

}  // namespace detail

// augment: build the combined dataset and write it plus a manifest.
inline void cmd_augment(const RunConfig& cfg, const std::filesystem::path& out_dir,
                        std::ostream& out) {
    detail::require_file(cfg.train_path, "train");
    if (cfg.include_dev) detail::require_file(cfg.dev_path, "dev");
    std::filesystem::create_directories(out_dir);

    const auto translator = detail::make_translator(cfg);
    augment::TranslationCache cache(cfg.cache_dir);
    const auto started = std::chrono::steady_clock::now();

    nlohmann::json splits = nlohmann::json::object();
    const auto augment_split = [&](const std::filesystem::path& path,
                                   const std::string& split) {
        const auto ds = corpus::load_dataset(path, split, /*has_labels=*/true);
        const auto combined =
            augment::build_combined_dataset(ds, cfg.aug, *translator, cache);
        const auto out_path = out_dir / (split + ".augmented.tsv");
        corpus::save_dataset(combined, out_path);

        std::map<std::string, std::size_t> translated;
        std::map<std::string, std::size_t> backtranslated;
        std::size_t original = 0;
        for (const auto& ex : combined.examples) {
            switch (ex.provenance.kind) {
                case corpus::Provenance::Kind::Original: ++original; break;
                case corpus::Provenance::Kind::Translated:
                    ++translated[ex.provenance.lang];
                    break;
                case corpus::Provenance::Kind::Backtranslated:
                    ++backtranslated[ex.provenance.lang];
                    break;
            }
        }
        const std::size_t expected =
            ds.size() * (1 + cfg.aug.similar_langs.size() + cfg.aug.pivot_langs.size());
        splits[split] = {{"input_rows", ds.size()},
                         {"output_rows", combined.size()},
                         {"dedup_dropped", expected - combined.size()},
                         {"original", original},
                         {"translated", translated},
                         {"backtranslated", backtranslated},
                         {"file", out_path.filename().string()}};
        out << split << ": " << ds.size() << " -> " << combined.size() << " rows ("
            << out_path.string() << ")\n";
    };

    augment_split(*cfg.train_path, detail::stem_of(*cfg.train_path));
    if (cfg.include_dev) augment_split(*cfg.dev_path, detail::stem_of(*cfg.dev_path));

    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    const std::size_t lookups = cache.hits() + cache.misses();
    const nlohmann::json manifest{
        {"schema", "vitd.augment/1"},
        {"splits", splits},
        {"cache",
         {{"hits", cache.hits()},
          {"misses", cache.misses()},
          {"hit_ratio", lookups == 0
                            ? 1.0
                            : static_cast<double>(cache.hits()) /
                                  static_cast<double>(lookups)}}},
        {"config_hash", config_hash(cfg)},
        {"data_hash", hash::sha256_file(*cfg.train_path)},
        {"wall_time_ms", wall_ms},
        {"created_at", detail::iso_timestamp()},
    };
    cascade::detail::write_file(out_dir / "augment_manifest.json",
                                manifest.dump(2) + "\n");
}

// train: flat | cascade | self-transfer, written as a model directory.
inline void cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir,
                      std::ostream& out) {
    detail::require_file(cfg.train_path, "train");
    std::filesystem::create_directories(out_dir);
    const auto ds = corpus::load_dataset(*cfg.train_path,
                                         detail::stem_of(*cfg.train_path),
                                         /*has_labels=*/true);
    const nlohmann::json extra{
        {"config_hash", config_hash(cfg)},
        {"data_hash", hash::sha256_file(*cfg.train_path)},
        {"created_at", detail::iso_timestamp()},
    };

    if (cfg.mode == "cascade") {
        const auto model = cascade::train_cascade(
            ds, cascade::StageSpec::parse(cfg.model1),
            cascade::StageSpec::parse(cfg.model2), cfg.train1, cfg.train2, cfg.tfidf);
        cascade::save_cascade(model, out_dir, extra);
    } else if (cfg.mode == "flat") {
        const auto spec = cascade::StageSpec::parse(cfg.model1);
        const auto stage = cascade::train_stage(ds, spec, cfg.tfidf, cfg.train1);
        cascade::save_flat(stage, "flat", cfg.train1, cfg.tfidf, out_dir, extra);
    } else if (cfg.mode == "self-transfer") {
        const auto translator = detail::make_translator(cfg);
        augment::TranslationCache cache(cfg.cache_dir);
        const auto stage = cascade::self_transfer_train(
            ds, *translator, cache, cascade::StageSpec::parse(cfg.model1), cfg.train1,
            cfg.tfidf, cfg.aug);
        cascade::save_flat(cascade::Stage{stage}, "self-transfer", cfg.train1,
                           cfg.tfidf, out_dir, extra);
    } else {
        throw InputError("unknown mode '" + cfg.mode +
                         "' (expected flat, cascade, or self-transfer)");
    }
    out << "model written to " << out_dir.string() << "\n";
}

// predict: one JSONL row per input row, in input order.
inline void cmd_predict(const std::filesystem::path& model_dir,
                        const std::filesystem::path& input_path,
                        const std::filesystem::path& out_path, std::ostream& out) {
    if (!std::filesystem::exists(input_path))
        throw InputError("input file not found: " + input_path.string());
    const auto manifest = cascade::load_manifest(model_dir);
    const auto ds = corpus::load_dataset(input_path, detail::stem_of(input_path),
                                         /*has_labels=*/false);
    std::vector<std::string> texts;
    texts.reserve(ds.size());
    for (const auto& ex : ds.examples) texts.push_back(ex.text);

    std::string mode;
    try {
        mode = manifest.at("mode").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ModelIntegrityError(std::string("corrupt model manifest: ") + e.what());
    }

    std::ofstream sink(out_path, std::ios::binary);
    if (!sink) throw InputError("cannot write predictions file: " + out_path.string());
    if (mode == "cascade") {
        const auto model = cascade::load_cascade(model_dir);
        const auto preds = cascade::predict_cascade(model, texts);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const nlohmann::json row{
                {"id", ds.examples[i].id},
                {"final", preds[i].final_label},
                {"stage1", preds[i].stage1},
                {"stage2", preds[i].stage2 ? nlohmann::json(*preds[i].stage2)
                                           : nlohmann::json(nullptr)},
            };
            sink << row.dump() << "\n";
        }
    } else {
        const auto stage = cascade::load_flat(model_dir);
        const auto labels =
            cascade::stage_predictor(stage, corpus::kAllLabelCodes)(texts);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            sink << nlohmann::json{{"id", ds.examples[i].id}, {"final", labels[i]}}
                        .dump()
                 << "\n";
        }
    }
    if (!sink) throw InputError("write failed: " + out_path.string());
    out << ds.size() << " predictions written to " << out_path.string() << "\n";
}

// evaluate: report bundle + "macro_f1=<4 decimals>" on stdout.
inline void cmd_evaluate(const std::filesystem::path& gold_path,
                         const std::filesystem::path& pred_path,
                         const std::filesystem::path& out_dir, std::ostream& out) {
    if (!std::filesystem::exists(gold_path))
        throw InputError("gold file not found: " + gold_path.string());
    const auto gold = corpus::load_dataset(gold_path, detail::stem_of(gold_path),
                                           /*has_labels=*/true);
    const auto preds = detail::load_predictions(pred_path);
    const auto aligned = detail::align_predictions(gold, preds);

    std::vector<int> gold_labels;
    gold_labels.reserve(gold.size());
    for (const auto& ex : gold.examples) gold_labels.push_back(*ex.label);

    const auto cm =
        eval::confusion_matrix(gold_labels, aligned, corpus::kAllLabelCodes);
    const auto metrics = eval::per_class_metrics(cm);
    const auto buckets = eval::length_bucket_analysis(gold.examples, aligned);
    eval::emit_report(cm, metrics, buckets, out_dir);

    double macro = 0.0;
    for (const auto& m : metrics) macro += m.f1;
    macro /= static_cast<double>(metrics.size());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", macro);
    out << "macro_f1=" << buf << "\n";
}

// analyze-length: the bucket table alone, on stdout (optional CSV).
inline void cmd_analyze_length(const std::filesystem::path& gold_path,
                               const std::filesystem::path& pred_path,
                               const std::vector<std::size_t>& edges,
                               const std::optional<std::filesystem::path>& csv_out,
                               std::ostream& out) {
    if (!std::filesystem::exists(gold_path))
        throw InputError("gold file not found: " + gold_path.string());
    const auto gold = corpus::load_dataset(gold_path, detail::stem_of(gold_path),
                                           /*has_labels=*/true);
    const auto preds = detail::load_predictions(pred_path);
    const auto aligned = detail::align_predictions(gold, preds);

    auto bins = eval::kDefaultLengthBins;
    if (!edges.empty()) {
        bins.clear();
        std::size_t lower = 0;
        for (const auto edge : edges) {
            if (edge <= lower)
                throw InputError("bin edges must be strictly increasing");
            bins.emplace_back(lower, edge);
            lower = edge;
        }
    }
    const auto rows = eval::length_bucket_analysis(gold.examples, aligned, bins);

    out << "| bucket | macro_f1 | count | percentage |\n";
    out << "|---|---:|---:|---:|\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.4f", row.macro_f1);
        out << "| " << row.label << " | " << buf << " | " << row.count << " | ";
        std::snprintf(buf, sizeof(buf), "%.3f", row.percentage);
        out << buf << " |\n";
    }

    if (csv_out) {
        std::string csv = "bucket_label,upper_edge,macro_f1,count,percentage\n";
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof(buf), "%.4f", row.macro_f1);
            csv += "\"" + row.label + "\"," +
                   (row.upper ? std::to_string(*row.upper) : "inf") + "," + buf + ",";
            csv += std::to_string(row.count) + ",";
            std::snprintf(buf, sizeof(buf), "%.3f", row.percentage);
            csv += std::string(buf) + "\n";
        }
        cascade::detail::write_file(*csv_out, csv);
    }
}

// Full argument-to-exit-code surface; tests drive this in-process.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"violence-inciting text detection pipeline", "vitd"};
    app.require_subcommand(1);

    std::string config_path;
    std::string train_file;
    std::string dev_file;
    std::string test_file;
    std::string mode;
    std::string model1;
    std::string model2;
    std::string translator;
    std::string cache_dir;
    std::string out_arg;
    std::string model_dir;
    std::string input_file;
    std::string gold_file;
    std::string pred_file;
    std::string bins_arg;
    bool include_dev = false;
    int seed = 0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration");
        cmd->add_option("--seed", seed,
                        "reserved; the pipeline is deterministic without it");
    };
    const auto add_data_opts = [&](CLI::App* cmd) {
        cmd->add_option("--train", train_file, "train TSV");
        cmd->add_option("--dev", dev_file, "dev TSV");
        cmd->add_option("--test", test_file, "test TSV");
        cmd->add_option("--translator", translator, "live | mock | identity");
        cmd->add_option("--cache", cache_dir, "translation cache directory");
    };

    auto* augment_cmd = app.add_subcommand("augment", "build the combined dataset");
    add_common(augment_cmd);
    add_data_opts(augment_cmd);
    augment_cmd->add_flag("--include-dev", include_dev, "also augment the dev split");
    augment_cmd->add_option("--out", out_arg, "output directory")->required();

    auto* train_cmd = app.add_subcommand("train", "train a model");
    add_common(train_cmd);
    add_data_opts(train_cmd);
    train_cmd->add_option("--mode", mode, "flat | cascade | self-transfer");
    train_cmd->add_option("--model1", model1, "logreg | svm | external:<endpoint>");
    train_cmd->add_option("--model2", model2, "logreg | svm | external:<endpoint>");
    train_cmd->add_option("--out", out_arg, "model output directory")->required();

    auto* predict_cmd = app.add_subcommand("predict", "label a dataset");
    add_common(predict_cmd);
    predict_cmd->add_option("--model", model_dir, "model directory")->required();
    predict_cmd->add_option("--input", input_file, "input TSV")->required();
    predict_cmd->add_option("--out", out_arg, "predictions JSONL path")->required();

    auto* eval_cmd = app.add_subcommand("evaluate", "score predictions");
    add_common(eval_cmd);
    eval_cmd->add_option("--gold", gold_file, "labeled gold TSV")->required();
    eval_cmd->add_option("--pred", pred_file, "predictions JSONL")->required();
    eval_cmd->add_option("--out", out_arg, "report output directory")->required();

    auto* len_cmd = app.add_subcommand("analyze-length", "length-bucket analysis");
    add_common(len_cmd);
    len_cmd->add_option("--gold", gold_file, "labeled gold TSV")->required();
    len_cmd->add_option("--pred", pred_file, "predictions JSONL")->required();
    len_cmd->add_option("--bins", bins_arg, "comma-separated upper edges");
    len_cmd->add_option("--out", out_arg, "optional CSV output path");

    try {
        args.insert(args.begin(), "vitd");
        std::vector<const char*> argv;
        argv.reserve(args.size());
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError& e) {
            app.exit(e, out, err);
            return kExitInput;
        }

        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);
        if (!train_file.empty()) cfg.train_path = train_file;
        if (!dev_file.empty()) cfg.dev_path = dev_file;
        if (!test_file.empty()) cfg.test_path = test_file;
        if (!mode.empty()) cfg.mode = mode;
        if (!model1.empty()) cfg.model1 = model1;
        if (!model2.empty()) cfg.model2 = model2;
        if (!translator.empty()) cfg.translator = translator;
        if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
        if (include_dev) cfg.include_dev = true;

        if (augment_cmd->parsed()) {
            cmd_augment(cfg, out_arg, out);
        } else if (train_cmd->parsed()) {
            cmd_train(cfg, out_arg, out);
        } else if (predict_cmd->parsed()) {
            cmd_predict(model_dir, input_file, out_arg, out);
        } else if (eval_cmd->parsed()) {
            cmd_evaluate(gold_file, pred_file, out_arg, out);
        } else if (len_cmd->parsed()) {
            std::vector<std::size_t> edges;
            if (!bins_arg.empty()) {
                std::stringstream ss(bins_arg);
                std::string piece;
                while (std::getline(ss, piece, ','))
                    edges.push_back(std::stoull(piece));
            }
            cmd_analyze_length(gold_file, pred_file, edges,
                               out_arg.empty()
                                   ? std::nullopt
                                   : std::optional<std::filesystem::path>(out_arg),
                               out);
        }
        return kExitOk;
    } catch (const TrainingError& e) {
        err << "error: " << e.what() << "\n";
        return kExitTraining;
    } catch (const ModelIntegrityError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIntegrity;
    } catch (const AlignmentError& e) {
        err << "error: " << e.what() << "\n";
        return kExitAlignment;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const TranslationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "unexpected error: " << e.what() << "\n";
        return kExitUnexpected;
    }
}

}  // namespace vitd::cli
