#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "vitd/augment.hpp"
#include "vitd/corpus.hpp"
#include "vitd/errors.hpp"
#include "vitd/external.hpp"
#include "vitd/hash.hpp"
#include "vitd/models.hpp"
#include "vitd/textproc.hpp"

// Two-step classification: relabel the corpus into the binary and
// violent-only datasets, train one model per stage, and merge stage
// predictions back into input order at inference time.

namespace vitd::cascade {

// Stage backed by the built-in linear models.
struct LinearStage {
    textproc::TfidfModel vectorizer;
    models::LinearModel model;
};

// Stage delegated to an externally trained classifier.
struct ExternalStage {
    std::string endpoint;  // http(s)://... or cmd:...
};

using Stage = std::variant<LinearStage, ExternalStage>;

struct StageSpec {
    enum class Kind { LogReg, Svm, External };
    Kind kind = Kind::LogReg;
    std::string endpoint;

    static StageSpec parse(const std::string& s) {
        if (s == "logreg") return {Kind::LogReg, ""};
        if (s == "svm") return {Kind::Svm, ""};
        if (s.starts_with("external:")) return {Kind::External, s.substr(9)};
        throw InputError("unknown model spec '" + s +
                         "' (expected logreg, svm, or external:<endpoint>)");
    }
};

struct CascadeModel {
    Stage stage1;  // Violent-vs-NonViolent, classes {0, 1}
    Stage stage2;  // Passive-vs-Direct, classes {1, 2}
    models::TrainConfig cfg1;
    models::TrainConfig cfg2;
    textproc::TfidfConfig tfidf_config;
};

struct CascadePrediction {
    int final_label = 0;         // three-way Label code
    int stage1 = 0;              // BinaryLabel code
    std::optional<int> stage2;   // present iff stage1 == Violent
};

// Labels mapped 0->0, 1->1, 2->1; texts and order untouched.
inline corpus::Dataset make_binary_dataset(const corpus::Dataset& ds) {
    corpus::Dataset out = ds;
    for (auto& ex : out.examples) {
        if (!ex.label)
            throw InputError("make_binary_dataset: unlabeled example '" + ex.id + "'");
        ex.label = *ex.label == 0 ? 0 : 1;
    }
    return out;
}

// Keeps only examples labeled PassiveViolence or DirectViolence, in their
// original relative order, labels unchanged.
inline corpus::Dataset make_violent_only_dataset(const corpus::Dataset& ds) {
    corpus::Dataset out;
    out.name = ds.name;
    for (const auto& ex : ds.examples) {
        if (!ex.label)
            throw InputError("make_violent_only_dataset: unlabeled example '" +
                             ex.id + "'");
        if (*ex.label == 1 || *ex.label == 2) out.examples.push_back(ex);
    }
    if (out.examples.empty())
        throw TrainingError("no violent examples: stage 2 is untrainable");
    return out;
}

namespace detail {

inline std::vector<textproc::SparseVector> transform_all(
    const textproc::TfidfModel& vec, const corpus::Dataset& ds) {
    std::vector<textproc::SparseVector> X;
    X.reserve(ds.size());
    for (const auto& ex : ds.examples) X.push_back(textproc::transform(vec, ex.text));
    return X;
}

inline std::vector<int> labels_of(const corpus::Dataset& ds) {
    std::vector<int> y;
    y.reserve(ds.size());
    for (const auto& ex : ds.examples) y.push_back(ex.label.value());
    return y;
}

}  // namespace detail

// Fits a TF-IDF model on `ds` and trains one linear model on it; external
// specs just record the endpoint.
inline Stage train_stage(const corpus::Dataset& ds, const StageSpec& spec,
                         const textproc::TfidfConfig& tfidf_cfg,
                         const models::TrainConfig& cfg) {
    if (spec.kind == StageSpec::Kind::External) return ExternalStage{spec.endpoint};
    const auto vec = textproc::fit_tfidf(ds, tfidf_cfg);
    const auto X = detail::transform_all(vec, ds);
    const auto y = detail::labels_of(ds);
    auto model = spec.kind == StageSpec::Kind::LogReg ? models::train_logreg(X, y, cfg)
                                                      : models::train_svm(X, y, cfg);
    return LinearStage{vec, std::move(model)};
}

// Batch label function for one stage; external responses are validated
// against `expected_labels`.
inline std::function<std::vector<int>(const std::vector<std::string>&)>
stage_predictor(const Stage& stage, std::vector<int> expected_labels) {
    if (const auto* linear = std::get_if<LinearStage>(&stage)) {
        return [linear](const std::vector<std::string>& texts) {
            std::vector<int> labels;
            labels.reserve(texts.size());
            for (const auto& text : texts) {
                const auto x = textproc::transform(linear->vectorizer, text);
                labels.push_back(models::predict(linear->model, x).label);
            }
            return labels;
        };
    }
    const auto& endpoint = std::get<ExternalStage>(stage).endpoint;
    return [endpoint, expected = std::move(expected_labels)](
               const std::vector<std::string>& texts) {
        const auto classifier = models::make_external_classifier(endpoint);
        return models::predict_external(*classifier, texts, expected);
    };
}

// The merge rule: stage1 labels everything, texts it calls Violent go to
// stage2 (one batch), and the final labels come back in input order. stage2
// is never invoked when nothing routes to it.
inline std::vector<CascadePrediction> route_two_step(
    const std::function<std::vector<int>(const std::vector<std::string>&)>& stage1,
    const std::function<std::vector<int>(const std::vector<std::string>&)>& stage2,
    const std::vector<std::string>& texts) {
    std::vector<CascadePrediction> preds(texts.size());
    if (texts.empty()) return preds;

    const auto binary = stage1(texts);
    if (binary.size() != texts.size())
        throw Error("stage 1 returned " + std::to_string(binary.size()) +
                    " labels for " + std::to_string(texts.size()) + " texts");

    std::vector<std::size_t> violent_idx;
    std::vector<std::string> violent_texts;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (binary[i] != 0 && binary[i] != 1)
            throw Error("stage 1 produced non-binary label " +
                        std::to_string(binary[i]));
        preds[i].stage1 = binary[i];
        if (binary[i] == 1) {
            violent_idx.push_back(i);
            violent_texts.push_back(texts[i]);
        } else {
            preds[i].final_label = 0;
        }
    }

    if (!violent_idx.empty()) {
        const auto types = stage2(violent_texts);
        if (types.size() != violent_texts.size())
            throw Error("stage 2 returned " + std::to_string(types.size()) +
                        " labels for " + std::to_string(violent_texts.size()) +
                        " texts");
        for (std::size_t k = 0; k < violent_idx.size(); ++k) {
            if (types[k] != 1 && types[k] != 2)
                throw Error("stage 2 produced label " + std::to_string(types[k]) +
                            " outside {1, 2}");
            preds[violent_idx[k]].stage2 = types[k];
            preds[violent_idx[k]].final_label = types[k];
        }
    }
    return preds;
}

// Trains stage 1 on the binary relabeling of `new_dataset` and stage 2 on
// its violent-only subset, each with its own TF-IDF fit on its own texts.
inline CascadeModel train_cascade(const corpus::Dataset& new_dataset,
                                  const StageSpec& spec1, const StageSpec& spec2,
                                  const models::TrainConfig& cfg1,
                                  const models::TrainConfig& cfg2,
                                  const textproc::TfidfConfig& tfidf_cfg = {}) {
    if (new_dataset.examples.empty())
        throw TrainingError("train_cascade: empty dataset");

    std::size_t non_violent = 0;
    std::size_t passive = 0;
    std::size_t direct = 0;
    for (const auto& ex : new_dataset.examples) {
        if (!ex.label)
            throw InputError("train_cascade: unlabeled example '" + ex.id + "'");
        if (*ex.label == 0) ++non_violent;
        else if (*ex.label == 1) ++passive;
        else ++direct;
    }
    const bool train1 = spec1.kind != StageSpec::Kind::External;
    const bool train2 = spec2.kind != StageSpec::Kind::External;
    if (train1 || train2) {
        if (passive + direct == 0)
            throw TrainingError("no violent examples: stage 2 is untrainable and "
                                "stage 1 is single-class");
        if (train1 && non_violent == 0)
            throw TrainingError("single-class stage 1: every example is violent");
        if (train2 && (passive == 0 || direct == 0))
            throw TrainingError("single-class stage 2: need both Passive-Violence "
                                "and Direct-Violence examples");
    }

    CascadeModel model;
    model.cfg1 = cfg1;
    model.cfg2 = cfg2;
    model.tfidf_config = tfidf_cfg;
    model.stage1 = train_stage(make_binary_dataset(new_dataset), spec1, tfidf_cfg, cfg1);
    model.stage2 =
        train_stage(make_violent_only_dataset(new_dataset), spec2, tfidf_cfg, cfg2);
    return model;
}

inline std::vector<CascadePrediction> predict_cascade(
    const CascadeModel& model, const std::vector<std::string>& texts) {
    return route_two_step(stage_predictor(model.stage1, {0, 1}),
                          stage_predictor(model.stage2, {1, 2}), texts);
}

// Self-transfer learning for the linear models: train on the
// English-translated copy of the train set, then continue (warm start) on
// the original. One TF-IDF model is fit on the set union of both text lists
// so the two phases share a feature space.
inline LinearStage self_transfer_train(const corpus::Dataset& train,
                                       augment::Translator& tr,
                                       augment::TranslationCache& cache,
                                       const StageSpec& spec,
                                       const models::TrainConfig& cfg,
                                       const textproc::TfidfConfig& tfidf_cfg = {},
                                       const augment::AugmentConfig& aug_cfg = {},
                                       const std::string& transfer_lang = "en") {
    if (train.examples.empty())
        throw TrainingError("self_transfer_train: empty train set");
    if (spec.kind == StageSpec::Kind::External)
        throw InputError("self_transfer_train requires a built-in model kind");
    augment::detail::require_labeled(train, "self_transfer_train");

    std::vector<std::string> texts;
    std::vector<std::string> ids;
    texts.reserve(train.size());
    ids.reserve(train.size());
    for (const auto& ex : train.examples) {
        texts.push_back(ex.text);
        ids.push_back(ex.id);
    }
    const auto translated = augment::detail::translate_batch(
        tr, cache, texts, aug_cfg.source_lang, transfer_lang, aug_cfg, ids);

    corpus::Dataset fit_corpus;
    fit_corpus.name = train.name;
    std::unordered_set<std::string> seen(texts.begin(), texts.end());
    for (const auto& ex : train.examples) fit_corpus.examples.push_back(ex);
    for (std::size_t i = 0; i < translated.size(); ++i) {
        if (!seen.insert(translated[i]).second) continue;
        corpus::Example ex;
        ex.id = train.examples[i].id + "-t-" + transfer_lang;
        ex.text = translated[i];
        fit_corpus.examples.push_back(std::move(ex));
    }

    const auto vec = textproc::fit_tfidf(fit_corpus, tfidf_cfg);
    const auto y = detail::labels_of(train);

    std::vector<textproc::SparseVector> x_translated;
    x_translated.reserve(translated.size());
    for (const auto& text : translated)
        x_translated.push_back(textproc::transform(vec, text));
    models::TrainConfig phase1_cfg = cfg;
    phase1_cfg.warm_start.reset();
    auto phase1 = spec.kind == StageSpec::Kind::LogReg
                      ? models::train_logreg(x_translated, y, phase1_cfg)
                      : models::train_svm(x_translated, y, phase1_cfg);

    const auto x_original = detail::transform_all(vec, train);
    models::TrainConfig phase2_cfg = cfg;
    phase2_cfg.warm_start = std::move(phase1);
    auto model = spec.kind == StageSpec::Kind::LogReg
                     ? models::train_logreg(x_original, y, phase2_cfg)
                     : models::train_svm(x_original, y, phase2_cfg);
    return LinearStage{vec, std::move(model)};
}

// ---- model directory serialization -----------------------------------------

inline nlohmann::json train_config_to_json(const models::TrainConfig& cfg) {
    return nlohmann::json{
        {"learning_rate", cfg.learning_rate},
        {"epochs", cfg.epochs},
        {"l2_lambda", cfg.l2_lambda},
        {"tolerance", cfg.tolerance},
    };
}

inline models::TrainConfig train_config_from_json(const nlohmann::json& j) {
    models::TrainConfig cfg;
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.epochs = j.at("epochs").get<std::size_t>();
    cfg.l2_lambda = j.at("l2_lambda").get<double>();
    cfg.tolerance = j.at("tolerance").get<double>();
    return cfg;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path.string());
    out << data;
    if (!out) throw InputError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelIntegrityError("missing model file: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

inline std::string stage_kind(const Stage& stage) {
    if (const auto* linear = std::get_if<LinearStage>(&stage))
        return models::kind_to_string(linear->model.kind);
    return "external";
}

// Writes vectorizer.json + model.json under dir and records their hashes
// into `files` keyed by path relative to the model root.
inline nlohmann::json stage_to_manifest(const Stage& stage,
                                        const std::filesystem::path& dir,
                                        const std::string& rel_prefix,
                                        nlohmann::json& files) {
    nlohmann::json entry{{"kind", stage_kind(stage)}, {"endpoint", nullptr}};
    if (const auto* linear = std::get_if<LinearStage>(&stage)) {
        std::filesystem::create_directories(dir);
        const std::string vec_json = textproc::to_json(linear->vectorizer).dump(2);
        const std::string model_json = models::to_json(linear->model).dump(2);
        write_file(dir / "vectorizer.json", vec_json);
        write_file(dir / "model.json", model_json);
        files[rel_prefix + "vectorizer.json"] = hash::sha256_hex(vec_json);
        files[rel_prefix + "model.json"] = hash::sha256_hex(model_json);
    } else {
        entry["endpoint"] = std::get<ExternalStage>(stage).endpoint;
    }
    return entry;
}

inline Stage stage_from_manifest(const nlohmann::json& entry,
                                 const std::filesystem::path& dir) {
    const auto kind = entry.at("kind").get<std::string>();
    if (kind == "external")
        return ExternalStage{entry.at("endpoint").get<std::string>()};
    LinearStage stage;
    stage.vectorizer = textproc::tfidf_from_json(
        nlohmann::json::parse(read_file(dir / "vectorizer.json")));
    stage.model =
        models::linear_from_json(nlohmann::json::parse(read_file(dir / "model.json")));
    if (models::kind_to_string(stage.model.kind) != kind)
        throw ModelIntegrityError("manifest kind does not match model.json");
    if (stage.vectorizer.dim() != stage.model.feature_dim)
        throw ModelIntegrityError("vectorizer/model feature space mismatch");
    return stage;
}

inline void verify_hashes(const nlohmann::json& files,
                          const std::filesystem::path& root) {
    for (const auto& [rel, expected] : files.items()) {
        const auto actual = hash::sha256_hex(read_file(root / rel));
        if (actual != expected.get<std::string>())
            throw ModelIntegrityError("content hash mismatch for " + rel);
    }
}

}  // namespace detail

// Directory layout: manifest.json + stage1/ + stage2/, each stage holding
// vectorizer.json and model.json (external stages hold no files). `extra`
// fields (config/data hashes, timestamps) merge into the manifest root.
inline void save_cascade(const CascadeModel& model, const std::filesystem::path& dir,
                         const nlohmann::json& extra = nlohmann::json::object()) {
    std::filesystem::create_directories(dir);
    nlohmann::json files = nlohmann::json::object();
    auto s1 = detail::stage_to_manifest(model.stage1, dir / "stage1", "stage1/", files);
    auto s2 = detail::stage_to_manifest(model.stage2, dir / "stage2", "stage2/", files);
    s1["train_config"] = train_config_to_json(model.cfg1);
    s2["train_config"] = train_config_to_json(model.cfg2);

    nlohmann::json manifest{
        {"schema", "vitd.model/1"},
        {"mode", "cascade"},
        {"stage1", std::move(s1)},
        {"stage2", std::move(s2)},
        {"tfidf_config", {{"min_df", model.tfidf_config.min_df},
                          {"max_features",
                           model.tfidf_config.max_features
                               ? nlohmann::json(*model.tfidf_config.max_features)
                               : nlohmann::json(nullptr)},
                          {"lowercase", model.tfidf_config.lowercase},
                          {"sublinear_tf", model.tfidf_config.sublinear_tf}}},
        {"files", std::move(files)},
    };
    manifest.update(extra);
    detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline nlohmann::json load_manifest(const std::filesystem::path& dir) {
    try {
        const auto manifest =
            nlohmann::json::parse(detail::read_file(dir / "manifest.json"));
        if (manifest.at("schema").get<std::string>() != "vitd.model/1")
            throw ModelIntegrityError("unsupported model schema");
        return manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ModelIntegrityError("corrupt model manifest in " + dir.string() + ": " +
                                  e.what());
    }
}

// Loads and integrity-checks a cascade directory: every file hash in the
// manifest must match before anything is deserialized.
inline CascadeModel load_cascade(const std::filesystem::path& dir) {
    const auto manifest = load_manifest(dir);
    try {
        if (manifest.at("mode").get<std::string>() != "cascade")
            throw ModelIntegrityError("model directory is not a cascade model");
        detail::verify_hashes(manifest.at("files"), dir);
        CascadeModel model;
        model.stage1 = detail::stage_from_manifest(manifest.at("stage1"), dir / "stage1");
        model.stage2 = detail::stage_from_manifest(manifest.at("stage2"), dir / "stage2");
        model.cfg1 = train_config_from_json(manifest.at("stage1").at("train_config"));
        model.cfg2 = train_config_from_json(manifest.at("stage2").at("train_config"));
        if (const auto* s1 = std::get_if<LinearStage>(&model.stage1);
            s1 && s1->model.classes != std::vector<int>{0, 1})
            throw ModelIntegrityError("stage 1 classes must be {0, 1}");
        if (const auto* s2 = std::get_if<LinearStage>(&model.stage2);
            s2 && s2->model.classes != std::vector<int>{1, 2})
            throw ModelIntegrityError("stage 2 classes must be {1, 2}");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ModelIntegrityError("corrupt model manifest in " + dir.string() + ": " +
                                  e.what());
    }
}

// Flat (single-model) directory: manifest.json + vectorizer.json + model.json.
// `mode` is "flat" or "self-transfer".
inline void save_flat(const Stage& stage, const std::string& mode,
                      const models::TrainConfig& cfg,
                      const textproc::TfidfConfig& tfidf_cfg,
                      const std::filesystem::path& dir,
                      const nlohmann::json& extra = nlohmann::json::object()) {
    std::filesystem::create_directories(dir);
    nlohmann::json files = nlohmann::json::object();
    auto entry = detail::stage_to_manifest(stage, dir, "", files);
    entry["train_config"] = train_config_to_json(cfg);
    nlohmann::json manifest{
        {"schema", "vitd.model/1"},
        {"mode", mode},
        {"model", std::move(entry)},
        {"tfidf_config", {{"min_df", tfidf_cfg.min_df},
                          {"max_features", tfidf_cfg.max_features
                                               ? nlohmann::json(*tfidf_cfg.max_features)
                                               : nlohmann::json(nullptr)},
                          {"lowercase", tfidf_cfg.lowercase},
                          {"sublinear_tf", tfidf_cfg.sublinear_tf}}},
        {"files", std::move(files)},
    };
    manifest.update(extra);
    detail::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline Stage load_flat(const std::filesystem::path& dir) {
    const auto manifest = load_manifest(dir);
    try {
        const auto mode = manifest.at("mode").get<std::string>();
        if (mode != "flat" && mode != "self-transfer")
            throw ModelIntegrityError("model directory is not a flat model");
        detail::verify_hashes(manifest.at("files"), dir);
        return detail::stage_from_manifest(manifest.at("model"), dir);
    } catch (const nlohmann::json::exception& e) {
        throw ModelIntegrityError("corrupt model manifest in " + dir.string() + ": " +
                                  e.what());
    }
}

}  // namespace vitd::cascade
