#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vitd/corpus.hpp"
#include "vitd/errors.hpp"
#include "vitd/unicode.hpp"

// Tokenization and TF-IDF vectorization: texts -> L2-normalized sparse
// vectors for the linear models.

namespace vitd::textproc {

// Maximal runs of Unicode letters/digits/combining marks; punctuation and
// symbols separate. Lowercasing only affects cased scripts, so Bangla text
// passes through unchanged either way.
inline std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = unicode::decode(text, pos);
        if (unicode::is_word_char(cp)) {
            if (lowercase) cp = unicode::to_lower(cp);
            unicode::encode(cp, current);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

struct TfidfConfig {
    std::size_t min_df = 1;
    std::optional<std::size_t> max_features;
    bool lowercase = true;
    bool sublinear_tf = false;

    bool operator==(const TfidfConfig&) const = default;
};

struct Vocabulary {
    std::vector<std::string> tokens;      // index -> token
    std::vector<std::size_t> doc_freq;    // index -> document frequency
    std::unordered_map<std::string, std::size_t> index;  // token -> index
    std::size_t fitted_docs = 0;          // N

    std::size_t size() const { return tokens.size(); }
};

struct TfidfModel {
    Vocabulary vocab;
    std::vector<double> idf;  // ln((1+N)/(1+df)) + 1, strictly positive
    TfidfConfig config;

    std::size_t dim() const { return vocab.size(); }
};

// Sorted (index, value) pairs; indices strictly increasing, values non-zero.
struct SparseVector {
    std::vector<std::pair<std::size_t, double>> entries;
    std::size_t dim = 0;

    bool operator==(const SparseVector&) const = default;

    double l2_norm() const {
        double sq = 0.0;
        for (const auto& [i, v] : entries) sq += v * v;
        return std::sqrt(sq);
    }
};

// Builds the vocabulary from tokens meeting min_df; when max_features caps
// the size, candidates are kept by (df desc, token asc) so fitted models are
// byte-reproducible. Feature indices are assigned in token order.
inline TfidfModel fit_tfidf(const corpus::Dataset& corpus, const TfidfConfig& cfg) {
    if (cfg.min_df < 1) throw InputError("fit_tfidf: min_df must be >= 1");
    if (cfg.max_features && *cfg.max_features < 1)
        throw InputError("fit_tfidf: max_features must be >= 1");
    if (corpus.examples.empty()) throw InputError("fit_tfidf: empty corpus");

    std::map<std::string, std::size_t> df;  // ordered: deterministic iteration
    std::unordered_set<std::string> seen;
    for (const auto& ex : corpus.examples) {
        seen.clear();
        for (auto& tok : tokenize(ex.text, cfg.lowercase)) {
            if (seen.insert(tok).second) ++df[tok];
        }
    }

    std::vector<std::pair<std::string, std::size_t>> candidates;
    candidates.reserve(df.size());
    for (const auto& [tok, freq] : df) {
        if (freq >= cfg.min_df) candidates.emplace_back(tok, freq);
    }
    if (candidates.empty())
        throw InputError("fit_tfidf: vocabulary empty after min_df filtering");

    if (cfg.max_features && candidates.size() > *cfg.max_features) {
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const auto& a, const auto& b) {
                             if (a.second != b.second) return a.second > b.second;
                             return a.first < b.first;
                         });
        candidates.resize(*cfg.max_features);
        std::sort(candidates.begin(), candidates.end());
    }

    TfidfModel model;
    model.config = cfg;
    model.vocab.fitted_docs = corpus.size();
    model.vocab.tokens.reserve(candidates.size());
    model.vocab.doc_freq.reserve(candidates.size());
    model.idf.reserve(candidates.size());
    const double n = static_cast<double>(corpus.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto& [tok, freq] = candidates[i];
        model.vocab.index.emplace(tok, i);
        model.vocab.tokens.push_back(std::move(tok));
        model.vocab.doc_freq.push_back(freq);
        model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(freq))) +
                            1.0);
    }
    return model;
}

// tf·idf (tf raw, or 1+ln(tf) when sublinear) followed by L2 normalization.
// Out-of-vocabulary tokens are ignored; an all-OOV text maps to the zero
// vector (empty entry list).
inline SparseVector transform(const TfidfModel& model, std::string_view text) {
    std::map<std::size_t, double> counts;
    for (const auto& tok : tokenize(text, model.config.lowercase)) {
        const auto it = model.vocab.index.find(tok);
        if (it != model.vocab.index.end()) counts[it->second] += 1.0;
    }

    SparseVector vec;
    vec.dim = model.dim();
    vec.entries.reserve(counts.size());
    double sq = 0.0;
    for (const auto& [idx, count] : counts) {
        const double tf = model.config.sublinear_tf ? 1.0 + std::log(count) : count;
        const double value = tf * model.idf[idx];
        vec.entries.emplace_back(idx, value);
        sq += value * value;
    }
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& [idx, value] : vec.entries) value *= inv;
    }
    return vec;
}

inline nlohmann::json to_json(const TfidfModel& model) {
    nlohmann::json cfg{
        {"min_df", model.config.min_df},
        {"max_features", model.config.max_features
                             ? nlohmann::json(*model.config.max_features)
                             : nlohmann::json(nullptr)},
        {"lowercase", model.config.lowercase},
        {"sublinear_tf", model.config.sublinear_tf},
    };
    return nlohmann::json{
        {"schema", "vitd.tfidf/1"},
        {"config", std::move(cfg)},
        {"fitted_docs", model.vocab.fitted_docs},
        {"tokens", model.vocab.tokens},
        {"doc_freq", model.vocab.doc_freq},
        {"idf", model.idf},
    };
}

inline TfidfModel tfidf_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<std::string>() != "vitd.tfidf/1")
            throw ModelIntegrityError("unsupported tfidf schema: " +
                                      j.at("schema").get<std::string>());
        TfidfModel model;
        const auto& cfg = j.at("config");
        model.config.min_df = cfg.at("min_df").get<std::size_t>();
        if (!cfg.at("max_features").is_null())
            model.config.max_features = cfg.at("max_features").get<std::size_t>();
        model.config.lowercase = cfg.at("lowercase").get<bool>();
        model.config.sublinear_tf = cfg.at("sublinear_tf").get<bool>();
        model.vocab.fitted_docs = j.at("fitted_docs").get<std::size_t>();
        model.vocab.tokens = j.at("tokens").get<std::vector<std::string>>();
        model.vocab.doc_freq = j.at("doc_freq").get<std::vector<std::size_t>>();
        model.idf = j.at("idf").get<std::vector<double>>();
        if (model.vocab.doc_freq.size() != model.vocab.tokens.size() ||
            model.idf.size() != model.vocab.tokens.size()) {
            throw ModelIntegrityError("tfidf arrays have inconsistent lengths");
        }
        for (std::size_t i = 0; i < model.vocab.tokens.size(); ++i) {
            if (!model.vocab.index.emplace(model.vocab.tokens[i], i).second)
                throw ModelIntegrityError("tfidf vocabulary has duplicate token '" +
                                          model.vocab.tokens[i] + "'");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ModelIntegrityError(std::string("malformed tfidf model: ") + e.what());
    }
}

}  // namespace vitd::textproc
