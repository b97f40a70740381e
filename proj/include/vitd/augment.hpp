#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "vitd/corpus.hpp"
#include "vitd/errors.hpp"
#include "vitd/hash.hpp"

// Translation-based dataset augmentation: fan-out into similar languages and
// back-translation through distant pivots, with a content-addressed disk
// cache and per-row provenance.

namespace vitd::augment {

class Translator {
public:
    virtual ~Translator() = default;
    // Returns a non-empty translation or throws TranslationError.
    virtual std::string translate(const std::string& text, const std::string& source,
                                  const std::string& target) = 0;
};

// Deterministic stand-in for a live API: appends "§<target>" to the text, so
// tests can see exactly which hops a row went through. Thread-safe.
class MockTranslator : public Translator {
public:
    std::string translate(const std::string& text, const std::string& /*source*/,
                          const std::string& target) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        maybe_fail();
        return text + "\xC2\xA7" + target;  // U+00A7 SECTION SIGN
    }

    std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

    // The next `n` translate calls throw (transient); for failure-path tests.
    void fail_next(std::size_t n, bool transient = true) {
        fail_remaining_ = n;
        fail_transient_ = transient;
    }

protected:
    void maybe_fail() {
        if (fail_remaining_ > 0) {
            --fail_remaining_;
            throw TranslationError("injected translator failure", fail_transient_);
        }
    }

    std::atomic<std::size_t> calls_{0};
    std::size_t fail_remaining_ = 0;
    bool fail_transient_ = true;
};

// Returns the input unchanged; lets the whole pipeline run offline.
class IdentityTranslator : public Translator {
public:
    std::string translate(const std::string& text, const std::string&,
                          const std::string&) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return text;
    }

    std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

private:
    std::atomic<std::size_t> calls_{0};
};

// One file per key under `dir`: filename = sha256(source|target|text) hex,
// content = JSON {source, target, input, output, timestamp}. A mutex-guarded
// in-memory index makes every write visible to later reads in the same run
// without touching the (potentially slow) filesystem again; distinct keys
// write distinct files, and a corrupt or torn entry degrades to a miss.
class TranslationCache {
public:
    explicit TranslationCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    static std::string key(const std::string& source, const std::string& target,
                           const std::string& text) {
        return hash::sha256_hex(source + "\x1F" + target + "\x1F" + text);
    }

    std::optional<std::string> get(const std::string& source,
                                   const std::string& target,
                                   const std::string& text) {
        const auto k = key(source, target, text);
        {
            std::scoped_lock lock(memory_mutex_);
            const auto it = memory_.find(k);
            if (it != memory_.end()) {
                hits_.fetch_add(1, std::memory_order_relaxed);
                return it->second;
            }
        }
        std::ifstream in(dir_ / k, std::ios::binary);
        if (!in) {
            misses_.fetch_add(1, std::memory_order_relaxed);
            return std::nullopt;
        }
        try {
            auto output = nlohmann::json::parse(in).at("output").get<std::string>();
            hits_.fetch_add(1, std::memory_order_relaxed);
            std::scoped_lock lock(memory_mutex_);
            memory_.emplace(k, output);
            return output;
        } catch (const nlohmann::json::exception&) {
            misses_.fetch_add(1, std::memory_order_relaxed);
            return std::nullopt;  // treat a corrupt entry as a miss
        }
    }

    void put(const std::string& source, const std::string& target,
             const std::string& text, const std::string& output) {
        const auto k = key(source, target, text);
        const nlohmann::json j{
            {"source", source},
            {"target", target},
            {"input", text},
            {"output", output},
            {"timestamp", std::chrono::duration_cast<std::chrono::seconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count()},
        };
        const auto path = dir_ / k;
        {
            std::ofstream out(path, std::ios::binary);
            if (!out) throw InputError("cannot write cache entry: " + path.string());
            out << j.dump();
        }
        std::scoped_lock lock(memory_mutex_);
        memory_[k] = output;
    }

    std::size_t hits() const { return hits_.load(std::memory_order_relaxed); }
    std::size_t misses() const { return misses_.load(std::memory_order_relaxed); }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::mutex memory_mutex_;
    std::unordered_map<std::string, std::string> memory_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

struct RetryPolicy {
    std::size_t max_retries = 3;  // attempts = 1 + max_retries
    std::chrono::milliseconds base_delay{100};  // doubles per retry
};

struct AugmentConfig {
    std::string source_lang = "bn";
    std::vector<std::string> similar_langs = {"hi", "ur", "ta"};
    std::vector<std::string> pivot_langs = {"zu", "ps", "az"};
    bool dedup = false;
    std::size_t max_concurrency = 4;
    RetryPolicy retry;

    void validate() const {
        const auto valid_code = [](const std::string& code) {
            if (code.size() < 2 || code.size() > 8) return false;
            for (const char c : code)
                if (c < 'a' || c > 'z') return false;
            return true;
        };
        if (!valid_code(source_lang))
            throw InputError("bad source_lang '" + source_lang + "'");
        for (const auto& list : {similar_langs, pivot_langs}) {
            for (const auto& code : list) {
                if (!valid_code(code)) throw InputError("bad language code '" + code + "'");
                if (code == source_lang)
                    throw InputError("source_lang '" + source_lang +
                                     "' may not appear in the augmentation lists");
            }
        }
        if (max_concurrency == 0) throw InputError("max_concurrency must be >= 1");
    }
};

// Cache-through translation with retry: hits return without touching the
// translator; misses call it (retrying transient failures with exponential
// backoff), store the result, and return it.
inline std::string cached_translate(Translator& tr, TranslationCache& cache,
                                    const std::string& text, const std::string& source,
                                    const std::string& target,
                                    const RetryPolicy& policy = {}) {
    if (text.empty()) throw InputError("cached_translate: empty text");
    if (auto hit = cache.get(source, target, text)) return *hit;

    auto delay = policy.base_delay;
    for (std::size_t attempt = 0;; ++attempt) {
        try {
            std::string out = tr.translate(text, source, target);
            if (out.empty())
                throw TranslationError("translator returned empty output", false);
            cache.put(source, target, text, out);
            return out;
        } catch (const TranslationError& e) {
            if (!e.transient || attempt >= policy.max_retries) {
                throw TranslationError("translation " + source + "->" + target +
                                           " failed after " +
                                           std::to_string(attempt + 1) +
                                           " attempts: " + e.what(),
                                       false);
            }
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
}

namespace detail {

// Translates a batch with bounded concurrency. Duplicate (text) entries are
// resolved once, cache lookups happen sequentially (so hit/miss counts are
// schedule-independent), and results come back in input order: a worker pool
// pulls pending items from a shared index and stores each output by slot.
// On failure the error names ids[i] of the first failing text (ids, when
// given, align with texts).
inline std::vector<std::string> translate_batch(
    Translator& tr, TranslationCache& cache, const std::vector<std::string>& texts,
    const std::string& source, const std::string& target, const AugmentConfig& cfg,
    const std::vector<std::string>& ids = {}) {
    std::map<std::string, std::string> resolved;  // text -> translation
    std::vector<std::string> pending;
    for (const auto& text : texts) {
        if (resolved.count(text)) continue;
        if (auto hit = cache.get(source, target, text)) {
            resolved.emplace(text, std::move(*hit));
        } else {
            resolved.emplace(text, "");
            pending.push_back(text);
        }
    }

    if (!pending.empty()) {
        const auto translate_one = [&](const std::string& text) {
            auto delay = cfg.retry.base_delay;
            for (std::size_t attempt = 0;; ++attempt) {
                try {
                    std::string out = tr.translate(text, source, target);
                    if (out.empty())
                        throw TranslationError("translator returned empty output",
                                               false);
                    return out;
                } catch (const TranslationError& e) {
                    if (!e.transient || attempt >= cfg.retry.max_retries)
                        throw TranslationError(
                            "translation " + source + "->" + target +
                                " failed after " + std::to_string(attempt + 1) +
                                " attempts: " + e.what(),
                            false);
                    std::this_thread::sleep_for(delay);
                    delay *= 2;
                }
            }
        };

        // error context: the id of the first input example using this text
        const auto id_for = [&](const std::string& text) -> std::string {
            if (ids.empty()) return "";
            for (std::size_t i = 0; i < texts.size(); ++i) {
                if (texts[i] == text) return ids[i];
            }
            return "";
        };
        const auto fail = [&](const std::string& text, const TranslationError& e) {
            const auto id = id_for(text);
            throw TranslationError(
                (id.empty() ? std::string("") : "example '" + id + "': ") + e.what(),
                false);
        };

        std::vector<std::string> outputs(pending.size());
        const std::size_t workers = std::min(cfg.max_concurrency, pending.size());
        if (workers <= 1) {
            for (std::size_t i = 0; i < pending.size(); ++i) {
                try {
                    outputs[i] = translate_one(pending[i]);
                } catch (const TranslationError& e) {
                    fail(pending[i], e);
                }
                cache.put(source, target, pending[i], outputs[i]);
            }
        } else {
            std::atomic<std::size_t> next{0};
            constexpr std::size_t kNoFailure = static_cast<std::size_t>(-1);
            std::vector<std::exception_ptr> failures(workers);
            std::vector<std::size_t> failed_at(workers, kNoFailure);
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    while (true) {
                        const std::size_t i = next.fetch_add(1);
                        if (i >= pending.size()) return;
                        try {
                            outputs[i] = translate_one(pending[i]);
                            cache.put(source, target, pending[i], outputs[i]);
                        } catch (...) {
                            failures[w] = std::current_exception();
                            failed_at[w] = i;
                            return;
                        }
                    }
                });
            }
            for (auto& t : pool) t.join();
            // surface the failure with the lowest batch index: deterministic
            // regardless of which worker hit it
            std::size_t first = kNoFailure;
            std::size_t chosen = 0;
            for (std::size_t w = 0; w < workers; ++w) {
                if (failures[w] && failed_at[w] < first) {
                    first = failed_at[w];
                    chosen = w;
                }
            }
            if (first != kNoFailure) {
                try {
                    std::rethrow_exception(failures[chosen]);
                } catch (const TranslationError& e) {
                    fail(pending[first], e);
                }
            }
        }
        for (std::size_t i = 0; i < pending.size(); ++i)
            resolved[pending[i]] = std::move(outputs[i]);
    }

    std::vector<std::string> results;
    results.reserve(texts.size());
    for (const auto& text : texts) results.push_back(resolved.at(text));
    return results;
}

inline void require_labeled(const corpus::Dataset& ds, const char* op) {
    for (const auto& ex : ds.examples) {
        if (!ex.label)
            throw InputError(std::string(op) + ": unlabeled example '" + ex.id + "'");
    }
}

}  // namespace detail

// Appends one translated copy of every example per similar language: same
// label, provenance translated(lang), parent_id set. Output order: originals
// first, then one block per language in config order, each block in original
// example order.
inline corpus::Dataset augment_multilingual(const corpus::Dataset& ds,
                                            const AugmentConfig& cfg, Translator& tr,
                                            TranslationCache& cache) {
    cfg.validate();
    detail::require_labeled(ds, "augment_multilingual");

    corpus::Dataset out = ds;
    std::vector<std::string> texts;
    std::vector<std::string> ids;
    texts.reserve(ds.size());
    ids.reserve(ds.size());
    for (const auto& ex : ds.examples) {
        texts.push_back(ex.text);
        ids.push_back(ex.id);
    }

    for (const auto& lang : cfg.similar_langs) {
        std::vector<std::string> translated;
        try {
            translated = detail::translate_batch(tr, cache, texts, cfg.source_lang,
                                                 lang, cfg, ids);
        } catch (const TranslationError& e) {
            throw TranslationError("augment_multilingual: dataset '" + ds.name +
                                       "' -> " + lang + ": " + e.what(),
                                   false);
        }
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto& parent = ds.examples[i];
            corpus::Example ex;
            ex.id = parent.id + "-t-" + lang;
            ex.text = translated[i];
            ex.label = parent.label;
            ex.provenance = corpus::Provenance::translated(lang);
            ex.parent_id = parent.id;
            out.examples.push_back(std::move(ex));
        }
    }
    return out;
}

// Appends one back-translated copy per pivot: text' =
// translate(translate(text, source, pivot), pivot, source). Same ordering
// and provenance rules as augment_multilingual.
inline corpus::Dataset augment_backtranslate(const corpus::Dataset& ds,
                                             const AugmentConfig& cfg, Translator& tr,
                                             TranslationCache& cache) {
    cfg.validate();
    detail::require_labeled(ds, "augment_backtranslate");

    corpus::Dataset out = ds;
    std::vector<std::string> texts;
    std::vector<std::string> ids;
    texts.reserve(ds.size());
    ids.reserve(ds.size());
    for (const auto& ex : ds.examples) {
        texts.push_back(ex.text);
        ids.push_back(ex.id);
    }

    for (const auto& pivot : cfg.pivot_langs) {
        std::vector<std::string> round_trip;
        try {
            auto hop = detail::translate_batch(tr, cache, texts, cfg.source_lang,
                                               pivot, cfg, ids);
            round_trip = detail::translate_batch(tr, cache, hop, pivot,
                                                 cfg.source_lang, cfg, ids);
        } catch (const TranslationError& e) {
            throw TranslationError("augment_backtranslate: dataset '" + ds.name +
                                       "' via " + pivot + ": " + e.what(),
                                   false);
        }
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto& parent = ds.examples[i];
            corpus::Example ex;
            ex.id = parent.id + "-bt-" + pivot;
            ex.text = round_trip[i];
            ex.label = parent.label;
            ex.provenance = corpus::Provenance::backtranslated(pivot);
            ex.parent_id = parent.id;
            out.examples.push_back(std::move(ex));
        }
    }
    return out;
}

namespace detail {

// Content language of a row: translated rows carry their target language,
// originals and back-translations are in the source language.
inline std::string effective_lang(const corpus::Example& ex,
                                  const AugmentConfig& cfg) {
    return ex.provenance.kind == corpus::Provenance::Kind::Translated
               ? ex.provenance.lang
               : cfg.source_lang;
}

}  // namespace detail

// Original + multilingual blocks + back-translation blocks; with the default
// 3+3 languages and dedup off the output is exactly 7x the input. With dedup
// on, a later row is dropped when an earlier row has the same text, label,
// and content language (so a back-translation that lands on its parent's
// exact text goes away, while translations into other languages stay).
inline corpus::Dataset build_combined_dataset(const corpus::Dataset& ds,
                                              const AugmentConfig& cfg, Translator& tr,
                                              TranslationCache& cache) {
    cfg.validate();
    corpus::Dataset multilingual = augment_multilingual(ds, cfg, tr, cache);
    corpus::Dataset back = augment_backtranslate(ds, cfg, tr, cache);

    corpus::Dataset out;
    out.name = ds.name;
    out.examples = std::move(multilingual.examples);
    out.examples.insert(out.examples.end(),
                        std::make_move_iterator(back.examples.begin() +
                                                static_cast<std::ptrdiff_t>(ds.size())),
                        std::make_move_iterator(back.examples.end()));

    if (cfg.dedup) {
        std::set<std::tuple<std::string, int, std::string>> seen;
        std::vector<corpus::Example> kept;
        kept.reserve(out.examples.size());
        for (auto& ex : out.examples) {
            if (seen.emplace(detail::effective_lang(ex, cfg), ex.label.value_or(-1),
                             ex.text)
                    .second) {
                kept.push_back(std::move(ex));
            }
        }
        out.examples = std::move(kept);
    }
    return out;
}

}  // namespace vitd::augment
