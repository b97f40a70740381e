#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>

#include "support/helpers.hpp"
#include "vitd/textproc.hpp"

using namespace vitd;
using corpus::Dataset;
using corpus::Example;
using textproc::TfidfConfig;

namespace {

Dataset docs(const std::vector<std::string>& texts) {
    Dataset ds;
    ds.name = "docs";
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Example ex;
        ex.id = "docs-" + std::to_string(i);
        ex.text = texts[i];
        ds.examples.push_back(ex);
    }
    return ds;
}

}  // namespace

TEST_CASE("tokenize splits on punctuation and lowercases cased scripts") {
    CHECK(textproc::tokenize("Hello, world!", true) ==
          std::vector<std::string>{"hello", "world"});
    CHECK(textproc::tokenize("Hello, world!", false) ==
          std::vector<std::string>{"Hello", "world"});
    CHECK(textproc::tokenize("", true).empty());
    CHECK(textproc::tokenize("...!?", true).empty());
    CHECK(textproc::tokenize("it's a test", true) ==
          std::vector<std::string>{"it", "s", "a", "test"});
    CHECK(textproc::tokenize("x2 3y", true) == std::vector<std::string>{"x2", "3y"});
}

TEST_CASE("tokenize passes caseless scripts through unchanged") {
    // Two Bangla words separated by a space, with a danda terminator.
    const std::string bangla = "আমি ভালো।";
    const auto lowered = textproc::tokenize(bangla, true);
    const auto raw = textproc::tokenize(bangla, false);
    REQUIRE(lowered.size() == 2);
    CHECK(lowered == raw);
    CHECK(lowered[0] == "আমি");
    CHECK(lowered[1] == "ভালো");
}

TEST_CASE("fit_tfidf on a single document") {
    const auto model = textproc::fit_tfidf(docs({"a b a"}), {});
    REQUIRE(model.dim() == 2);
    CHECK(model.vocab.tokens == std::vector<std::string>{"a", "b"});
    CHECK(model.vocab.doc_freq == std::vector<std::size_t>{1, 1});
    // idf = ln((1+1)/(1+1)) + 1 = 1.0 for both tokens
    CHECK(model.idf[0] == 1.0);
    CHECK(model.idf[1] == 1.0);
}

TEST_CASE("fit_tfidf min_df filters rare tokens") {
    TfidfConfig cfg;
    cfg.min_df = 2;
    const auto model = textproc::fit_tfidf(docs({"a b", "a c"}), cfg);
    CHECK(model.vocab.tokens == std::vector<std::string>{"a"});
}

TEST_CASE("fit_tfidf max_features breaks df ties lexicographically") {
    TfidfConfig cfg;
    cfg.max_features = 1;
    const auto model = textproc::fit_tfidf(docs({"a b", "a b"}), cfg);
    CHECK(model.vocab.tokens == std::vector<std::string>{"a"});

    TfidfConfig cfg2;
    cfg2.max_features = 2;
    const auto model2 =
        textproc::fit_tfidf(docs({"common rare", "common other"}), cfg2);
    // df(common)=2 beats the df-1 candidates; "other" wins the tie with "rare"
    CHECK(model2.vocab.tokens == std::vector<std::string>{"common", "other"});
}

TEST_CASE("fit_tfidf error cases") {
    CHECK_THROWS_AS(textproc::fit_tfidf(docs({}), {}), InputError);
    TfidfConfig strict;
    strict.min_df = 5;
    CHECK_THROWS_AS(textproc::fit_tfidf(docs({"a b"}), strict), InputError);
}

TEST_CASE("transform weights and normalizes") {
    const auto model = textproc::fit_tfidf(docs({"a b a"}), {});
    const auto vec = textproc::transform(model, "a b");
    REQUIRE(vec.entries.size() == 2);
    CHECK(vec.entries[0].second == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    CHECK(vec.entries[1].second == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    CHECK(vec.l2_norm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("transform of out-of-vocabulary text is the zero vector") {
    const auto model = textproc::fit_tfidf(docs({"a b a"}), {});
    const auto vec = textproc::transform(model, "zzz");
    CHECK(vec.entries.empty());
    CHECK(vec.dim == 2);
}

TEST_CASE("transform of a one-token text is a unit one-hot") {
    const auto model = textproc::fit_tfidf(docs({"a b a"}), {});
    const auto vec = textproc::transform(model, "a a");
    REQUIRE(vec.entries.size() == 1);
    CHECK(vec.entries[0].first == 0);
    CHECK(vec.entries[0].second == 1.0);
}

TEST_CASE("sublinear tf uses 1 + ln(count)") {
    TfidfConfig cfg;
    cfg.sublinear_tf = true;
    const auto model = textproc::fit_tfidf(docs({"a b"}), cfg);
    const auto vec = textproc::transform(model, "a a a b");
    REQUIRE(vec.entries.size() == 2);
    const double wa = 1.0 + std::log(3.0);
    const double norm = std::sqrt(wa * wa + 1.0);
    CHECK(vec.entries[0].second == Catch::Approx(wa / norm).margin(1e-12));
    CHECK(vec.entries[1].second == Catch::Approx(1.0 / norm).margin(1e-12));
}

TEST_CASE("every non-zero transformed vector has unit L2 norm") {
    std::mt19937 rng(3);
    const std::vector<std::string> words = {"aa", "bb", "cc", "dd", "ee",
                                            "ff", "gg", "hh"};
    std::vector<std::string> texts;
    for (int d = 0; d < 30; ++d) {
        std::string text;
        const std::size_t len = 1 + rng() % 12;
        for (std::size_t w = 0; w < len; ++w) {
            if (!text.empty()) text += ' ';
            text += words[rng() % words.size()];
        }
        texts.push_back(text);
    }
    TfidfConfig cfg;
    cfg.sublinear_tf = GENERATE(false, true);
    const auto model = textproc::fit_tfidf(docs(texts), cfg);
    for (const auto& text : texts) {
        const auto vec = textproc::transform(model, text);
        if (vec.entries.empty()) continue;
        CHECK(vec.l2_norm() == Catch::Approx(1.0).margin(1e-9));
        // non-zero count never exceeds the distinct in-vocabulary token count
        std::set<std::string> distinct;
        for (const auto& tok : textproc::tokenize(text, cfg.lowercase)) {
            if (model.vocab.index.count(tok)) distinct.insert(tok);
        }
        CHECK(vec.entries.size() == distinct.size());
        // indices strictly increasing and in range
        for (std::size_t i = 1; i < vec.entries.size(); ++i)
            CHECK(vec.entries[i - 1].first < vec.entries[i].first);
        CHECK(vec.entries.back().first < vec.dim);
    }
}

TEST_CASE("idf is strictly positive") {
    std::mt19937 rng(5);
    std::vector<std::string> texts;
    for (int d = 0; d < 40; ++d) {
        texts.push_back("shared w" + std::to_string(rng() % 10));
    }
    const auto model = textproc::fit_tfidf(docs(texts), {});
    for (const double idf : model.idf) CHECK(idf > 0.0);
    // the everywhere-token has the smallest possible smoothed idf
    const auto shared_idx = model.vocab.index.at("shared");
    CHECK(model.idf[shared_idx] ==
          Catch::Approx(std::log(41.0 / 41.0) + 1.0).margin(1e-12));
}

TEST_CASE("tfidf JSON serialization round-trips byte-identically") {
    TfidfConfig cfg;
    cfg.min_df = 1;
    cfg.max_features = 3;
    const auto model =
        textproc::fit_tfidf(docs({"a b c d", "a b c", "a b", "a"}), cfg);
    const auto dumped = textproc::to_json(model).dump(2);
    const auto reloaded = textproc::tfidf_from_json(nlohmann::json::parse(dumped));
    CHECK(textproc::to_json(reloaded).dump(2) == dumped);
    CHECK(reloaded.vocab.index == model.vocab.index);
    // transforms agree exactly
    const auto a = textproc::transform(model, "a b c");
    const auto b = textproc::transform(reloaded, "a b c");
    CHECK(a == b);
}

TEST_CASE("malformed tfidf JSON is rejected") {
    CHECK_THROWS_AS(textproc::tfidf_from_json(nlohmann::json{{"schema", "bogus"}}),
                    ModelIntegrityError);
    auto j = textproc::to_json(textproc::fit_tfidf(docs({"a b"}), {}));
    j["idf"] = std::vector<double>{1.0};  // wrong length
    CHECK_THROWS_AS(textproc::tfidf_from_json(j), ModelIntegrityError);
}
