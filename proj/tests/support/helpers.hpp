#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "vitd/corpus.hpp"

// Shared test scaffolding: RAII temp dirs, fixture writers, and a seeded
// synthetic-corpus generator used by the training and acceptance suites.

namespace vitd::test {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("vitd-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const {
        return path_ / name;
    }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

// Linearly separable three-class corpus: every class has its own marker
// vocabulary, every doc draws a few markers plus shared filler words.
inline corpus::Dataset make_synthetic_corpus(std::size_t docs_per_class,
                                             unsigned seed,
                                             const std::string& name = "synthetic") {
    static const std::vector<std::vector<std::string>> kMarkers = {
        {"calm", "peace", "garden", "flower", "gentle"},
        {"taunt", "mock", "shun", "insult", "sneer"},
        {"strike", "burn", "attack", "smash", "raid"},
    };
    static const std::vector<std::string> kFiller = {
        "the", "a", "on", "with", "today", "people", "street", "city",
    };
    std::mt19937 rng(seed);
    corpus::Dataset ds;
    ds.name = name;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < docs_per_class; ++i) {
        for (int label = 0; label < 3; ++label) {
            std::string text;
            const auto& markers = kMarkers[static_cast<std::size_t>(label)];
            const std::size_t n_markers = 2 + rng() % 3;
            for (std::size_t m = 0; m < n_markers; ++m) {
                if (!text.empty()) text += ' ';
                text += markers[rng() % markers.size()];
            }
            const std::size_t n_filler = 1 + rng() % 4;
            for (std::size_t f = 0; f < n_filler; ++f) {
                text += ' ';
                text += kFiller[rng() % kFiller.size()];
            }
            corpus::Example ex;
            ex.id = name + "-" + std::to_string(idx++);
            ex.text = text;
            ex.label = label;
            ds.examples.push_back(std::move(ex));
        }
    }
    return ds;
}

inline std::string to_tsv(const corpus::Dataset& ds) {
    std::string out = "text\tlabel\n";
    for (const auto& ex : ds.examples) {
        out += ex.text + "\t" + corpus::label_to_string(*ex.label) + "\n";
    }
    return out;
}

}  // namespace vitd::test
