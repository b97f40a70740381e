#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vitd/errors.hpp"
#include "vitd/unicode.hpp"

// Data model for the three-class violence corpus: examples, datasets, TSV
// ingestion/serialization, label distribution stats, and word counting.

namespace vitd::corpus {

enum class Label : int {
    NonViolence = 0,
    PassiveViolence = 1,
    DirectViolence = 2,
};

enum class BinaryLabel : int {
    NonViolent = 0,
    Violent = 1,
};

inline constexpr int kNumLabels = 3;
inline const std::vector<int> kAllLabelCodes = {0, 1, 2};

inline std::string label_to_string(int code) {
    switch (code) {
        case 0: return "Non-Violence";
        case 1: return "Passive-Violence";
        case 2: return "Direct-Violence";
        default: throw Error("label code out of range: " + std::to_string(code));
    }
}

// Matching is case-sensitive so schema drift fails loudly.
inline std::optional<int> parse_label(std::string_view s) {
    if (s == "Non-Violence") return 0;
    if (s == "Passive-Violence") return 1;
    if (s == "Direct-Violence") return 2;
    return std::nullopt;
}

struct Provenance {
    enum class Kind { Original, Translated, Backtranslated };
    Kind kind = Kind::Original;
    std::string lang;  // target language (translated) or pivot (backtranslated)

    bool operator==(const Provenance&) const = default;

    static Provenance original() { return {Kind::Original, ""}; }
    static Provenance translated(std::string lang) {
        return {Kind::Translated, std::move(lang)};
    }
    static Provenance backtranslated(std::string lang) {
        return {Kind::Backtranslated, std::move(lang)};
    }
};

inline std::string provenance_to_string(const Provenance& p) {
    switch (p.kind) {
        case Provenance::Kind::Original: return "original";
        case Provenance::Kind::Translated: return "translated:" + p.lang;
        case Provenance::Kind::Backtranslated: return "backtranslated:" + p.lang;
    }
    throw Error("bad provenance kind");
}

inline Provenance parse_provenance(std::string_view s) {
    if (s.empty() || s == "original") return Provenance::original();
    if (s.starts_with("translated:"))
        return Provenance::translated(std::string(s.substr(11)));
    if (s.starts_with("backtranslated:"))
        return Provenance::backtranslated(std::string(s.substr(15)));
    throw InputError("unknown provenance '" + std::string(s) + "'");
}

struct Example {
    std::string id;
    std::string text;
    std::optional<int> label;  // absent for blind test data
    Provenance provenance = Provenance::original();
    std::optional<std::string> parent_id;  // set iff provenance != original

    bool operator==(const Example&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<Example> examples;

    std::size_t size() const { return examples.size(); }
    bool operator==(const Dataset&) const = default;
};

struct LabelDistribution {
    std::map<int, std::size_t> counts;    // per observed label code
    std::map<int, double> proportions;    // fractions of total
    std::size_t total = 0;
};

// Number of maximal non-whitespace runs (Unicode whitespace class).
inline std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    std::size_t pos = 0;
    bool in_word = false;
    while (pos < text.size()) {
        const char32_t cp = unicode::decode(text, pos);
        if (unicode::is_whitespace(cp)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            return fields;
        }
        fields.emplace_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

struct ColumnLayout {
    int id = -1;
    int text = -1;
    int label = -1;
    int provenance = -1;
    int parent_id = -1;
    std::size_t count = 0;
};

inline ColumnLayout parse_header(const std::string& header,
                                 const std::filesystem::path& path) {
    ColumnLayout layout;
    const auto cols = split_tabs(header);
    layout.count = cols.size();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::string& name = cols[i];
        int* slot = nullptr;
        if (name == "id") slot = &layout.id;
        else if (name == "text") slot = &layout.text;
        else if (name == "label") slot = &layout.label;
        else if (name == "provenance") slot = &layout.provenance;
        else if (name == "parent_id") slot = &layout.parent_id;
        else
            throw InputError(path.string() + ": unknown column '" + name +
                             "' in header");
        if (*slot != -1)
            throw InputError(path.string() + ": duplicate column '" + name + "'");
        *slot = static_cast<int>(i);
    }
    if (layout.text == -1)
        throw InputError(path.string() + ": header has no 'text' column");
    return layout;
}

}  // namespace detail

// Loads a TSV dataset. Header must name the columns (`text` required;
// `id`, `label`, `provenance`, `parent_id` optional). Rows with the wrong
// field count — which is what embedded tabs or newlines produce — are
// errors naming the line. When `has_labels` is set, every row must carry a
// valid label; otherwise empty label cells load as absent.
inline Dataset load_dataset(const std::filesystem::path& path,
                            const std::string& split_name, bool has_labels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open dataset file: " + path.string());

    std::string header;
    if (!std::getline(in, header)) {
        throw InputError(path.string() + ": empty file (missing header)");
    }
    if (header.starts_with("\xEF\xBB\xBF")) header.erase(0, 3);  // UTF-8 BOM
    if (!header.empty() && header.back() == '\r') header.pop_back();

    const auto layout = detail::parse_header(header, path);
    if (has_labels && layout.label == -1) {
        throw InputError(path.string() +
                         ": expected a 'label' column for a labeled dataset");
    }

    Dataset ds;
    ds.name = split_name;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 1;   // header was line 1
    std::size_t row_idx = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;

        const auto fields = detail::split_tabs(line);
        if (fields.size() != layout.count) {
            throw InputError(path.string() + ": line " + std::to_string(line_no) +
                             ": expected " + std::to_string(layout.count) +
                             " fields, got " + std::to_string(fields.size()));
        }

        Example ex;
        ex.id = layout.id != -1 ? fields[layout.id]
                                : split_name + "-" + std::to_string(row_idx);
        ex.text = fields[layout.text];
        if (unicode::trim(ex.text).empty()) {
            throw InputError(path.string() + ": line " + std::to_string(line_no) +
                             ": empty text");
        }
        if (layout.label != -1) {
            const std::string& cell = fields[layout.label];
            if (!cell.empty()) {
                const auto code = parse_label(cell);
                if (!code) {
                    throw InputError(path.string() + ": unknown label '" + cell +
                                     "' at line " + std::to_string(line_no));
                }
                ex.label = *code;
            }
        }
        if (has_labels && !ex.label) {
            throw InputError(path.string() + ": line " + std::to_string(line_no) +
                             ": missing label");
        }
        if (layout.provenance != -1)
            ex.provenance = parse_provenance(fields[layout.provenance]);
        if (layout.parent_id != -1 && !fields[layout.parent_id].empty())
            ex.parent_id = fields[layout.parent_id];

        const bool original = ex.provenance.kind == Provenance::Kind::Original;
        if (original != !ex.parent_id.has_value()) {
            throw InputError(path.string() + ": line " + std::to_string(line_no) +
                             ": provenance/parent_id mismatch");
        }
        if (!seen_ids.insert(ex.id).second) {
            throw InputError(path.string() + ": duplicate id '" + ex.id +
                             "' at line " + std::to_string(line_no));
        }
        ds.examples.push_back(std::move(ex));
        ++row_idx;
    }
    return ds;
}

// Serializes with the full column set; empty cells stand for absent values.
// load_dataset(save_dataset(ds)) reproduces ds exactly.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write dataset file: " + path.string());
    out << "id\ttext\tlabel\tprovenance\tparent_id\n";
    for (const auto& ex : ds.examples) {
        if (ex.text.find('\t') != std::string::npos ||
            ex.text.find('\n') != std::string::npos) {
            throw InputError("example '" + ex.id +
                             "': embedded tab/newline not representable in TSV");
        }
        out << ex.id << '\t' << ex.text << '\t'
            << (ex.label ? label_to_string(*ex.label) : "") << '\t'
            << provenance_to_string(ex.provenance) << '\t'
            << (ex.parent_id ? *ex.parent_id : "") << '\n';
    }
    if (!out) throw InputError("write failed: " + path.string());
}

// Per-label counts and proportions. Every example must be labeled.
inline LabelDistribution label_distribution(const Dataset& ds) {
    LabelDistribution dist;
    for (const auto& ex : ds.examples) {
        if (!ex.label)
            throw InputError("label_distribution: unlabeled example '" + ex.id + "'");
        ++dist.counts[*ex.label];
    }
    dist.total = ds.size();
    for (const auto& [code, count] : dist.counts) {
        dist.proportions[code] =
            static_cast<double>(count) / static_cast<double>(dist.total);
    }
    return dist;
}

}  // namespace vitd::corpus
