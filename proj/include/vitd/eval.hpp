#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vitd/corpus.hpp"
#include "vitd/errors.hpp"

// Metrics and analysis: confusion matrix, per-class precision/recall/F1,
// macro F1 over the fixed class set, text-length bucket analysis, and the
// report bundle (markdown + JSON + CSV plot data).

namespace vitd::eval {

struct ConfusionMatrix {
    std::vector<int> classes;                      // ordered label codes
    std::vector<std::vector<std::size_t>> cells;   // [gold][pred]
    std::size_t total = 0;

    std::size_t row_sum(std::size_t i) const {
        std::size_t s = 0;
        for (const auto c : cells[i]) s += c;
        return s;
    }
    std::size_t col_sum(std::size_t j) const {
        std::size_t s = 0;
        for (const auto& row : cells) s += row[j];
        return s;
    }
};

struct ClassMetrics {
    int label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct LengthBucketRow {
    std::string label;        // "(50, 100]", "(1000, inf)", or the "(0)" anomaly row
    std::size_t lower = 0;    // exclusive
    std::optional<std::size_t> upper;  // inclusive; absent for the overflow row
    double macro_f1 = 0.0;
    std::size_t count = 0;
    double percentage = 0.0;  // count/total*100, rounded to 3 decimals
};

inline const std::vector<std::pair<std::size_t, std::size_t>> kDefaultLengthBins = {
    {0, 10}, {10, 20}, {20, 50}, {50, 100},
    {100, 200}, {200, 300}, {300, 500}, {500, 1000},
};

namespace detail {

inline std::size_t class_index(const std::vector<int>& classes, int code,
                               const char* what) {
    const auto it = std::find(classes.begin(), classes.end(), code);
    if (it == classes.end())
        throw InputError(std::string(what) + ": unknown label " + std::to_string(code));
    return static_cast<std::size_t>(it - classes.begin());
}

}  // namespace detail

// cell[i][j] = #(gold = classes[i], pred = classes[j]).
inline ConfusionMatrix confusion_matrix(const std::vector<int>& gold,
                                        const std::vector<int>& pred,
                                        const std::vector<int>& classes) {
    if (gold.size() != pred.size())
        throw InputError("confusion_matrix: gold/pred length mismatch: " +
                         std::to_string(gold.size()) + " vs " +
                         std::to_string(pred.size()));
    if (gold.empty()) throw InputError("confusion_matrix: no pairs to evaluate");
    ConfusionMatrix cm;
    cm.classes = classes;
    cm.cells.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));
    cm.total = gold.size();
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto gi = detail::class_index(classes, gold[i], "confusion_matrix");
        const auto pj = detail::class_index(classes, pred[i], "confusion_matrix");
        ++cm.cells[gi][pj];
    }
    return cm;
}

// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); every 0/0 yields 0.
inline std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
    std::vector<ClassMetrics> out;
    out.reserve(cm.classes.size());
    for (std::size_t c = 0; c < cm.classes.size(); ++c) {
        const double tp = static_cast<double>(cm.cells[c][c]);
        const double fp = static_cast<double>(cm.col_sum(c)) - tp;
        const double fn = static_cast<double>(cm.row_sum(c)) - tp;
        ClassMetrics m;
        m.label = cm.classes[c];
        m.support = cm.row_sum(c);
        m.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        m.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        m.f1 = m.precision + m.recall > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        out.push_back(m);
    }
    return out;
}

// Unweighted mean of per-class F1 over the full fixed class list; classes
// with zero support contribute 0.
inline double macro_f1(const std::vector<int>& gold, const std::vector<int>& pred,
                       const std::vector<int>& classes) {
    const auto metrics = per_class_metrics(confusion_matrix(gold, pred, classes));
    double sum = 0.0;
    for (const auto& m : metrics) sum += m.f1;
    return sum / static_cast<double>(metrics.size());
}

inline double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

// Buckets examples by word count into half-open (lo, hi] bins and computes
// per-bucket macro F1 over the fixed three-class set. Examples that land in
// no bin go to the overflow row (above the last bin, reported only when
// non-empty) or to a "(0)" anomaly row (zero-word or gap values).
inline std::vector<LengthBucketRow> length_bucket_analysis(
    const std::vector<corpus::Example>& examples, const std::vector<int>& preds,
    const std::vector<std::pair<std::size_t, std::size_t>>& bins =
        kDefaultLengthBins) {
    if (examples.size() != preds.size())
        throw InputError("length_bucket_analysis: examples/preds length mismatch: " +
                         std::to_string(examples.size()) + " vs " +
                         std::to_string(preds.size()));
    if (bins.empty()) throw InputError("length_bucket_analysis: no bins");

    const std::size_t overflow_from = bins.back().second;
    std::vector<std::vector<std::size_t>> members(bins.size() + 2);
    const std::size_t kOverflow = bins.size();
    const std::size_t kAnomaly = bins.size() + 1;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (!examples[i].label)
            throw InputError("length_bucket_analysis: unlabeled example '" +
                             examples[i].id + "'");
        const std::size_t wc = corpus::word_count(examples[i].text);
        std::size_t slot = kAnomaly;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            if (wc > bins[b].first && wc <= bins[b].second) {
                slot = b;
                break;
            }
        }
        if (slot == kAnomaly && wc > overflow_from) slot = kOverflow;
        members[slot].push_back(i);
    }

    const auto bucket_f1 = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        std::vector<int> gold;
        std::vector<int> pred;
        gold.reserve(idx.size());
        pred.reserve(idx.size());
        for (const auto i : idx) {
            gold.push_back(*examples[i].label);
            pred.push_back(preds[i]);
        }
        return macro_f1(gold, pred, corpus::kAllLabelCodes);
    };
    const double total = static_cast<double>(examples.size());
    const auto make_row = [&](std::string label, std::size_t lower,
                              std::optional<std::size_t> upper,
                              const std::vector<std::size_t>& idx) {
        LengthBucketRow row;
        row.label = std::move(label);
        row.lower = lower;
        row.upper = upper;
        row.count = idx.size();
        row.macro_f1 = bucket_f1(idx);
        row.percentage =
            total > 0.0 ? round3(static_cast<double>(idx.size()) / total * 100.0) : 0.0;
        return row;
    };

    std::vector<LengthBucketRow> rows;
    if (!members[kAnomaly].empty())
        rows.push_back(make_row("(0)", 0, 0, members[kAnomaly]));
    for (std::size_t b = 0; b < bins.size(); ++b) {
        rows.push_back(make_row("(" + std::to_string(bins[b].first) + ", " +
                                    std::to_string(bins[b].second) + "]",
                                bins[b].first, bins[b].second, members[b]));
    }
    if (!members[kOverflow].empty())
        rows.push_back(make_row("(" + std::to_string(overflow_from) + ", inf)",
                                overflow_from, std::nullopt, members[kOverflow]));
    return rows;
}

namespace detail {

inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

inline std::string class_display(int code) {
    return code >= 0 && code < corpus::kNumLabels ? corpus::label_to_string(code)
                                                  : "class " + std::to_string(code);
}

}  // namespace detail

// Writes report.md, report.json, and plot_data.csv into out_dir. Everything
// emitted is deterministic (fixed float formatting, no timestamps), so a
// re-run over identical inputs reproduces the files byte for byte.
inline void emit_report(const ConfusionMatrix& cm,
                        const std::vector<ClassMetrics>& metrics,
                        const std::vector<LengthBucketRow>& buckets,
                        const std::filesystem::path& out_dir) {
    if (metrics.empty()) throw InputError("emit_report: no metrics to report");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw InputError("cannot create output directory: " + out_dir.string());

    double macro = 0.0;
    for (const auto& m : metrics) macro += m.f1;
    macro /= static_cast<double>(metrics.size());

    // --- report.md
    std::string md;
    md += "# Evaluation report\n\n";
    md += "total_examples: " + std::to_string(cm.total) + "\n";
    md += "macro_f1: " + detail::fmt("%.4f", macro) + "\n\n";

    md += "## Gold label distribution\n\n";
    md += "| label | count | proportion |\n|---|---:|---:|\n";
    for (std::size_t c = 0; c < cm.classes.size(); ++c) {
        const auto support = cm.row_sum(c);
        md += "| " + detail::class_display(cm.classes[c]) + " | " +
              std::to_string(support) + " | " +
              detail::fmt("%.4f", static_cast<double>(support) /
                                      static_cast<double>(cm.total)) +
              " |\n";
    }

    md += "\n## Per-class metrics\n\n";
    md += "| class | precision | recall | f1 | support |\n|---|---:|---:|---:|---:|\n";
    for (const auto& m : metrics) {
        md += "| " + detail::class_display(m.label) + " | " +
              detail::fmt("%.4f", m.precision) + " | " + detail::fmt("%.4f", m.recall) +
              " | " + detail::fmt("%.4f", m.f1) + " | " + std::to_string(m.support) +
              " |\n";
    }

    md += "\n## Confusion matrix (rows gold, columns predicted)\n\n";
    md += "| gold \\ pred |";
    for (const auto c : cm.classes) md += " " + std::to_string(c) + " |";
    md += "\n|---|";
    for (std::size_t j = 0; j < cm.classes.size(); ++j) md += "---:|";
    md += "\n";
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        md += "| " + std::to_string(cm.classes[i]) + " |";
        for (std::size_t j = 0; j < cm.classes.size(); ++j)
            md += " " + std::to_string(cm.cells[i][j]) + " |";
        md += "\n";
    }

    if (!buckets.empty()) {
        md += "\n## Length-bucket analysis\n\n";
        md += "| bucket | macro_f1 | count | percentage |\n|---|---:|---:|---:|\n";
        for (const auto& row : buckets) {
            md += "| " + row.label + " | " + detail::fmt("%.4f", row.macro_f1) + " | " +
                  std::to_string(row.count) + " | " + detail::fmt("%.3f", row.percentage) +
                  " |\n";
        }
    }

    // --- report.json
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& m : metrics) {
        per_class.push_back({{"class", m.label},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}});
    }
    nlohmann::json distribution = nlohmann::json::array();
    for (std::size_t c = 0; c < cm.classes.size(); ++c) {
        distribution.push_back(
            {{"class", cm.classes[c]},
             {"count", cm.row_sum(c)},
             {"proportion",
              static_cast<double>(cm.row_sum(c)) / static_cast<double>(cm.total)}});
    }
    nlohmann::json bucket_rows = nlohmann::json::array();
    for (const auto& row : buckets) {
        bucket_rows.push_back({{"bucket", row.label},
                               {"upper_edge", row.upper ? nlohmann::json(*row.upper)
                                                        : nlohmann::json(nullptr)},
                               {"macro_f1", row.macro_f1},
                               {"count", row.count},
                               {"percentage", row.percentage}});
    }
    const nlohmann::json report{
        {"schema", "vitd.report/1"},
        {"total", cm.total},
        {"macro_f1", macro},
        {"classes", cm.classes},
        {"confusion_matrix", cm.cells},
        {"per_class", std::move(per_class)},
        {"distribution", std::move(distribution)},
        {"buckets", std::move(bucket_rows)},
    };

    // --- plot_data.csv
    std::string csv = "bucket_label,upper_edge,macro_f1,count,percentage\n";
    for (const auto& row : buckets) {
        csv += "\"" + row.label + "\"," +
               (row.upper ? std::to_string(*row.upper) : "inf") + "," +
               detail::fmt("%.4f", row.macro_f1) + "," + std::to_string(row.count) +
               "," + detail::fmt("%.3f", row.percentage) + "\n";
    }

    const auto write = [&](const char* name, const std::string& data) {
        const auto path = out_dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InputError("cannot write report file: " + path.string());
        out << data;
        if (!out) throw InputError("write failed: " + path.string());
    };
    write("report.md", md);
    write("report.json", report.dump(2) + "\n");
    write("plot_data.csv", csv);
}

}  // namespace vitd::eval
