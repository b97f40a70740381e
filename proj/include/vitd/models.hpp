#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vitd/errors.hpp"
#include "vitd/textproc.hpp"

// From-scratch linear classifiers over sparse TF-IDF vectors: multinomial
// logistic regression and one-vs-rest linear SVM. Training is full-batch and
// deterministic: identical inputs give byte-identical models.

namespace vitd::models {

using textproc::SparseVector;

enum class ModelKind { LogReg, Svm };

inline std::string kind_to_string(ModelKind k) {
    return k == ModelKind::LogReg ? "logreg" : "svm";
}

inline ModelKind kind_from_string(const std::string& s) {
    if (s == "logreg") return ModelKind::LogReg;
    if (s == "svm") return ModelKind::Svm;
    throw InputError("unknown model kind '" + s + "'");
}

struct LinearModel {
    ModelKind kind = ModelKind::LogReg;
    std::vector<int> classes;                  // ascending label codes
    std::vector<std::vector<double>> weights;  // [class][feature]
    std::vector<double> biases;                // [class]
    std::size_t feature_dim = 0;

    bool operator==(const LinearModel&) const = default;
};

struct TrainConfig {
    double learning_rate = 0.5;
    std::size_t epochs = 200;
    double l2_lambda = 1e-4;
    // Stop once per-epoch loss improvement drops below this; 0 disables the
    // early stop entirely (needed for exact warm-start continuation laws).
    double tolerance = 1e-7;
    std::optional<LinearModel> warm_start;
};

struct Prediction {
    int label = 0;
    std::vector<double> scores;  // per class; probabilities for logreg
};

namespace detail {

inline void validate_training_inputs(const std::vector<SparseVector>& X,
                                     const std::vector<int>& y,
                                     const TrainConfig& cfg) {
    if (X.empty()) throw TrainingError("training set is empty");
    if (X.size() != y.size())
        throw TrainingError("feature/label count mismatch: " +
                            std::to_string(X.size()) + " vs " +
                            std::to_string(y.size()));
    if (cfg.epochs == 0 && !cfg.warm_start)
        throw TrainingError("epochs >= 1");
    if (cfg.learning_rate <= 0.0) throw TrainingError("learning_rate must be > 0");
    if (cfg.l2_lambda < 0.0) throw TrainingError("l2_lambda must be >= 0");
    const std::size_t dim = X.front().dim;
    for (const auto& x : X) {
        if (x.dim != dim)
            throw TrainingError("feature dimension mismatch within training set");
    }
}

inline std::vector<int> class_list(const std::vector<int>& y) {
    const std::set<int> codes(y.begin(), y.end());
    if (codes.size() < 2)
        throw TrainingError("training requires >= 2 distinct classes, got " +
                            std::to_string(codes.size()));
    return {codes.begin(), codes.end()};
}

inline LinearModel init_model(ModelKind kind, const std::vector<int>& classes,
                              std::size_t dim, const TrainConfig& cfg) {
    if (cfg.warm_start) {
        const LinearModel& warm = *cfg.warm_start;
        if (warm.kind != kind) throw TrainingError("warm_start model kind mismatch");
        if (warm.classes != classes)
            throw TrainingError("warm_start class list mismatch");
        if (warm.feature_dim != dim)
            throw TrainingError("warm_start feature dimension mismatch");
        return warm;
    }
    LinearModel model;
    model.kind = kind;
    model.classes = classes;
    model.feature_dim = dim;
    model.weights.assign(classes.size(), std::vector<double>(dim, 0.0));
    model.biases.assign(classes.size(), 0.0);
    return model;
}

inline double dot_row(const std::vector<double>& w, const SparseVector& x) {
    double s = 0.0;
    for (const auto& [j, v] : x.entries) s += w[j] * v;
    return s;
}

// Softmax probabilities for one example; max-shifted for stability.
inline std::vector<double> softmax_scores(const LinearModel& m,
                                          const SparseVector& x) {
    const std::size_t k = m.classes.size();
    std::vector<double> s(k);
    for (std::size_t c = 0; c < k; ++c) s[c] = dot_row(m.weights[c], x) + m.biases[c];
    const double mx = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (auto& v : s) {
        v = std::exp(v - mx);
        z += v;
    }
    for (auto& v : s) v /= z;
    return s;
}

inline double weight_norm_sq(const LinearModel& m) {
    double sq = 0.0;
    for (const auto& row : m.weights)
        for (double w : row) sq += w * w;
    return sq;
}

}  // namespace detail

// Mean cross-entropy + (lambda/2)·||W||^2 (biases unregularized).
inline double logreg_loss(const LinearModel& m, const std::vector<SparseVector>& X,
                          const std::vector<int>& y, double l2_lambda) {
    double loss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto p = detail::softmax_scores(m, X[i]);
        const auto it = std::find(m.classes.begin(), m.classes.end(), y[i]);
        const auto c = static_cast<std::size_t>(it - m.classes.begin());
        loss -= std::log(std::max(p[c], 1e-300));
    }
    loss /= static_cast<double>(X.size());
    return loss + 0.5 * l2_lambda * detail::weight_norm_sq(m);
}

// Analytic gradient of logreg_loss at m; layout matches (weights, biases).
inline void logreg_gradient(const LinearModel& m, const std::vector<SparseVector>& X,
                            const std::vector<int>& y, double l2_lambda,
                            std::vector<std::vector<double>>& grad_w,
                            std::vector<double>& grad_b) {
    const std::size_t k = m.classes.size();
    grad_w.assign(k, std::vector<double>(m.feature_dim, 0.0));
    grad_b.assign(k, 0.0);
    const double inv_n = 1.0 / static_cast<double>(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto p = detail::softmax_scores(m, X[i]);
        const auto it = std::find(m.classes.begin(), m.classes.end(), y[i]);
        const auto yi = static_cast<std::size_t>(it - m.classes.begin());
        for (std::size_t c = 0; c < k; ++c) {
            const double coef = (p[c] - (c == yi ? 1.0 : 0.0)) * inv_n;
            for (const auto& [j, v] : X[i].entries) grad_w[c][j] += coef * v;
            grad_b[c] += coef;
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < m.feature_dim; ++j)
            grad_w[c][j] += l2_lambda * m.weights[c][j];
}

// Multinomial softmax regression by full-batch gradient descent from zero
// (or from cfg.warm_start). The recorded `loss_trace`, when given, holds the
// objective before each applied update.
inline LinearModel train_logreg(const std::vector<SparseVector>& X,
                                const std::vector<int>& y, const TrainConfig& cfg,
                                std::vector<double>* loss_trace = nullptr) {
    detail::validate_training_inputs(X, y, cfg);
    const auto classes = detail::class_list(y);
    LinearModel model = detail::init_model(ModelKind::LogReg, classes,
                                           X.front().dim, cfg);

    std::vector<std::vector<double>> grad_w;
    std::vector<double> grad_b;
    double prev_loss = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double loss = logreg_loss(model, X, y, cfg.l2_lambda);
        if (loss_trace) loss_trace->push_back(loss);
        if (cfg.tolerance > 0.0 && epoch > 0 && prev_loss - loss < cfg.tolerance)
            break;
        prev_loss = loss;

        logreg_gradient(model, X, y, cfg.l2_lambda, grad_w, grad_b);
        for (std::size_t c = 0; c < classes.size(); ++c) {
            for (std::size_t j = 0; j < model.feature_dim; ++j)
                model.weights[c][j] -= cfg.learning_rate * grad_w[c][j];
            model.biases[c] -= cfg.learning_rate * grad_b[c];
        }
    }
    return model;
}

// Summed one-vs-rest objective: per class, mean hinge + (lambda/2)·||w_c||^2.
inline double svm_loss(const LinearModel& m, const std::vector<SparseVector>& X,
                       const std::vector<int>& y, double l2_lambda) {
    double total = 0.0;
    const double inv_n = 1.0 / static_cast<double>(X.size());
    for (std::size_t c = 0; c < m.classes.size(); ++c) {
        double hinge = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            const double target = y[i] == m.classes[c] ? 1.0 : -1.0;
            const double margin =
                target * (detail::dot_row(m.weights[c], X[i]) + m.biases[c]);
            hinge += std::max(0.0, 1.0 - margin);
        }
        total += hinge * inv_n;
        double sq = 0.0;
        for (double w : m.weights[c]) sq += w * w;
        total += 0.5 * l2_lambda * sq;
    }
    return total;
}

// One-vs-rest L2-regularized hinge loss trained by full-batch subgradient
// descent with step learning_rate/sqrt(t) at epoch t (1-based), zero
// initialization. Degenerate inputs (identical rows, mixed labels) still
// return a model; prediction ties break toward the lowest class code.
inline LinearModel train_svm(const std::vector<SparseVector>& X,
                             const std::vector<int>& y, const TrainConfig& cfg,
                             std::vector<double>* loss_trace = nullptr) {
    detail::validate_training_inputs(X, y, cfg);
    const auto classes = detail::class_list(y);
    LinearModel model = detail::init_model(ModelKind::Svm, classes,
                                           X.front().dim, cfg);

    const std::size_t k = classes.size();
    const double inv_n = 1.0 / static_cast<double>(X.size());
    std::vector<std::vector<double>> grad_w(k);
    std::vector<double> grad_b(k);
    double prev_loss = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double loss = svm_loss(model, X, y, cfg.l2_lambda);
        if (loss_trace) loss_trace->push_back(loss);
        if (cfg.tolerance > 0.0 && epoch > 0 && prev_loss - loss < cfg.tolerance)
            break;
        prev_loss = loss;

        for (std::size_t c = 0; c < k; ++c) {
            grad_w[c].assign(model.feature_dim, 0.0);
            grad_b[c] = 0.0;
            for (std::size_t i = 0; i < X.size(); ++i) {
                const double target = y[i] == classes[c] ? 1.0 : -1.0;
                const double margin =
                    target * (detail::dot_row(model.weights[c], X[i]) +
                              model.biases[c]);
                if (margin < 1.0) {
                    const double coef = -target * inv_n;
                    for (const auto& [j, v] : X[i].entries)
                        grad_w[c][j] += coef * v;
                    grad_b[c] += coef;
                }
            }
            for (std::size_t j = 0; j < model.feature_dim; ++j)
                grad_w[c][j] += cfg.l2_lambda * model.weights[c][j];
        }

        const double step =
            cfg.learning_rate / std::sqrt(static_cast<double>(epoch + 1));
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < model.feature_dim; ++j)
                model.weights[c][j] -= step * grad_w[c][j];
            model.biases[c] -= step * grad_b[c];
        }
    }
    return model;
}

// scores = Wx + b (softmaxed for logreg); argmax with ties broken toward the
// lowest class code.
inline Prediction predict(const LinearModel& model, const SparseVector& x) {
    if (x.dim != model.feature_dim)
        throw InputError("predict: feature dimension mismatch: " +
                         std::to_string(x.dim) + " vs " +
                         std::to_string(model.feature_dim));
    Prediction pred;
    if (model.kind == ModelKind::LogReg) {
        pred.scores = detail::softmax_scores(model, x);
    } else {
        pred.scores.resize(model.classes.size());
        for (std::size_t c = 0; c < model.classes.size(); ++c)
            pred.scores[c] = detail::dot_row(model.weights[c], x) + model.biases[c];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < pred.scores.size(); ++c) {
        if (pred.scores[c] > pred.scores[best]) best = c;
    }
    pred.label = model.classes[best];
    return pred;
}

// Central-finite-difference check of the logreg gradient (h = 1e-5).
// Returns max over parameters of |ga - gn| / (1 + |ga| + |gn|).
inline double gradient_check(const LinearModel& theta,
                             const std::vector<SparseVector>& X,
                             const std::vector<int>& y, double l2_lambda) {
    constexpr double h = 1e-5;
    std::vector<std::vector<double>> grad_w;
    std::vector<double> grad_b;
    logreg_gradient(theta, X, y, l2_lambda, grad_w, grad_b);

    LinearModel probe = theta;
    double worst = 0.0;
    const auto check = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double above = logreg_loss(probe, X, y, l2_lambda);
        param = saved - h;
        const double below = logreg_loss(probe, X, y, l2_lambda);
        param = saved;
        const double numeric = (above - below) / (2.0 * h);
        const double rel = std::abs(analytic - numeric) /
                           (1.0 + std::abs(analytic) + std::abs(numeric));
        worst = std::max(worst, rel);
    };
    for (std::size_t c = 0; c < probe.classes.size(); ++c) {
        for (std::size_t j = 0; j < probe.feature_dim; ++j)
            check(probe.weights[c][j], grad_w[c][j]);
        check(probe.biases[c], grad_b[c]);
    }
    return worst;
}

inline nlohmann::json to_json(const LinearModel& model) {
    return nlohmann::json{
        {"schema", "vitd.linear/1"},
        {"kind", kind_to_string(model.kind)},
        {"classes", model.classes},
        {"feature_dim", model.feature_dim},
        {"weights", model.weights},
        {"biases", model.biases},
    };
}

inline LinearModel linear_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema").get<std::string>() != "vitd.linear/1")
            throw ModelIntegrityError("unsupported linear model schema");
        LinearModel model;
        model.kind = kind_from_string(j.at("kind").get<std::string>());
        model.classes = j.at("classes").get<std::vector<int>>();
        model.feature_dim = j.at("feature_dim").get<std::size_t>();
        model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        model.biases = j.at("biases").get<std::vector<double>>();
        if (model.weights.size() != model.classes.size() ||
            model.biases.size() != model.classes.size() ||
            model.classes.size() < 2) {
            throw ModelIntegrityError("linear model shape is inconsistent");
        }
        for (const auto& row : model.weights) {
            if (row.size() != model.feature_dim)
                throw ModelIntegrityError("linear model weight row has bad length");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ModelIntegrityError(std::string("malformed linear model: ") + e.what());
    }
}

}  // namespace vitd::models
