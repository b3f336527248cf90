#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sunbroker/detail/linalg.hpp"
#include "sunbroker/errors.hpp"
#include "sunbroker/forecast.hpp"
#include "sunbroker/svr.hpp"

namespace sunbroker {

enum class ModelKind { naive, ols, ridge, lasso, svr };

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::naive: return "naive";
        case ModelKind::ols: return "ols";
        case ModelKind::ridge: return "ridge";
        case ModelKind::lasso: return "lasso";
        case ModelKind::svr: return "svr";
    }
    return "?";
}

inline ModelKind model_kind_from(const std::string& s) {
    for (auto k : {ModelKind::naive, ModelKind::ols, ModelKind::ridge, ModelKind::lasso,
                   ModelKind::svr})
        if (s == to_string(k)) return k;
    throw NotFoundError("unknown model kind '" + s + "'");
}

// Per-feature affine normalization fitted on the training block. Columns with
// no variance keep scale 1 and are flagged so their weights can be pinned to
// zero.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> scale; // strictly positive
    std::vector<bool> degenerate;

    static Standardization fit(const detail::Matrix& x) {
        const std::size_t n = x.rows, d = x.cols;
        Standardization s;
        s.mean.assign(d, 0.0);
        s.scale.assign(d, 1.0);
        s.degenerate.assign(d, false);
        for (std::size_t j = 0; j < d; ++j) {
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i) m += x(i, j);
            m /= double(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) var += (x(i, j) - m) * (x(i, j) - m);
            var /= double(n);
            s.mean[j] = m;
            if (var > 1e-24)
                s.scale[j] = std::sqrt(var);
            else
                s.degenerate[j] = true; // zero-variance feature, scale stays 1
        }
        return s;
    }

    detail::Matrix apply(const detail::Matrix& x) const {
        detail::Matrix out(x.rows, x.cols);
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < x.cols; ++j)
                out(i, j) = (x(i, j) - mean[j]) / scale[j];
        return out;
    }

    std::vector<double> apply_row(std::span<const double> row) const {
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
        return out;
    }
};

struct Hyperparameters {
    double ridge_lambda = 1.0;
    double lasso_lambda = 0.01;
    double lasso_tol = 1e-6;
    std::size_t lasso_max_iter = 10000;
    double svr_c = 10.0;
    double svr_epsilon = -1.0; // < 0 means the default 0.01 * p_mpp
    double svr_gamma = -1.0;   // < 0 means the default 1 / dimension
    double svr_tol = 1e-3;
    std::size_t svr_max_iter = 200000;
};

struct FittedModel {
    ModelKind kind = ModelKind::naive;
    std::size_t dimension = 0;
    double p_mpp = 0.0;
    Standardization standardization;
    std::vector<double> weights; // linear family, standardized feature space
    double intercept = 0.0;
    Hyperparameters hyper;
    bool degenerate_warning = false; // some feature had zero variance
    std::optional<SvrParams> svr;
};

namespace detail {

inline void zero_degenerate(std::vector<double>& w, const Standardization& s) {
    for (std::size_t j = 0; j < w.size(); ++j)
        if (s.degenerate[j]) w[j] = 0.0;
}

inline std::vector<double> fit_ols(const Matrix& xs, const std::vector<double>& yc) {
    return solve_least_squares(xs, yc);
}

inline std::vector<double> fit_ridge(const Matrix& xs, const std::vector<double>& yc,
                                     double lambda) {
    const std::size_t n = xs.rows, d = xs.cols;
    Matrix gram(d, d);
    std::vector<double> rhs(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            rhs[j] += xs(i, j) * yc[i];
            for (std::size_t k = j; k < d; ++k) gram(j, k) += xs(i, j) * xs(i, k);
        }
    for (std::size_t j = 0; j < d; ++j) {
        gram(j, j) += lambda;
        for (std::size_t k = 0; k < j; ++k) gram(j, k) = gram(k, j);
    }
    if (auto w = solve_spd(gram, rhs)) return *w;
    // singular normal equations (only possible at lambda ~ 0): fall back
    return solve_least_squares(xs, yc);
}

// Cyclic coordinate descent on (1/2n)||y - Xw||^2 + lambda*||w||_1 with
// soft-thresholding. Standardized columns make every curvature term equal n.
inline std::vector<double> fit_lasso(const Matrix& xs, const std::vector<double>& yc,
                                     double lambda, double tol, std::size_t max_iter,
                                     const Standardization& std_info) {
    const std::size_t n = xs.rows, d = xs.cols;
    std::vector<double> w(d, 0.0);
    std::vector<double> residual = yc; // r = y - Xw
    std::vector<double> colsq(d, 0.0);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < n; ++i) colsq[j] += xs(i, j) * xs(i, j);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (std_info.degenerate[j] || colsq[j] <= 0.0) continue;
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += xs(i, j) * residual[i];
            rho += colsq[j] * w[j]; // x_j' (r + x_j w_j)
            const double z = colsq[j] / double(n);
            const double arg = rho / double(n);
            double w_new = 0.0;
            if (arg > lambda)
                w_new = (arg - lambda) / z;
            else if (arg < -lambda)
                w_new = (arg + lambda) / z;
            const double delta = w_new - w[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= xs(i, j) * delta;
                w[j] = w_new;
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (max_delta < tol) return w;
    }
    throw ConvergenceError("lasso coordinate descent did not converge", max_iter);
}

} // namespace detail

// Smallest penalty at which the lasso solution is identically zero.
inline double lasso_lambda_max(const detail::Matrix& xs, const std::vector<double>& yc) {
    double best = 0.0;
    for (std::size_t j = 0; j < xs.cols; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < xs.rows; ++i) dot += xs(i, j) * yc[i];
        best = std::max(best, std::abs(dot) / double(xs.rows));
    }
    return best;
}

inline FittedModel fit(const TrainingSet& train, ModelKind kind,
                       const Hyperparameters& hyper = {}) {
    const std::size_t n = train.records.size();
    const std::size_t d = feature_dimension();

    FittedModel model;
    model.kind = kind;
    model.dimension = d;
    model.p_mpp = train.plant.p_mpp;
    model.hyper = hyper;

    if (kind == ModelKind::naive) return model; // clear-sky passthrough, nothing to fit

    // night rows (no clear-sky output) carry no signal and are left out
    std::vector<const Record*> rows;
    rows.reserve(n);
    for (const auto& r : train.records)
        if (r.clearsky > 0.0) rows.push_back(&r);
    const std::size_t n_used = rows.size();

    if (kind == ModelKind::svr) {
        if (n_used < 2) throw DomainError("svr needs at least 2 daylight training records");
    } else if (n_used < d + 1) {
        throw DomainError("linear fit needs at least dimension+1 daylight records, got " +
                          std::to_string(n_used));
    }

    const Climatology history = climatology_from(train.records);
    detail::Matrix x(n_used, d);
    std::vector<double> y(n_used);
    for (std::size_t i = 0; i < n_used; ++i) {
        const Record& r = *rows[i];
        if (!(r.production >= 0.0 && r.production <= train.plant.p_mpp))
            throw DomainError("target outside [0, p_mpp] at " + format_iso8601(r.target_time));
        const FeatureVector fv = assemble_features(r, history);
        for (std::size_t j = 0; j < d; ++j) x(i, j) = fv.values[j];
        y[i] = r.production;
    }

    model.standardization = Standardization::fit(x);
    for (bool deg : model.standardization.degenerate)
        if (deg) model.degenerate_warning = true;
    const detail::Matrix xs = model.standardization.apply(x);

    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= double(n);
    std::vector<double> yc(n);
    for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - y_mean;

    switch (kind) {
        case ModelKind::ols:
            model.weights = detail::fit_ols(xs, yc);
            model.intercept = y_mean;
            break;
        case ModelKind::ridge:
            model.weights = detail::fit_ridge(xs, yc, hyper.ridge_lambda);
            model.intercept = y_mean;
            break;
        case ModelKind::lasso:
            model.weights = detail::fit_lasso(xs, yc, hyper.lasso_lambda, hyper.lasso_tol,
                                              hyper.lasso_max_iter, model.standardization);
            model.intercept = y_mean;
            break;
        case ModelKind::svr: {
            const double eps =
                hyper.svr_epsilon >= 0.0 ? hyper.svr_epsilon : 0.01 * train.plant.p_mpp;
            const double gamma = hyper.svr_gamma > 0.0 ? hyper.svr_gamma : 1.0 / double(d);
            std::vector<std::vector<double>> rows(n);
            for (std::size_t i = 0; i < n; ++i) {
                rows[i].resize(d);
                for (std::size_t j = 0; j < d; ++j) rows[i][j] = xs(i, j);
            }
            model.svr = svr_train(rows, y, hyper.svr_c, eps, gamma, hyper.svr_tol,
                                  hyper.svr_max_iter);
            break;
        }
        default: break;
    }
    if (!model.weights.empty()) detail::zero_degenerate(model.weights, model.standardization);
    return model;
}

inline double predict(const FittedModel& model, const FeatureVector& x, double p_mpp) {
    if (model.kind == ModelKind::naive) return x.clearsky();
    if (x.dimension() != model.dimension)
        throw ShapeError("feature dimension " + std::to_string(x.dimension()) +
                         " does not match model dimension " + std::to_string(model.dimension));

    double raw;
    if (model.kind == ModelKind::svr) {
        raw = svr_predict(*model.svr, model.standardization.apply_row(x.values));
    } else {
        const auto xs = model.standardization.apply_row(x.values);
        raw = model.intercept;
        for (std::size_t j = 0; j < xs.size(); ++j) raw += model.weights[j] * xs[j];
    }
    return std::clamp(raw, 0.0, p_mpp);
}

struct Metrics {
    double r2;
    double rmse;
    double mae;
    std::size_t n;
};

inline Metrics r2_score(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) throw ShapeError("series length mismatch");
    if (actual.size() < 2) throw DomainError("need at least 2 points to score");
    const std::size_t n = actual.size();

    double mean = 0.0;
    for (double a : actual) mean += a;
    mean /= double(n);

    double ss_tot = 0.0, ss_res = 0.0, abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
        const double e = actual[i] - predicted[i];
        ss_res += e * e;
        abs_sum += std::abs(e);
    }
    if (ss_tot == 0.0) throw DomainError("r2 undefined: actual series has zero variance");

    return Metrics{1.0 - ss_res / ss_tot, std::sqrt(ss_res / double(n)), abs_sum / double(n), n};
}

struct EvaluationRow {
    ModelKind kind;
    Metrics metrics;
};

// Chronological split: fit on the head, score on the tail. The climatology
// feature is rebuilt from the training block only, so no label information
// leaks across the split.
inline std::vector<EvaluationRow> evaluate(const TrainingSet& dataset, double split,
                                           std::span<const ModelKind> kinds,
                                           const Hyperparameters& hyper = {}) {
    if (!(split > 0.0 && split <= 1.0)) throw DomainError("split must be in (0, 1]");
    const std::size_t n = dataset.records.size();
    const std::size_t n_train = std::size_t(std::floor(double(n) * split));
    if (n_train == 0) throw DomainError("empty training set after split");
    if (n_train >= n) throw DomainError("empty test set after split");

    TrainingSet train{dataset.plant,
                      {dataset.records.begin(), dataset.records.begin() + long(n_train)}};
    const std::span<const Record> test(dataset.records.data() + n_train, n - n_train);
    const Climatology history = climatology_from(train.records);

    std::vector<EvaluationRow> rows;
    for (ModelKind kind : kinds) {
        FittedModel model = fit(train, kind, hyper);
        std::vector<double> actual, predicted;
        actual.reserve(test.size());
        predicted.reserve(test.size());
        for (const auto& r : test) {
            if (r.clearsky <= 0.0) continue; // night: trivially zero on both sides
            actual.push_back(r.production);
            predicted.push_back(predict(model, assemble_features(r, history), dataset.plant.p_mpp));
        }
        rows.push_back({kind, r2_score(actual, predicted)});
    }
    return rows;
}

} // namespace sunbroker
