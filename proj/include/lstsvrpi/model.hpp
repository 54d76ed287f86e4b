/**
 * @file
 * @brief Least squares twin support vector regression with privileged information.
 *
 * Two epsilon-insensitive bound regressors r1 (down) and r2 (up) are fitted,
 * each paired with a correcting function p1 / p2 over the privileged features
 * that stands in for the slack of an equality constraint. Training reduces to
 * dense linear systems:
 *
 *   alpha: [S + (c1/c2) H + (1/c2) S H] alpha
 *              = c1 Y + c1 eps1 e - (c1 c3 / c2) H e + eps1 S e - (c3/c2) S H e
 *   beta:  [S + (c4/c5) H + (1/c5) S H] beta
 *              = -c4 Y + c4 eps2 e - (c4 c6 / c5) H e + eps2 S e - (c6/c5) S H e
 *
 * with S = G G^T, H = G* G*^T, G = [M e] (or [K(M, M) e]) and G* = [M* e]
 * (or [K(M*, M*) e]). The weights then follow from
 *
 *   (G^T G + c1 I) v1 = G^T (Y + alpha),   v1* = -(1/c2) G*^T (c3 e + alpha)
 *   (G^T G + c4 I) v2 = G^T (Y - beta),    v2* = -(1/c5) G*^T (c6 e + beta)
 *
 * and the prediction is the mean of the two bound regressors. Privileged
 * features are only ever read during training.
 */

#pragma once

#include "lstsvrpi/dataset.hpp"
#include "lstsvrpi/error.hpp"
#include "lstsvrpi/kernel.hpp"
#include "lstsvrpi/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

namespace lstsvrpi {

/// Regularization constants, insensitivity margins and the feature map.
struct hyperparams {
    double c1{ 1.0 };
    double c2{ 1.0 };
    double c3{ 1.0 };
    double c4{ 1.0 };
    double c5{ 1.0 };
    double c6{ 1.0 };
    double eps1{ 0.01 };
    double eps2{ 0.01 };
    /// nullopt: linear feature space, G = [M e]; otherwise G = [K(M, M) e].
    std::optional<kernel_spec> kernel{ kernel_spec::rbf(1.0) };

    /// c1 = c4, c2 = c5, c3 = c6 and eps1 = eps2.
    [[nodiscard]] static hyperparams tied(double c1, double c2, double c3, std::optional<kernel_spec> kernel, double eps = 0.01) {
        return { c1, c2, c3, c1, c2, c3, eps, eps, kernel };
    }

    [[nodiscard]] bool kernelized() const noexcept { return kernel.has_value(); }

    void validate() const {
        const std::array<double, 6> cs{ c1, c2, c3, c4, c5, c6 };
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (!(cs[i] > 0.0) || !std::isfinite(cs[i])) {
                throw usage_error{ "hyperparams: c" + std::to_string(i + 1) + " must be positive and finite" };
            }
        }
        if (!(eps1 >= 0.0) || !(eps2 >= 0.0) || !std::isfinite(eps1) || !std::isfinite(eps2)) {
            throw usage_error{ "hyperparams: eps1 and eps2 must be non-negative" };
        }
        if (kernel) {
            kernel->validate();
        }
    }

    friend bool operator==(const hyperparams &, const hyperparams &) = default;
};

/// G and G* with their trailing ones column.
struct fit_workspace {
    matrix g;
    matrix g_star;
    vector ones;
};

/// Lagrange multipliers of the down (alpha) and up (beta) problems.
struct dual_solution {
    vector alpha;
    vector beta;
};

struct trained_model {
    vector v1;       ///< [u1; b1]
    vector v2;       ///< [u2; b2]
    vector v1_star;  ///< [u1*; b1*]
    vector v2_star;  ///< [u2*; b2*]
    dual_solution duals;
    hyperparams hp;
    matrix train_regular;
    matrix train_privileged;  ///< diagnostics only (correcting_values)
    vector train_targets;
    std::optional<norm_stats> norm{};  ///< regular-column stats; applied to inputs of predict when present

    [[nodiscard]] std::size_t num_regular() const noexcept { return static_cast<std::size_t>(train_regular.cols()); }
    [[nodiscard]] std::size_t num_privileged() const noexcept { return static_cast<std::size_t>(train_privileged.cols()); }
};

/// Infinity norms of the six stationarity / feasibility equations.
struct kkt_report {
    double down_stationarity{};  ///< c1 v1 - G^T (Y - G v1) - G^T alpha
    double down_correcting{};    ///< c2 v1* + c3 G*^T e + G*^T alpha
    double down_feasibility{};   ///< Y - G v1 + eps1 e + G* v1*
    double up_stationarity{};    ///< c4 v2 + G^T (G v2 - Y) + G^T beta
    double up_correcting{};      ///< c5 v2* + c6 G*^T e + G*^T beta
    double up_feasibility{};     ///< G v2 - Y + eps2 e + G* v2*

    [[nodiscard]] std::array<double, 6> values() const noexcept {
        return { down_stationarity, down_correcting, down_feasibility, up_stationarity, up_correcting, up_feasibility };
    }
    [[nodiscard]] double max() const noexcept {
        const auto v = values();
        return *std::max_element(v.begin(), v.end());
    }
};

struct fit_options {
    bool verify{ true };          ///< reject solutions whose KKT residuals exceed the tolerance
    double kkt_tolerance{ 1e-8 };  ///< relative to 1 + ||Y||_inf
};

namespace detail {

[[nodiscard]] inline matrix append_ones(const matrix &a) {
    matrix out(a.rows(), a.cols() + 1);
    out.leftCols(a.cols()) = a;
    out.col(a.cols()).setOnes();
    return out;
}

[[nodiscard]] inline matrix feature_block(const matrix &rows, const matrix &train_rows, const std::optional<kernel_spec> &kernel) {
    return kernel ? append_ones(gram(rows, train_rows, *kernel)) : append_ones(rows);
}

/// Products shared by the alpha and beta systems.
struct reduced_products {
    matrix s;    // G G^T
    matrix h;    // G* G*^T
    matrix sh;   // S H
    vector se;   // S e
    vector he;   // H e
    vector she;  // S H e
};

[[nodiscard]] inline reduced_products make_products(const fit_workspace &ws) {
    reduced_products p;
    p.s = ws.g * ws.g.transpose();
    p.h = ws.g_star * ws.g_star.transpose();
    p.sh = p.s * p.h;
    p.se = p.s * ws.ones;
    p.he = p.h * ws.ones;
    p.she = p.s * p.he;
    return p;
}

// [S + (ca/cb) H + (1/cb) S H] x = ca (sign Y) + ca eps e - (ca cc / cb) H e + eps S e - (cc/cb) S H e
[[nodiscard]] inline vector solve_multiplier(const reduced_products &p, const vector &y, double sign, double ca, double cb, double cc, double eps, solve_report *report) {
    const matrix a = p.s + (ca / cb) * p.h + (1.0 / cb) * p.sh;
    const vector rhs = (ca * sign) * y + vector::Constant(y.size(), ca * eps) - (ca * cc / cb) * p.he + eps * p.se - (cc / cb) * p.she;
    return solve_dense(a, rhs, report);
}

inline void check_targets(const fit_workspace &ws, const vector &y) {
    if (ws.g.rows() != y.size() || ws.g_star.rows() != y.size() || ws.ones.size() != y.size()) {
        throw data_error{ "workspace and target vector disagree on the number of samples" };
    }
    if (y.size() == 0) {
        throw data_error{ "no training samples" };
    }
}

}  // namespace detail

/// G = [regular | 1], G* = [privileged | 1] in linear mode, Gram blocks in kernel mode.
[[nodiscard]] inline fit_workspace build_workspace(const pi_dataset &data, const hyperparams &hp) {
    data.validate();
    hp.validate();
    return { detail::feature_block(data.regular, data.regular, hp.kernel),
             detail::feature_block(data.privileged, data.privileged, hp.kernel),
             vector::Ones(data.regular.rows()) };
}

[[nodiscard]] inline vector solve_alpha(const fit_workspace &ws, const vector &y, const hyperparams &hp, solve_report *report = nullptr) {
    detail::check_targets(ws, y);
    return detail::solve_multiplier(detail::make_products(ws), y, 1.0, hp.c1, hp.c2, hp.c3, hp.eps1, report);
}

[[nodiscard]] inline vector solve_beta(const fit_workspace &ws, const vector &y, const hyperparams &hp, solve_report *report = nullptr) {
    detail::check_targets(ws, y);
    return detail::solve_multiplier(detail::make_products(ws), y, -1.0, hp.c4, hp.c5, hp.c6, hp.eps2, report);
}

/// KKT residuals of a model against the workspace it was fitted on.
[[nodiscard]] inline kkt_report kkt_residuals(const trained_model &model, const fit_workspace &ws, const vector &y) {
    const auto &hp = model.hp;
    const auto &g = ws.g;
    const auto &gs = ws.g_star;
    const vector &e = ws.ones;
    const vector &alpha = model.duals.alpha;
    const vector &beta = model.duals.beta;
    if (g.cols() != model.v1.size() || gs.cols() != model.v1_star.size() || alpha.size() != y.size()) {
        throw data_error{ "kkt_residuals: model does not match the data it is checked against" };
    }
    const vector gv1 = g * model.v1;
    const vector gv2 = g * model.v2;
    kkt_report r;
    r.down_stationarity = inf_norm(hp.c1 * model.v1 - g.transpose() * (y - gv1) - g.transpose() * alpha);
    r.down_correcting = inf_norm(hp.c2 * model.v1_star + hp.c3 * (gs.transpose() * e) + gs.transpose() * alpha);
    r.down_feasibility = inf_norm(y - gv1 + hp.eps1 * e + gs * model.v1_star);
    r.up_stationarity = inf_norm(hp.c4 * model.v2 + g.transpose() * (gv2 - y) + g.transpose() * beta);
    r.up_correcting = inf_norm(hp.c5 * model.v2_star + hp.c6 * (gs.transpose() * e) + gs.transpose() * beta);
    r.up_feasibility = inf_norm(gv2 - y + hp.eps2 * e + gs * model.v2_star);
    return r;
}

[[nodiscard]] inline kkt_report kkt_residuals(const trained_model &model, const pi_dataset &data) {
    return kkt_residuals(model, build_workspace(data, model.hp), data.targets);
}

/// Fit from the closed-form multipliers, then (by default) verify all six KKT residuals.
[[nodiscard]] inline trained_model fit(const pi_dataset &data, const hyperparams &hp, const fit_options &opt = {}) {
    const fit_workspace ws = build_workspace(data, hp);
    const vector &y = data.targets;
    const auto products = detail::make_products(ws);

    trained_model model;
    model.hp = hp;
    model.duals.alpha = detail::solve_multiplier(products, y, 1.0, hp.c1, hp.c2, hp.c3, hp.eps1, nullptr);
    model.duals.beta = detail::solve_multiplier(products, y, -1.0, hp.c4, hp.c5, hp.c6, hp.eps2, nullptr);

    const matrix gtg = ws.g.transpose() * ws.g;
    const auto q = gtg.rows();
    model.v1 = solve_dense(gtg + hp.c1 * matrix::Identity(q, q), ws.g.transpose() * (y + model.duals.alpha));
    model.v2 = solve_dense(gtg + hp.c4 * matrix::Identity(q, q), ws.g.transpose() * (y - model.duals.beta));
    model.v1_star = -(1.0 / hp.c2) * (ws.g_star.transpose() * (hp.c3 * ws.ones + model.duals.alpha));
    model.v2_star = -(1.0 / hp.c5) * (ws.g_star.transpose() * (hp.c6 * ws.ones + model.duals.beta));
    model.train_regular = data.regular;
    model.train_privileged = data.privileged;
    model.train_targets = y;

    if (!model.v1.allFinite() || !model.v2.allFinite() || !model.v1_star.allFinite() || !model.v2_star.allFinite()) {
        throw numerical_error{ "fit: non-finite weights" };
    }
    if (opt.verify) {
        const kkt_report kkt = kkt_residuals(model, ws, y);
        const double limit = opt.kkt_tolerance * (1.0 + inf_norm(y));
        if (!(kkt.max() <= limit)) {
            std::ostringstream msg;
            msg << "fit: KKT verification failed (max residual " << kkt.max() << " > " << limit << ")";
            if (!hp.kernelized() && ws.g.cols() + ws.g_star.cols() < ws.g.rows()) {
                msg << "; in linear mode the equality constraints have " << ws.g.rows() << " rows but only "
                    << ws.g.cols() + ws.g_star.cols() << " unknowns and are infeasible unless the targets are exactly affine";
            } else {
                msg << "; the system is too ill-conditioned for these hyperparameters";
            }
            throw numerical_error{ msg.str() };
        }
    }
    return model;
}

namespace detail {

[[nodiscard]] inline matrix prediction_block(const trained_model &model, const matrix &x) {
    if (static_cast<std::size_t>(x.cols()) != model.num_regular()) {
        throw data_error{ "predict: expected " + std::to_string(model.num_regular()) + " regular feature columns, got " + std::to_string(x.cols()) };
    }
    const matrix scaled = model.norm ? scale_features(x, *model.norm) : x;
    return feature_block(scaled, model.train_regular, model.hp.kernel);
}

}  // namespace detail

/// Down- and up-bound regressors r1(x), r2(x) evaluated on regular features.
[[nodiscard]] inline std::pair<vector, vector> bound_functions(const trained_model &model, const matrix &x) {
    const matrix block = detail::prediction_block(model, x);
    return { block * model.v1, block * model.v2 };
}

/// (r1(x) + r2(x)) / 2. Takes regular features only.
[[nodiscard]] inline vector predict(const trained_model &model, const matrix &x) {
    const matrix block = detail::prediction_block(model, x);
    return 0.5 * (block * (model.v1 + model.v2));
}

/// Correcting functions p1(x*), p2(x*) on privileged rows (already on the training scale).
[[nodiscard]] inline std::pair<vector, vector> correcting_values(const trained_model &model, const matrix &x_star) {
    if (static_cast<std::size_t>(x_star.cols()) != model.num_privileged()) {
        throw data_error{ "correcting_values: expected " + std::to_string(model.num_privileged()) + " privileged columns, got " + std::to_string(x_star.cols()) };
    }
    const matrix block = detail::feature_block(x_star, model.train_privileged, model.hp.kernel);
    return { block * model.v1_star, block * model.v2_star };
}

// ---------------------------------------------------------------------------
// Kernel ridge regression comparator
// ---------------------------------------------------------------------------

struct krr_model {
    matrix train;
    vector coef;
    kernel_spec kernel;
    double ridge{};
};

/// Solves (K + ridge I) a = Y; predict(x) = K(x, train) a.
[[nodiscard]] inline krr_model fit_krr_comparator(const dataset &data, double ridge, const kernel_spec &kernel) {
    data.validate();
    kernel.validate();
    if (!(ridge > 0.0) || !std::isfinite(ridge)) {
        throw usage_error{ "fit_krr_comparator: ridge must be positive" };
    }
    if (data.num_samples() == 0) {
        throw data_error{ "fit_krr_comparator: no samples" };
    }
    matrix k = gram(data.features, data.features, kernel);
    k.diagonal().array() += ridge;
    return { data.features, solve_dense(k, data.targets), kernel, ridge };
}

[[nodiscard]] inline vector predict(const krr_model &model, const matrix &x) {
    if (x.cols() != model.train.cols()) {
        throw data_error{ "krr predict: expected " + std::to_string(model.train.cols()) + " feature columns, got " + std::to_string(x.cols()) };
    }
    return gram(x, model.train, model.kernel) * model.coef;
}

}  // namespace lstsvrpi
