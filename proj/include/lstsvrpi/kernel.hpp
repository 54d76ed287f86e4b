/**
 * @file
 * @brief Kernel functions and Gram matrices.
 */

#pragma once

#include "lstsvrpi/error.hpp"
#include "lstsvrpi/linalg.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace lstsvrpi {

enum class kernel_kind {
    linear,  ///< plain dot product
    rbf,     ///< exp(-||x - z||^2 / (2 mu^2))
};

struct kernel_spec {
    kernel_kind kind{ kernel_kind::rbf };
    double mu{ 1.0 };  ///< RBF width, ignored for the linear kernel

    [[nodiscard]] static kernel_spec linear() { return { kernel_kind::linear, 1.0 }; }
    [[nodiscard]] static kernel_spec rbf(double mu) { return { kernel_kind::rbf, mu }; }

    void validate() const {
        if (kind == kernel_kind::rbf && !(mu > 0.0 && std::isfinite(mu))) {
            throw usage_error{ "rbf kernel width must be positive, got " + std::to_string(mu) };
        }
    }

    friend bool operator==(const kernel_spec &, const kernel_spec &) = default;
};

[[nodiscard]] inline std::string_view to_string(kernel_kind k) {
    return k == kernel_kind::linear ? "linear" : "rbf";
}

[[nodiscard]] inline kernel_kind parse_kernel_kind(std::string_view s) {
    if (s == "linear") return kernel_kind::linear;
    if (s == "rbf") return kernel_kind::rbf;
    throw usage_error{ "unknown kernel '" + std::string{ s } + "' (expected linear or rbf)" };
}

template <typename X, typename Z>
[[nodiscard]] double kernel_eval(const Eigen::MatrixBase<X> &x, const Eigen::MatrixBase<Z> &z, const kernel_spec &spec) {
    if (x.size() != z.size()) {
        throw data_error{ "kernel_eval: vectors of length " + std::to_string(x.size()) + " and " + std::to_string(z.size()) };
    }
    if (spec.kind == kernel_kind::linear) {
        return x.reshaped().dot(z.reshaped());
    }
    const double sq = (x.reshaped() - z.reshaped()).squaredNorm();
    return std::exp(-sq / (2.0 * spec.mu * spec.mu));
}

/// Entry (i, j) = K(a_i, b_j).
[[nodiscard]] inline matrix gram(const matrix &a, const matrix &b, const kernel_spec &spec) {
    if (a.cols() != b.cols()) {
        throw data_error{ "gram: row vectors have " + std::to_string(a.cols()) + " and " + std::to_string(b.cols()) + " columns" };
    }
    spec.validate();
    // entrywise so that gram(a, b)^T == gram(b, a) holds bit for bit
    matrix out(a.rows(), b.rows());
    if (spec.kind == kernel_kind::linear) {
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            for (Eigen::Index i = 0; i < a.rows(); ++i) {
                out(i, j) = a.row(i).dot(b.row(j));
            }
        }
        return out;
    }
    const double scale = -1.0 / (2.0 * spec.mu * spec.mu);
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            out(i, j) = std::exp(scale * (a.row(i) - b.row(j)).squaredNorm());
        }
    }
    return out;
}

/// K(x_i, x_i) for every row.
[[nodiscard]] inline vector kernel_diagonal(const matrix &a, const kernel_spec &spec) {
    if (spec.kind == kernel_kind::rbf) {
        return vector::Ones(a.rows());
    }
    return a.rowwise().squaredNorm();
}

}  // namespace lstsvrpi
