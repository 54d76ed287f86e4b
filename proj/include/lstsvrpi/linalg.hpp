/**
 * @file
 * @brief Dense linear algebra aliases and the checked general solver used by every fit.
 */

#pragma once

#include "lstsvrpi/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

namespace lstsvrpi {

using matrix = Eigen::MatrixXd;
using vector = Eigen::VectorXd;

[[nodiscard]] inline double inf_norm(const vector &v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

[[nodiscard]] inline bool all_finite(const matrix &m) {
    return m.allFinite();
}

/// Which route produced a solution of solve_dense.
enum class solve_route {
    lu,           ///< partial-pivoting LU, accepted on the first try
    min_norm,     ///< rank-revealing complete orthogonal decomposition (minimum-norm solution)
    jittered_lu,  ///< LU of A + jitter * I
};

struct solve_report {
    solve_route route{ solve_route::lu };
    double backward_error{ 0.0 };  ///< ||A x - b||_inf / (1 + ||b||_inf), always measured against the unperturbed A
    double rcond{ 1.0 };           ///< reciprocal condition estimate from the LU factorization
};

struct solve_options {
    double backward_tolerance{ 1e-6 };
    double jitter_scale{ 1e-10 };  ///< jitter = jitter_scale * trace(A) / n
};

namespace detail {

[[nodiscard]] inline double backward_error(const matrix &a, const vector &x, const vector &b) {
    if (!x.allFinite()) {
        return std::numeric_limits<double>::infinity();
    }
    return inf_norm(a * x - b) / (1.0 + inf_norm(b));
}

}  // namespace detail

/**
 * @brief Solve the square, generally nonsymmetric system A x = b.
 *
 * Order of attempts:
 *   1. LU with partial pivoting. Accepted when the backward error is within
 *      tolerance and the matrix is not numerically singular.
 *   2. Complete orthogonal decomposition, giving the minimum-norm solution of a
 *      consistent rank-deficient system.
 *   3. LU of A + jitter * I with jitter = 1e-10 * trace(A) / n.
 * If none passes the backward-error check a numerical_error carrying the
 * condition estimate is thrown.
 */
[[nodiscard]] inline vector solve_dense(const matrix &a, const vector &b, solve_report *report = nullptr, const solve_options &opt = {}) {
    const auto n = a.rows();
    if (a.cols() != n || b.size() != n) {
        throw data_error{ "solve_dense: expected a square system" };
    }
    if (n == 0) {
        return vector{};
    }
    if (!a.allFinite() || !b.allFinite()) {
        throw numerical_error{ "solve_dense: non-finite entries in the linear system" };
    }
    const double limit = opt.backward_tolerance;
    // numerically singular below this reciprocal condition estimate
    const double rcond_floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon();

    const Eigen::PartialPivLU<matrix> lu{ a };
    const double rcond = lu.rcond();
    vector x = lu.solve(b);
    double err = detail::backward_error(a, x, b);
    solve_report rep{ solve_route::lu, err, rcond };

    if (!(err <= limit) || !(rcond >= rcond_floor)) {
        const Eigen::CompleteOrthogonalDecomposition<matrix> cod{ a };
        vector y = cod.solve(b);
        const double cod_err = detail::backward_error(a, y, b);
        if (cod_err <= limit) {
            x = std::move(y);
            rep = { solve_route::min_norm, cod_err, rcond };
        } else if (!(err <= limit)) {
            const double jitter = opt.jitter_scale * std::abs(a.trace()) / static_cast<double>(n);
            matrix shifted = a;
            shifted.diagonal().array() += jitter;
            y = Eigen::PartialPivLU<matrix>{ shifted }.solve(b);
            const double jit_err = detail::backward_error(a, y, b);
            if (!(jit_err <= limit)) {
                std::ostringstream msg;
                msg << "singular linear system of size " << n << " (reciprocal condition estimate " << rcond
                    << ", backward error " << std::min(err, std::min(cod_err, jit_err)) << ")";
                throw numerical_error{ msg.str() };
            }
            x = std::move(y);
            rep = { solve_route::jittered_lu, jit_err, rcond };
        }
        // otherwise: LU passed the backward check but looked singular and the
        // minimum-norm route did not do better; keep the LU solution
    }
    if (report != nullptr) {
        *report = rep;
    }
    return x;
}

}  // namespace lstsvrpi
