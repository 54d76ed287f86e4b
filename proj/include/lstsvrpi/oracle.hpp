/**
 * @file
 * @brief Independent check of the closed forms: the raw KKT equations of one
 *        bound problem assembled into a single square system and solved directly.
 *
 * Unknowns are stacked as [v; v*; multiplier]. For the down side:
 *
 *   (G^T G + c1 I) v            - G^T alpha = G^T Y
 *                     c2 v*    + G*^T alpha = -c3 G*^T e
 *   -G v            + G* v*                 = -Y - eps1 e
 *
 * and for the up side:
 *
 *   (G^T G + c4 I) v            + G^T beta  = G^T Y
 *                     c5 v*    + G*^T beta  = -c6 G*^T e
 *    G v            + G* v*                 = Y - eps2 e
 *
 * Nothing here reuses the eliminations in model.hpp; only solve_dense is shared.
 */

#pragma once

#include "lstsvrpi/error.hpp"
#include "lstsvrpi/linalg.hpp"
#include "lstsvrpi/model.hpp"

namespace lstsvrpi {

enum class bound_side { down, up };

struct stacked_system {
    matrix a;
    vector b;
    Eigen::Index v_size{};
    Eigen::Index v_star_size{};
    Eigen::Index multiplier_size{};

    [[nodiscard]] Eigen::Index size() const noexcept { return v_size + v_star_size + multiplier_size; }
};

struct stacked_solution {
    vector v;
    vector v_star;
    vector multiplier;
    double residual{};  ///< ||A x - b||_inf
};

[[nodiscard]] inline stacked_system assemble_stacked_kkt(const fit_workspace &ws, const vector &y, const hyperparams &hp, bound_side side) {
    const auto m = ws.g.rows();
    if (ws.g_star.rows() != m || y.size() != m) {
        throw data_error{ "assemble_stacked_kkt: inconsistent sample counts" };
    }
    const auto q = ws.g.cols();
    const auto qs = ws.g_star.cols();
    const bool down = side == bound_side::down;
    const double c_reg = down ? hp.c1 : hp.c4;
    const double c_cor = down ? hp.c2 : hp.c5;
    const double c_lin = down ? hp.c3 : hp.c6;
    const double eps = down ? hp.eps1 : hp.eps2;
    const vector e = vector::Ones(m);

    stacked_system sys{ matrix::Zero(q + qs + m, q + qs + m), vector::Zero(q + qs + m), q, qs, m };
    auto &a = sys.a;
    auto &b = sys.b;

    a.block(0, 0, q, q) = ws.g.transpose() * ws.g + c_reg * matrix::Identity(q, q);
    a.block(0, q + qs, q, m) = (down ? -1.0 : 1.0) * ws.g.transpose();
    b.segment(0, q) = ws.g.transpose() * y;

    a.block(q, q, qs, qs) = c_cor * matrix::Identity(qs, qs);
    a.block(q, q + qs, qs, m) = ws.g_star.transpose();
    b.segment(q, qs) = -c_lin * (ws.g_star.transpose() * e);

    a.block(q + qs, 0, m, q) = (down ? -1.0 : 1.0) * ws.g;
    a.block(q + qs, q, m, qs) = ws.g_star;
    b.segment(q + qs, m) = down ? vector(-y - eps * e) : vector(y - eps * e);
    return sys;
}

[[nodiscard]] inline stacked_solution solve_stacked_kkt(const fit_workspace &ws, const vector &y, const hyperparams &hp, bound_side side) {
    hp.validate();
    const stacked_system sys = assemble_stacked_kkt(ws, y, hp, side);
    const vector x = solve_dense(sys.a, sys.b);
    return { x.segment(0, sys.v_size),
             x.segment(sys.v_size, sys.v_star_size),
             x.segment(sys.v_size + sys.v_star_size, sys.multiplier_size),
             inf_norm(sys.a * x - sys.b) };
}

}  // namespace lstsvrpi
