/**
 * @file
 * @brief Closed-form Rademacher complexity and generalization bound for the
 *        averaged twin regressor with weight norms capped at B.
 */

#pragma once

#include "lstsvrpi/error.hpp"
#include "lstsvrpi/linalg.hpp"

#include <cmath>
#include <cstddef>

namespace lstsvrpi {

struct bound_inputs {
    double b{ 1.0 };  ///< weight-norm cap B
    double l{ 1.0 };  ///< Lipschitz constant of the loss; 1 is illustrative only, there is no canonical value
    double delta{ 0.05 };
    vector kernel_diag;  ///< K(x_i, x_i) over the training sample
    double empirical_error{ 0.0 };

    void validate() const {
        if (!(b > 0.0) || !(l > 0.0)) {
            throw usage_error{ "bounds: B and L must be positive" };
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            throw usage_error{ "bounds: delta must lie in (0, 1)" };
        }
        if (kernel_diag.size() == 0) {
            throw usage_error{ "bounds: empty kernel diagonal" };
        }
        if ((kernel_diag.array() < 0.0).any() || !kernel_diag.allFinite()) {
            throw usage_error{ "bounds: kernel diagonal entries must be finite and non-negative" };
        }
        if (!(empirical_error >= 0.0)) {
            throw usage_error{ "bounds: empirical error must be non-negative" };
        }
    }
};

/// (B / m) * sqrt(sum_i K(x_i, x_i))
[[nodiscard]] inline double rademacher_bound(double b, const vector &kernel_diag) {
    if (kernel_diag.size() == 0) {
        throw usage_error{ "rademacher_bound: empty kernel diagonal" };
    }
    if (!(b > 0.0)) {
        throw usage_error{ "rademacher_bound: B must be positive" };
    }
    return b / static_cast<double>(kernel_diag.size()) * std::sqrt(kernel_diag.sum());
}

/// empirical error + 2 L R_m + sqrt(ln(1/delta) / (2 m)), m = kernel_diag.size()
[[nodiscard]] inline double generalization_bound(const bound_inputs &in) {
    in.validate();
    const double m = static_cast<double>(in.kernel_diag.size());
    return in.empirical_error + 2.0 * in.l * rademacher_bound(in.b, in.kernel_diag) + std::sqrt(std::log(1.0 / in.delta) / (2.0 * m));
}

}  // namespace lstsvrpi
