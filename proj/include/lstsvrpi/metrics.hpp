#pragma once

#include "lstsvrpi/error.hpp"
#include "lstsvrpi/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>

namespace lstsvrpi {

/// Regression metrics of one evaluation. SST is taken about the mean of the actual targets.
struct metrics {
    double rmse{};
    double sse{};
    double sst{};
    std::optional<double> sse_over_sst{};  ///< empty when SST == 0
    std::size_t n{};
};

[[nodiscard]] inline metrics evaluate(const vector &y, const vector &y_hat) {
    if (y.size() != y_hat.size()) {
        throw data_error{ "evaluate: " + std::to_string(y.size()) + " targets but " + std::to_string(y_hat.size()) + " predictions" };
    }
    if (y.size() == 0) {
        throw data_error{ "evaluate: empty vectors" };
    }
    metrics out;
    out.n = static_cast<std::size_t>(y.size());
    out.sse = (y - y_hat).squaredNorm();
    out.sst = (y.array() - y.mean()).matrix().squaredNorm();
    out.rmse = std::sqrt(out.sse / static_cast<double>(out.n));
    if (out.sst > 0.0) {
        out.sse_over_sst = out.sse / out.sst;
    }
    return out;
}

[[nodiscard]] inline double aggregate_mean(std::span<const double> values) {
    if (values.empty()) {
        throw data_error{ "aggregate_mean: empty list" };
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace lstsvrpi
