/**
 * @file
 * @brief Regression data: CSV ingest, synthetic generation, min-max scaling,
 *        privileged/regular partition, train/test splits and lag embedding.
 */

#pragma once

#include "lstsvrpi/error.hpp"
#include "lstsvrpi/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace lstsvrpi {

/**
 * @brief Feature matrix (rows are samples) and the matching target vector.
 *
 * Invariants: features.rows() == targets.size(), every entry finite.
 */
struct dataset {
    matrix features;
    vector targets;
    std::vector<std::string> feature_names{};  ///< empty when the source had no header
    std::string target_name{};

    [[nodiscard]] std::size_t num_samples() const noexcept { return static_cast<std::size_t>(targets.size()); }
    [[nodiscard]] std::size_t num_features() const noexcept { return static_cast<std::size_t>(features.cols()); }

    void validate() const {
        if (features.rows() != targets.size()) {
            throw data_error{ "dataset: " + std::to_string(features.rows()) + " feature rows but " + std::to_string(targets.size()) + " targets" };
        }
        if (!features.allFinite() || !targets.allFinite()) {
            throw data_error{ "dataset: non-finite entries" };
        }
        if (!feature_names.empty() && feature_names.size() != num_features()) {
            throw data_error{ "dataset: feature name count does not match column count" };
        }
    }

    /// Subset of rows in the given order.
    [[nodiscard]] dataset rows(const std::vector<std::size_t> &idx) const {
        dataset out{ matrix(static_cast<Eigen::Index>(idx.size()), features.cols()), vector(static_cast<Eigen::Index>(idx.size())), feature_names, target_name };
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(idx[i]);
            out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
            out.targets(static_cast<Eigen::Index>(i)) = targets(r);
        }
        return out;
    }
};

/// Training data split into the regular (test-time) and privileged (training-only) channels.
struct pi_dataset {
    matrix regular;
    matrix privileged;
    vector targets;

    [[nodiscard]] std::size_t num_samples() const noexcept { return static_cast<std::size_t>(targets.size()); }

    void validate() const {
        const auto m = targets.size();
        if (regular.rows() != m || privileged.rows() != m) {
            throw data_error{ "pi_dataset: regular, privileged and targets must have the same number of rows" };
        }
        if (m == 0) {
            throw data_error{ "pi_dataset: no samples" };
        }
        if (regular.cols() < 1 || privileged.cols() < 1) {
            throw data_error{ "pi_dataset: both feature channels need at least one column" };
        }
        if (!regular.allFinite() || !privileged.allFinite() || !targets.allFinite()) {
            throw data_error{ "pi_dataset: non-finite entries" };
        }
    }

    [[nodiscard]] pi_dataset rows(const std::vector<std::size_t> &idx) const {
        const auto n = static_cast<Eigen::Index>(idx.size());
        pi_dataset out{ matrix(n, regular.cols()), matrix(n, privileged.cols()), vector(n) };
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
            out.regular.row(i) = regular.row(r);
            out.privileged.row(i) = privileged.row(r);
            out.targets(i) = targets(r);
        }
        return out;
    }
};

/// Column minima/maxima recorded on training data; the target is scaled the same way.
struct norm_stats {
    vector min;
    vector max;
    double target_min{ 0.0 };
    double target_max{ 1.0 };

    [[nodiscard]] std::size_t num_columns() const noexcept { return static_cast<std::size_t>(min.size()); }

    /// Stats of a contiguous column block (the target range is kept).
    [[nodiscard]] norm_stats slice(std::size_t first, std::size_t count) const {
        if (first + count > num_columns()) {
            throw data_error{ "norm_stats::slice: column range out of bounds" };
        }
        return { min.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)),
                 max.segment(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)),
                 target_min,
                 target_max };
    }
};

namespace detail {

// (x - lo) / (hi - lo); constant columns map to 0
[[nodiscard]] inline double scale_value(double x, double lo, double hi) {
    const double range = hi - lo;
    return range > 0.0 ? (x - lo) / range : 0.0;
}

}  // namespace detail

[[nodiscard]] inline vector scale_targets(const vector &y, const norm_stats &stats) {
    vector out(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        out(i) = detail::scale_value(y(i), stats.target_min, stats.target_max);
    }
    return out;
}

[[nodiscard]] inline matrix scale_features(const matrix &x, const norm_stats &stats) {
    if (static_cast<std::size_t>(x.cols()) != stats.num_columns()) {
        throw data_error{ "apply_norm: data has " + std::to_string(x.cols()) + " columns, normalization stats have " + std::to_string(stats.num_columns()) };
    }
    matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            out(i, j) = detail::scale_value(x(i, j), stats.min(j), stats.max(j));
        }
    }
    return out;
}

/// Apply stored training statistics (no clipping: out-of-range rows fall outside [0,1]).
[[nodiscard]] inline dataset apply_norm(const dataset &data, const norm_stats &stats) {
    dataset out = data;
    out.features = scale_features(data.features, stats);
    out.targets = scale_targets(data.targets, stats);
    return out;
}

/// Min-max scaling of every feature column and of the target.
[[nodiscard]] inline std::pair<dataset, norm_stats> min_max_normalize(const dataset &data) {
    data.validate();
    if (data.num_samples() == 0) {
        throw data_error{ "min_max_normalize: empty dataset" };
    }
    norm_stats stats{ data.features.colwise().minCoeff().transpose(), data.features.colwise().maxCoeff().transpose(), data.targets.minCoeff(), data.targets.maxCoeff() };
    return { apply_norm(data, stats), std::move(stats) };
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Selects the target column of a CSV file. Default: the last column.
struct column_selector {
    std::variant<std::monostate, std::size_t, std::string> which{};

    [[nodiscard]] static column_selector last() { return {}; }
    [[nodiscard]] static column_selector index(std::size_t i) { return { i }; }
    [[nodiscard]] static column_selector name(std::string n) { return { std::move(n) }; }

    /// "" -> last, all digits -> index, otherwise a header name.
    [[nodiscard]] static column_selector parse(std::string_view text) {
        if (text.empty() || text == "last") {
            return last();
        }
        if (std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            return index(static_cast<std::size_t>(std::stoull(std::string{ text })));
        }
        return name(std::string{ text });
    }
};

namespace detail {

[[nodiscard]] inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string{ s.substr(first, last - first + 1) };
}

[[nodiscard]] inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return cells;
}

[[nodiscard]] inline std::optional<double> parse_double(std::string_view cell) {
    if (cell.empty()) {
        return std::nullopt;
    }
    if (cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double value{};
    const auto *end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return value;
}

/// Shortest text that reads back to the same double.
[[nodiscard]] inline std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string{ "nan" };
}

}  // namespace detail

/// Parse comma-separated numeric rows; a first row with any non-numeric cell is a header.
[[nodiscard]] inline dataset parse_csv(std::istream &in, const column_selector &target = column_selector::last()) {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t width = 0;
    std::size_t data_row = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cells = detail::split_csv_line(line);
        if (first) {
            first = false;
            width = cells.size();
            const bool numeric = std::all_of(cells.begin(), cells.end(), [](const std::string &c) { return detail::parse_double(c).has_value(); });
            if (!numeric) {
                header = std::move(cells);
                continue;
            }
        }
        ++data_row;
        if (cells.size() != width) {
            throw data_error{ "csv: row " + std::to_string(data_row) + " has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(width) };
        }
        std::vector<double> values(width);
        for (std::size_t j = 0; j < width; ++j) {
            const auto v = detail::parse_double(cells[j]);
            if (!v || !std::isfinite(*v)) {
                throw data_error{ "csv: non-numeric cell '" + cells[j] + "' at row " + std::to_string(data_row) + ", column " + std::to_string(j + 1) };
            }
            values[j] = *v;
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw data_error{ "csv: no data rows" };
    }

    std::size_t tcol = width - 1;
    if (const auto *idx = std::get_if<std::size_t>(&target.which)) {
        if (*idx >= width) {
            throw data_error{ "csv: target column index " + std::to_string(*idx) + " out of range (" + std::to_string(width) + " columns)" };
        }
        tcol = *idx;
    } else if (const auto *name = std::get_if<std::string>(&target.which)) {
        const auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) {
            throw data_error{ "csv: target column '" + *name + "' not found" };
        }
        tcol = static_cast<std::size_t>(it - header.begin());
    }

    dataset out{ matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1)), vector(static_cast<Eigen::Index>(rows.size())) };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < width; ++j) {
            if (j == tcol) {
                out.targets(static_cast<Eigen::Index>(i)) = rows[i][j];
            } else {
                out.features(static_cast<Eigen::Index>(i), col++) = rows[i][j];
            }
        }
    }
    if (!header.empty()) {
        for (std::size_t j = 0; j < width; ++j) {
            if (j == tcol) {
                out.target_name = header[j];
            } else {
                out.feature_names.push_back(header[j]);
            }
        }
    }
    return out;
}

[[nodiscard]] inline dataset load_csv(const std::filesystem::path &path, const column_selector &target = column_selector::last()) {
    std::ifstream in{ path };
    if (!in) {
        throw data_error{ "cannot open '" + path.string() + "'" };
    }
    try {
        return parse_csv(in, target);
    } catch (const data_error &e) {
        throw data_error{ path.string() + ": " + e.what() };
    }
}

/// Writes features then target as the last column, with a header row.
inline void write_csv(std::ostream &out, const dataset &data) {
    const auto d = data.num_features();
    for (std::size_t j = 0; j < d; ++j) {
        out << (data.feature_names.empty() ? "x" + std::to_string(j + 1) : data.feature_names[j]) << ',';
    }
    out << (data.target_name.empty() ? "y" : data.target_name) << '\n';
    for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
            out << detail::format_double(data.features(i, j)) << ',';
        }
        out << detail::format_double(data.targets(i)) << '\n';
    }
}

inline void write_csv(const std::filesystem::path &path, const dataset &data) {
    std::ofstream out{ path };
    if (!out) {
        throw data_error{ "cannot write '" + path.string() + "'" };
    }
    write_csv(out, data);
}

/// Reads one numeric column (default: the last) of a CSV file as a series.
[[nodiscard]] inline vector load_series(const std::filesystem::path &path, const column_selector &column = column_selector::last()) {
    return load_csv(path, column).targets;
}

// ---------------------------------------------------------------------------
// Partition, splits, lag embedding
// ---------------------------------------------------------------------------

/// Number of regular columns for d features: ceil(d / 2).
[[nodiscard]] constexpr std::size_t regular_column_count(std::size_t d) noexcept {
    return (d + 1) / 2;
}

/// First ceil(d/2) columns become regular, the rest privileged.
[[nodiscard]] inline pi_dataset split_privileged(const dataset &data) {
    const auto d = data.num_features();
    if (d < 2) {
        throw data_error{ "insufficient features for PI split (need at least 2, have " + std::to_string(d) + ")" };
    }
    const auto dr = static_cast<Eigen::Index>(regular_column_count(d));
    const auto dp = static_cast<Eigen::Index>(d) - dr;
    return { data.features.leftCols(dr), data.features.rightCols(dp), data.targets };
}

struct ratio_split {
    double ratio{ 0.7 };
    std::uint64_t seed{ 0 };
};

struct head_split {
    std::size_t count{ 0 };
};

using split_scheme = std::variant<ratio_split, head_split>;

/// Deterministic shuffle of 0..m-1.
[[nodiscard]] inline std::vector<std::size_t> shuffled_indices(std::size_t m, std::uint64_t seed) {
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{ 0 });
    std::mt19937_64 rng{ seed };
    // Fisher-Yates with explicit modulo-free draws so the order does not depend on the standard library
    for (std::size_t i = m; i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r = rng();
        while (r >= limit) {
            r = rng();
        }
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(r % bound)]);
    }
    return idx;
}

[[nodiscard]] inline std::pair<dataset, dataset> train_test_split(const dataset &data, const split_scheme &scheme) {
    const auto m = data.num_samples();
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    if (const auto *r = std::get_if<ratio_split>(&scheme)) {
        if (!(r->ratio > 0.0 && r->ratio < 1.0)) {
            throw usage_error{ "train_test_split: ratio must lie strictly between 0 and 1" };
        }
        const auto n_train = static_cast<std::size_t>(std::llround(r->ratio * static_cast<double>(m)));
        if (n_train == 0 || n_train >= m) {
            throw data_error{ "train_test_split: ratio " + std::to_string(r->ratio) + " leaves an empty side for " + std::to_string(m) + " rows" };
        }
        const auto idx = shuffled_indices(m, r->seed);
        train_idx.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_idx.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    } else {
        const auto count = std::get<head_split>(scheme).count;
        if (count == 0 || count >= m) {
            throw data_error{ "train_test_split: head count " + std::to_string(count) + " must be in [1, " + std::to_string(m) + ")" };
        }
        train_idx.resize(count);
        std::iota(train_idx.begin(), train_idx.end(), std::size_t{ 0 });
        test_idx.resize(m - count);
        std::iota(test_idx.begin(), test_idx.end(), count);
    }
    return { data.rows(train_idx), data.rows(test_idx) };
}

/// Row t: [s_{t-lags}, ..., s_{t-1}] -> s_t.
[[nodiscard]] inline dataset lag_embed(const vector &series, std::size_t lags) {
    const auto len = static_cast<std::size_t>(series.size());
    if (lags < 1 || len <= lags) {
        throw data_error{ "lag_embed: series of length " + std::to_string(len) + " is too short for " + std::to_string(lags) + " lags" };
    }
    const auto m = static_cast<Eigen::Index>(len - lags);
    const auto l = static_cast<Eigen::Index>(lags);
    dataset out{ matrix(m, l), vector(m) };
    for (Eigen::Index t = 0; t < m; ++t) {
        out.features.row(t) = series.segment(t, l).transpose();
        out.targets(t) = series(t + l);
    }
    for (std::size_t k = lags; k >= 1; --k) {
        out.feature_names.push_back("lag" + std::to_string(k));
    }
    out.target_name = "y";
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic benchmark functions
// ---------------------------------------------------------------------------

enum class synthetic_fn { f1, f2, f3, f4 };

enum class noise_kind {
    uniform_pm02,  ///< U[-0.2, 0.2]
    gaussian_005,  ///< N(0, 0.05^2)
    gaussian_02,   ///< N(0, 0.2^2)
};

struct noise_spec {
    noise_kind kind{ noise_kind::uniform_pm02 };
    std::uint64_t seed{ 0 };
};

[[nodiscard]] inline std::string_view to_string(synthetic_fn fn) {
    switch (fn) {
        case synthetic_fn::f1: return "f1";
        case synthetic_fn::f2: return "f2";
        case synthetic_fn::f3: return "f3";
        case synthetic_fn::f4: return "f4";
    }
    return "?";
}

[[nodiscard]] inline std::string_view to_string(noise_kind k) {
    switch (k) {
        case noise_kind::uniform_pm02: return "uniform";
        case noise_kind::gaussian_005: return "gauss005";
        case noise_kind::gaussian_02: return "gauss02";
    }
    return "?";
}

[[nodiscard]] inline synthetic_fn parse_synthetic_fn(std::string_view s) {
    if (s == "f1") return synthetic_fn::f1;
    if (s == "f2") return synthetic_fn::f2;
    if (s == "f3") return synthetic_fn::f3;
    if (s == "f4") return synthetic_fn::f4;
    throw usage_error{ "unknown synthetic function '" + std::string{ s } + "' (expected f1..f4)" };
}

[[nodiscard]] inline noise_kind parse_noise_kind(std::string_view s) {
    if (s == "uniform" || s == "uniform_pm02") return noise_kind::uniform_pm02;
    if (s == "gauss005" || s == "gaussian_005") return noise_kind::gaussian_005;
    if (s == "gauss02" || s == "gaussian_02") return noise_kind::gaussian_02;
    throw usage_error{ "unknown noise kind '" + std::string{ s } + "' (expected uniform, gauss005, gauss02)" };
}

[[nodiscard]] constexpr std::size_t input_dimension(synthetic_fn fn) noexcept {
    return fn == synthetic_fn::f2 ? 5 : 2;
}

/// Sampling domain [lo, hi] shared by all inputs of the function.
[[nodiscard]] constexpr std::pair<double, double> input_domain(synthetic_fn fn) noexcept {
    switch (fn) {
        case synthetic_fn::f1: return { -4.0 * std::numbers::pi, 4.0 * std::numbers::pi };
        case synthetic_fn::f2: return { 0.0, 1.0 };
        case synthetic_fn::f3: return { -1.0, 1.0 };
        case synthetic_fn::f4: return { 0.0, 1.0 };
    }
    return { 0.0, 1.0 };
}

[[nodiscard]] inline double evaluate_synthetic(synthetic_fn fn, const Eigen::Ref<const vector> &x) {
    using std::numbers::pi;
    if (static_cast<std::size_t>(x.size()) != input_dimension(fn)) {
        throw data_error{ "evaluate_synthetic: wrong input dimension" };
    }
    switch (fn) {
        case synthetic_fn::f1: {
            const double r = std::hypot(x(0), x(1));
            return r == 0.0 ? 1.0 : std::sin(r) / r;
        }
        case synthetic_fn::f2:
            return 10.0 * std::sin(pi * x(0) * x(1)) + 20.0 * (x(2) - 0.5) * (x(2) - 0.5) + 10.0 * x(3) + 5.0 * x(4);
        case synthetic_fn::f3:
            return std::exp(x(0) * std::sin(pi * x(1)));
        case synthetic_fn::f4:
            return 1.9 * (1.35 + std::exp(x(0)) * std::sin(13.0 * (x(0) - 0.6) * (x(0) - 0.6)) + std::exp(3.0 * (x(1) - 0.5)) * std::sin(4.0 * pi * (x(1) - 0.9) * (x(1) - 0.9)));
    }
    return 0.0;
}

/**
 * @brief Draw n_train noisy and n_test clean samples of one benchmark function.
 *
 * Inputs are uniform on the function's domain. Noise (seeded by noise.seed) is
 * added to the training targets only; inputs come from `seed`.
 */
[[nodiscard]] inline std::pair<dataset, dataset> gen_synthetic(synthetic_fn fn, std::size_t n_train, std::size_t n_test, const noise_spec &noise, std::uint64_t seed) {
    if (n_train == 0 || n_test == 0) {
        throw usage_error{ "gen_synthetic: sample counts must be positive" };
    }
    const auto d = static_cast<Eigen::Index>(input_dimension(fn));
    const auto [lo, hi] = input_domain(fn);
    std::mt19937_64 input_rng{ seed };
    std::mt19937_64 noise_rng{ noise.seed };
    std::uniform_real_distribution<double> input_dist{ lo, hi };

    const auto draw = [&](std::size_t n, bool noisy) {
        dataset out{ matrix(static_cast<Eigen::Index>(n), d), vector(static_cast<Eigen::Index>(n)) };
        for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                out.features(i, j) = input_dist(input_rng);
            }
            double y = evaluate_synthetic(fn, out.features.row(i).transpose());
            if (noisy) {
                switch (noise.kind) {
                    case noise_kind::uniform_pm02: y += std::uniform_real_distribution<double>{ -0.2, 0.2 }(noise_rng); break;
                    case noise_kind::gaussian_005: y += std::normal_distribution<double>{ 0.0, 0.05 }(noise_rng); break;
                    case noise_kind::gaussian_02: y += std::normal_distribution<double>{ 0.0, 0.2 }(noise_rng); break;
                }
            }
            out.targets(i) = y;
        }
        for (Eigen::Index j = 0; j < d; ++j) {
            out.feature_names.push_back("x" + std::to_string(j + 1));
        }
        out.target_name = "y";
        return out;
    };
    auto train = draw(n_train, true);
    auto test = draw(n_test, false);
    return { std::move(train), std::move(test) };
}

}  // namespace lstsvrpi
