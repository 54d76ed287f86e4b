/**
 * @file
 * @brief Friedman test and Nemenyi post-hoc comparison of l models over n datasets.
 */

#pragma once

#include "lstsvrpi/dataset.hpp"
#include "lstsvrpi/error.hpp"
#include "lstsvrpi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lstsvrpi {

enum class score_direction { lower_better, higher_better };

/// Rows are datasets, columns are models.
struct score_table {
    matrix scores;
    score_direction direction{ score_direction::lower_better };
    std::vector<std::string> model_names{};
    std::vector<std::string> dataset_names{};

    void validate() const {
        if (scores.rows() < 2 || scores.cols() < 2) {
            throw data_error{ "score table needs at least 2 datasets and 2 models" };
        }
        if (!scores.allFinite()) {
            throw data_error{ "score table has non-finite entries" };
        }
    }
};

struct rank_result {
    matrix ranks;      ///< n x l, 1 = best
    vector avg_ranks;  ///< column means
};

/// Ranks within each row; tied scores share the mean of their rank positions.
[[nodiscard]] inline rank_result rank_rows(const score_table &table) {
    table.validate();
    const auto n = table.scores.rows();
    const auto l = table.scores.cols();
    rank_result out{ matrix(n, l), vector(l) };
    std::vector<Eigen::Index> order(static_cast<std::size_t>(l));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = table.scores.row(i);
        std::iota(order.begin(), order.end(), Eigen::Index{ 0 });
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return table.direction == score_direction::lower_better ? row(a) < row(b) : row(a) > row(b);
        });
        for (std::size_t start = 0; start < order.size();) {
            std::size_t end = start + 1;
            while (end < order.size() && row(order[end]) == row(order[start])) {
                ++end;
            }
            // positions start+1 .. end share their mean
            const double shared = 0.5 * static_cast<double>(start + 1 + end);
            for (std::size_t k = start; k < end; ++k) {
                out.ranks(i, order[k]) = shared;
            }
            start = end;
        }
    }
    out.avg_ranks = out.ranks.colwise().mean().transpose();
    return out;
}

struct friedman_result {
    double chi2_f{};
    std::optional<double> f_f{};  ///< empty when n (l - 1) - chi2_f <= 0
    std::size_t df_chi2{};        ///< l - 1
    std::size_t df1{};            ///< l - 1
    std::size_t df2{};            ///< (l - 1)(n - 1)

    [[nodiscard]] bool degenerate() const noexcept { return !f_f.has_value(); }
};

/**
 * chi2_F = 12 n / (l (l + 1)) * [sum r_i^2 - l (l + 1)^2 / 4]
 * F_F    = (n - 1) chi2_F / (n (l - 1) - chi2_F)
 */
[[nodiscard]] inline friedman_result friedman(const vector &avg_ranks, std::size_t n) {
    const auto l = static_cast<std::size_t>(avg_ranks.size());
    if (l < 2 || n < 2) {
        throw usage_error{ "friedman: need at least 2 models and 2 datasets" };
    }
    const double nd = static_cast<double>(n);
    const double ld = static_cast<double>(l);
    friedman_result out;
    out.chi2_f = 12.0 * nd / (ld * (ld + 1.0)) * (avg_ranks.squaredNorm() - ld * (ld + 1.0) * (ld + 1.0) / 4.0);
    const double denom = nd * (ld - 1.0) - out.chi2_f;
    if (denom > 0.0) {
        out.f_f = (nd - 1.0) * out.chi2_f / denom;
    }
    out.df_chi2 = l - 1;
    out.df1 = l - 1;
    out.df2 = (l - 1) * (n - 1);
    return out;
}

/// q_alpha at 5 % for six models.
inline constexpr double nemenyi_q05_six_models = 2.850;

/// cd = q_alpha * sqrt(l (l + 1) / (6 n))
[[nodiscard]] inline double nemenyi_cd(std::size_t l, std::size_t n, double q_alpha) {
    if (l < 2 || n < 2 || !(q_alpha > 0.0)) {
        throw usage_error{ "nemenyi_cd: need l, n >= 2 and q_alpha > 0" };
    }
    const double ld = static_cast<double>(l);
    return q_alpha * std::sqrt(ld * (ld + 1.0) / (6.0 * static_cast<double>(n)));
}

/// Entry (i, j) is true iff |r_i - r_j| > cd.
[[nodiscard]] inline std::vector<std::vector<bool>> significance_table(const vector &avg_ranks, double cd) {
    if (!(cd > 0.0)) {
        throw usage_error{ "significance_table: cd must be positive" };
    }
    const auto l = static_cast<std::size_t>(avg_ranks.size());
    std::vector<std::vector<bool>> out(l, std::vector<bool>(l, false));
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
            out[i][j] = i != j && std::abs(avg_ranks(static_cast<Eigen::Index>(i)) - avg_ranks(static_cast<Eigen::Index>(j))) > cd;
        }
    }
    return out;
}

struct stats_report {
    std::optional<matrix> ranks{};  ///< absent when built from average ranks only
    vector avg_ranks;
    std::size_t n{};
    friedman_result friedman;
    double q_alpha{};
    double cd{};
    std::vector<std::vector<bool>> significant;
    std::optional<double> f_critical{};
    std::vector<std::string> model_names{};

    /// F_F above the supplied critical value: the models are not equivalent.
    [[nodiscard]] std::optional<bool> rejects_null() const {
        if (!f_critical || !friedman.f_f) {
            return std::nullopt;
        }
        return *friedman.f_f > *f_critical;
    }
};

[[nodiscard]] inline stats_report analyze_ranks(const vector &avg_ranks, std::size_t n, double q_alpha, std::optional<double> f_critical = std::nullopt) {
    stats_report rep;
    rep.avg_ranks = avg_ranks;
    rep.n = n;
    rep.friedman = friedman(avg_ranks, n);
    rep.q_alpha = q_alpha;
    rep.cd = nemenyi_cd(static_cast<std::size_t>(avg_ranks.size()), n, q_alpha);
    rep.significant = significance_table(avg_ranks, rep.cd);
    rep.f_critical = f_critical;
    return rep;
}

[[nodiscard]] inline stats_report analyze(const score_table &table, double q_alpha, std::optional<double> f_critical = std::nullopt) {
    const rank_result ranks = rank_rows(table);
    stats_report rep = analyze_ranks(ranks.avg_ranks, static_cast<std::size_t>(table.scores.rows()), q_alpha, f_critical);
    rep.ranks = ranks.ranks;
    rep.model_names = table.model_names;
    return rep;
}

/// First column dataset names, header row model names (its first cell is ignored).
[[nodiscard]] inline score_table parse_score_table(std::istream &in, score_direction direction = score_direction::lower_better) {
    score_table table;
    table.direction = direction;
    std::string line;
    std::vector<std::vector<double>> rows;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        auto cells = detail::split_csv_line(line);
        if (header) {
            header = false;
            if (cells.size() < 3) {
                throw data_error{ "score table: header needs a dataset column and at least 2 model columns" };
            }
            table.model_names.assign(cells.begin() + 1, cells.end());
            continue;
        }
        if (cells.size() != table.model_names.size() + 1) {
            throw data_error{ "score table: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(table.model_names.size() + 1) };
        }
        table.dataset_names.push_back(cells.front());
        std::vector<double> values;
        for (std::size_t j = 1; j < cells.size(); ++j) {
            const auto v = detail::parse_double(cells[j]);
            if (!v || !std::isfinite(*v)) {
                throw data_error{ "score table: non-numeric cell '" + cells[j] + "' on line " + std::to_string(line_no) };
            }
            values.push_back(*v);
        }
        rows.push_back(std::move(values));
    }
    table.scores.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.model_names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            table.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    table.validate();
    return table;
}

/// Structured CSV-style report: summary key/value lines, average ranks, significance matrix.
inline void write_stats_report(std::ostream &out, const stats_report &rep) {
    const auto l = static_cast<std::size_t>(rep.avg_ranks.size());
    const auto name = [&](std::size_t j) { return j < rep.model_names.size() ? rep.model_names[j] : "model" + std::to_string(j + 1); };
    out << "key,value\n";
    out << "n," << rep.n << '\n';
    out << "l," << l << '\n';
    out << "chi2_f," << detail::format_double(rep.friedman.chi2_f) << '\n';
    out << "chi2_df," << rep.friedman.df_chi2 << '\n';
    out << "f_f," << (rep.friedman.f_f ? detail::format_double(*rep.friedman.f_f) : std::string{ "degenerate" }) << '\n';
    out << "f_df," << rep.friedman.df1 << ' ' << rep.friedman.df2 << '\n';
    if (rep.f_critical) {
        out << "f_critical," << detail::format_double(*rep.f_critical) << '\n';
        const auto rej = rep.rejects_null();
        out << "null_rejected," << (rej ? (*rej ? "yes" : "no") : "undetermined") << '\n';
    }
    out << "q_alpha," << detail::format_double(rep.q_alpha) << '\n';
    out << "cd," << detail::format_double(rep.cd) << '\n';
    out << '\n' << "model,avg_rank\n";
    for (std::size_t j = 0; j < l; ++j) {
        out << name(j) << ',' << detail::format_double(rep.avg_ranks(static_cast<Eigen::Index>(j))) << '\n';
    }
    out << '\n' << "significant";
    for (std::size_t j = 0; j < l; ++j) {
        out << ',' << name(j);
    }
    out << '\n';
    for (std::size_t i = 0; i < l; ++i) {
        out << name(i);
        for (std::size_t j = 0; j < l; ++j) {
            out << ',' << (rep.significant[i][j] ? "yes" : "no");
        }
        out << '\n';
    }
}

}  // namespace lstsvrpi
