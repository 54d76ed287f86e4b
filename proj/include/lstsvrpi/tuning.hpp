/**
 * @file
 * @brief Grid search over powers of two with k-fold cross-validation.
 */

#pragma once

#include "lstsvrpi/dataset.hpp"
#include "lstsvrpi/error.hpp"
#include "lstsvrpi/kernel.hpp"
#include "lstsvrpi/metrics.hpp"
#include "lstsvrpi/model.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace lstsvrpi {

struct exponent_range {
    int lo{ -8 };
    int hi{ 8 };
    int step{ 1 };

    [[nodiscard]] std::vector<int> values() const {
        std::vector<int> out;
        for (int i = lo; i <= hi; i += step) {
            out.push_back(i);
        }
        return out;
    }
};

struct grid_spec {
    exponent_range c{};                 ///< exponents i of c = 2^i
    exponent_range mu{};                ///< exponents i of mu = 2^i (kernel mode only)
    std::optional<double> pinned_mu{};  ///< fixes mu instead of searching it
    bool tie_params{ true };            ///< c1 = c4, c2 = c5, c3 = c6
    double eps{ 0.01 };
    std::optional<kernel_kind> kernel{ kernel_kind::rbf };  ///< nullopt: linear feature space
    std::size_t folds{ 5 };
    std::uint64_t seed{ 0 };
    std::size_t max_candidates{ 0 };  ///< 0 keeps the full grid, otherwise an even stride over it
    unsigned threads{ 1 };

    void validate() const {
        if (c.lo > c.hi || mu.lo > mu.hi || c.step < 1 || mu.step < 1) {
            throw usage_error{ "grid_spec: exponent ranges need lo <= hi and step >= 1" };
        }
        if (folds < 2) {
            throw usage_error{ "grid_spec: at least 2 folds are required" };
        }
        if (!(eps >= 0.0)) {
            throw usage_error{ "grid_spec: eps must be non-negative" };
        }
        if (pinned_mu && !(*pinned_mu > 0.0)) {
            throw usage_error{ "grid_spec: pinned mu must be positive" };
        }
    }
};

struct grid_candidate {
    hyperparams hp;
    std::vector<int> c_exponents;     ///< 3 when tied, 6 otherwise
    std::optional<int> mu_exponent{};  ///< empty in linear mode or with a pinned mu
};

namespace detail {

// even stride: positions floor(k * n / keep)
[[nodiscard]] inline std::vector<std::size_t> stride_subsample(std::size_t n, std::size_t keep) {
    std::vector<std::size_t> idx;
    if (keep == 0 || keep >= n) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            idx[i] = i;
        }
        return idx;
    }
    for (std::size_t k = 0; k < keep; ++k) {
        idx.push_back(k * n / keep);
    }
    return idx;
}

}  // namespace detail

/// Cartesian product in lexicographic exponent order (last axis fastest).
[[nodiscard]] inline std::vector<grid_candidate> make_grid(const grid_spec &spec) {
    spec.validate();
    const auto cvals = spec.c.values();
    const std::size_t n_c = spec.tie_params ? 3 : 6;
    const bool search_mu = spec.kernel == kernel_kind::rbf && !spec.pinned_mu;
    const std::vector<int> muvals = search_mu ? spec.mu.values() : std::vector<int>{ 0 };

    std::size_t total = muvals.size();
    for (std::size_t i = 0; i < n_c; ++i) {
        total *= cvals.size();
    }
    std::vector<grid_candidate> out;
    out.reserve(std::min<std::size_t>(total, spec.max_candidates == 0 ? total : spec.max_candidates));
    for (const std::size_t flat : detail::stride_subsample(total, spec.max_candidates)) {
        std::size_t rest = flat;
        const int mu_exp = muvals[rest % muvals.size()];
        rest /= muvals.size();
        std::vector<int> ce(n_c);
        for (std::size_t a = n_c; a-- > 0;) {
            ce[a] = cvals[rest % cvals.size()];
            rest /= cvals.size();
        }
        std::array<double, 6> c{};
        for (std::size_t a = 0; a < 6; ++a) {
            c[a] = std::ldexp(1.0, ce[spec.tie_params ? a % 3 : a]);
        }
        std::optional<kernel_spec> kernel;
        if (spec.kernel == kernel_kind::rbf) {
            kernel = kernel_spec::rbf(spec.pinned_mu ? *spec.pinned_mu : std::ldexp(1.0, mu_exp));
        } else if (spec.kernel == kernel_kind::linear) {
            kernel = kernel_spec::linear();
        }
        grid_candidate cand{ hyperparams{ c[0], c[1], c[2], c[3], c[4], c[5], spec.eps, spec.eps, kernel }, std::move(ce), std::nullopt };
        if (search_mu) {
            cand.mu_exponent = mu_exp;
        }
        out.push_back(std::move(cand));
    }
    return out;
}

/// k near-equal disjoint folds of a seeded shuffle of 0..m-1; the first m % k folds get one extra index.
[[nodiscard]] inline std::vector<std::vector<std::size_t>> kfold_indices(std::size_t m, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k > m) {
        throw usage_error{ "kfold_indices: need 1 <= k <= m (k=" + std::to_string(k) + ", m=" + std::to_string(m) + ")" };
    }
    const auto idx = shuffled_indices(m, seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = m / k + (f < m % k ? 1 : 0);
        folds[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos), idx.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

struct candidate_score {
    std::optional<double> mean_rmse{};  ///< empty when the candidate failed on some fold
    std::string failure{};
};

struct tune_result {
    std::size_t best_index{};
    hyperparams best;
    std::vector<grid_candidate> candidates;
    std::vector<candidate_score> scores;  ///< parallel to candidates, grid order
    std::vector<std::vector<std::size_t>> folds;
    std::vector<std::string> failure_log;

    [[nodiscard]] double best_rmse() const { return *scores[best_index].mean_rmse; }
};

namespace detail {

/// Training indices of fold f (all folds except f, in fold order).
[[nodiscard]] inline std::vector<std::size_t> complement_of_fold(const std::vector<std::vector<std::size_t>> &folds, std::size_t f) {
    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < folds.size(); ++g) {
        if (g != f) {
            out.insert(out.end(), folds[g].begin(), folds[g].end());
        }
    }
    return out;
}

/**
 * Mean validation RMSE per candidate. score(c, train_idx, val_idx) returns the
 * RMSE on one fold or throws. Candidates are spread over `threads` workers;
 * results land in grid order.
 */
[[nodiscard]] inline std::vector<candidate_score> score_candidates(std::size_t n_candidates,
                                                                   const std::vector<std::vector<std::size_t>> &folds,
                                                                   const std::function<double(std::size_t, const std::vector<std::size_t> &, const std::vector<std::size_t> &)> &score,
                                                                   unsigned threads) {
    std::vector<std::vector<std::size_t>> train_sets;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        train_sets.push_back(complement_of_fold(folds, f));
    }
    std::vector<candidate_score> scores(n_candidates);
    std::atomic<std::size_t> next{ 0 };
    const auto worker = [&]() {
        for (std::size_t c = next++; c < n_candidates; c = next++) {
            double total = 0.0;
            try {
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    const double rmse = score(c, train_sets[f], folds[f]);
                    if (!std::isfinite(rmse)) {
                        throw numerical_error{ "non-finite validation RMSE" };
                    }
                    total += rmse;
                }
                scores[c].mean_rmse = total / static_cast<double>(folds.size());
            } catch (const std::exception &e) {
                scores[c].failure = e.what();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_candidates)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    return scores;
}

// first strict minimum in grid order
[[nodiscard]] inline std::optional<std::size_t> argmin_score(const std::vector<candidate_score> &scores) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].mean_rmse && (!best || *scores[i].mean_rmse < *scores[*best].mean_rmse)) {
            best = i;
        }
    }
    return best;
}

inline void finish_result(tune_result &res) {
    for (std::size_t i = 0; i < res.scores.size(); ++i) {
        if (!res.scores[i].mean_rmse) {
            res.failure_log.push_back("candidate " + std::to_string(i) + ": " + res.scores[i].failure);
        }
    }
    const auto best = argmin_score(res.scores);
    if (!best) {
        std::string msg = "tuning: all " + std::to_string(res.scores.size()) + " candidates failed";
        if (!res.failure_log.empty()) {
            msg += " (first: " + res.failure_log.front() + ")";
        }
        throw numerical_error{ msg };
    }
    res.best_index = *best;
    res.best = res.candidates[*best].hp;
}

}  // namespace detail

/**
 * @brief Select hyperparameters of the privileged-information model by k-fold CV.
 *
 * Every candidate is fitted on k-1 folds (regular and privileged columns) and
 * scored by RMSE on the held-out fold using regular columns only. A candidate
 * that fails on any fold is excluded and logged. Ties go to the earliest
 * candidate in grid order.
 */
[[nodiscard]] inline tune_result cross_validate(const pi_dataset &data, const grid_spec &spec) {
    data.validate();
    tune_result res;
    res.candidates = make_grid(spec);
    res.folds = kfold_indices(data.num_samples(), spec.folds, spec.seed);
    const auto score = [&](std::size_t c, const std::vector<std::size_t> &train_idx, const std::vector<std::size_t> &val_idx) {
        const trained_model model = fit(data.rows(train_idx), res.candidates[c].hp);
        const pi_dataset val = data.rows(val_idx);
        return evaluate(val.targets, predict(model, val.regular)).rmse;
    };
    res.scores = detail::score_candidates(res.candidates.size(), res.folds, score, spec.threads);
    detail::finish_result(res);
    return res;
}

/**
 * @brief Same protocol for the kernel ridge comparator on regular features.
 *
 * The c axis is the ridge exponent and mu is searched as for the main model;
 * the candidate's hp.c1 carries the ridge value.
 */
[[nodiscard]] inline tune_result cross_validate_krr(const dataset &data, const grid_spec &spec) {
    data.validate();
    spec.validate();
    const kernel_kind kind = spec.kernel.value_or(kernel_kind::linear);
    const bool search_mu = kind == kernel_kind::rbf && !spec.pinned_mu;
    const std::vector<int> muvals = search_mu ? spec.mu.values() : std::vector<int>{ 0 };
    std::vector<grid_candidate> full;
    for (const int r : spec.c.values()) {
        for (const int mu_exp : muvals) {
            const kernel_spec kernel = kind == kernel_kind::linear ? kernel_spec::linear() : kernel_spec::rbf(spec.pinned_mu ? *spec.pinned_mu : std::ldexp(1.0, mu_exp));
            hyperparams hp;
            hp.c1 = std::ldexp(1.0, r);
            hp.kernel = kernel;
            full.push_back({ hp, { r }, search_mu ? std::optional<int>{ mu_exp } : std::nullopt });
        }
    }
    tune_result res;
    for (const auto i : detail::stride_subsample(full.size(), spec.max_candidates)) {
        res.candidates.push_back(full[i]);
    }
    res.folds = kfold_indices(data.num_samples(), spec.folds, spec.seed);
    const auto score = [&](std::size_t c, const std::vector<std::size_t> &train_idx, const std::vector<std::size_t> &val_idx) {
        const auto &hp = res.candidates[c].hp;
        const krr_model model = fit_krr_comparator(data.rows(train_idx), hp.c1, *hp.kernel);
        const dataset val = data.rows(val_idx);
        return evaluate(val.targets, predict(model, val.features)).rmse;
    };
    res.scores = detail::score_candidates(res.candidates.size(), res.folds, score, spec.threads);
    detail::finish_result(res);
    return res;
}

/// One row per candidate: exponents then the mean validation RMSE (empty when failed).
inline void write_tune_csv(std::ostream &out, const tune_result &res) {
    if (res.candidates.empty()) {
        return;
    }
    const auto n_c = res.candidates.front().c_exponents.size();
    const bool has_mu = res.candidates.front().mu_exponent.has_value();
    for (std::size_t a = 0; a < n_c; ++a) {
        out << 'c' << (a + 1) << "_exp,";
    }
    if (has_mu) {
        out << "mu_exp,";
    }
    out << "mean_rmse\n";
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
        for (const int e : res.candidates[i].c_exponents) {
            out << e << ',';
        }
        if (has_mu) {
            out << *res.candidates[i].mu_exponent << ',';
        }
        if (res.scores[i].mean_rmse) {
            out << detail::format_double(*res.scores[i].mean_rmse);
        }
        out << '\n';
    }
}

}  // namespace lstsvrpi
