/**
 * @file
 * @brief Command implementations behind the CLI. Each takes a plain config
 *        struct, writes its files and returns what it computed, so the same
 *        code path is exercised by the tools and the tests.
 */

#pragma once

#include "lstsvrpi/bounds.hpp"
#include "lstsvrpi/dataset.hpp"
#include "lstsvrpi/error.hpp"
#include "lstsvrpi/kernel.hpp"
#include "lstsvrpi/metrics.hpp"
#include "lstsvrpi/model.hpp"
#include "lstsvrpi/model_io.hpp"
#include "lstsvrpi/stats.hpp"
#include "lstsvrpi/tuning.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lstsvrpi {

namespace fs = std::filesystem;

namespace detail {

inline void ensure_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw data_error{ "cannot create output directory " + dir.string() };
    }
}

[[nodiscard]] inline std::ofstream open_out(const fs::path &path, std::ios::openmode mode = std::ios::trunc) {
    std::ofstream out{ path, std::ios::binary | std::ios::out | mode };
    if (!out) {
        throw data_error{ "cannot write " + path.string() };
    }
    return out;
}

[[nodiscard]] inline std::string fixed4(double seconds) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << seconds;
    return s.str();
}

[[nodiscard]] inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// splitmix64 step; decorrelates derived seeds
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

[[nodiscard]] inline std::string optional_cell(const std::optional<double> &v) {
    return v ? format_double(*v) : std::string{};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shared steps
// ---------------------------------------------------------------------------

/// Training data scaled by its own min/max and partitioned into regular / privileged columns.
struct prepared_training {
    pi_dataset data;
    norm_stats stats;  ///< over all feature columns and the target
};

[[nodiscard]] inline prepared_training prepare_training(const dataset &train, bool normalize = true) {
    train.validate();
    if (!normalize) {
        norm_stats identity{ vector::Zero(static_cast<Eigen::Index>(train.num_features())), vector::Ones(static_cast<Eigen::Index>(train.num_features())), 0.0, 1.0 };
        return { split_privileged(train), identity };
    }
    auto [scaled, stats] = min_max_normalize(train);
    return { split_privileged(scaled), std::move(stats) };
}

/// Regular feature columns of a raw evaluation set. Accepts either the full
/// training schema (regular + privileged) or regular columns only.
[[nodiscard]] inline matrix regular_view(const trained_model &model, const dataset &data) {
    const auto dr = model.num_regular();
    const auto full = dr + model.num_privileged();
    if (data.num_features() != full && data.num_features() != dr) {
        throw data_error{ "schema mismatch: evaluation data has " + std::to_string(data.num_features()) + " feature columns, model expects " + std::to_string(full) +
                          " (regular + privileged) or " + std::to_string(dr) + " (regular only)" };
    }
    return data.features.leftCols(static_cast<Eigen::Index>(dr));
}

struct eval_outcome {
    metrics m;
    vector predictions;
    double predict_seconds{};
};

/// Applies the model's stored scaling, predicts from regular columns only and scores on the scaled target.
[[nodiscard]] inline eval_outcome evaluate_model(const trained_model &model, const dataset &raw_test) {
    raw_test.validate();
    const matrix x = regular_view(model, raw_test);
    const vector y = model.norm ? scale_targets(raw_test.targets, *model.norm) : raw_test.targets;
    const auto start = std::chrono::steady_clock::now();
    eval_outcome out;
    out.predictions = predict(model, x);
    out.predict_seconds = detail::seconds_since(start);
    out.m = evaluate(y, out.predictions);
    return out;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct synth_config {
    synthetic_fn fn{ synthetic_fn::f2 };
    noise_kind noise{ noise_kind::uniform_pm02 };
    std::uint64_t seed{ 0 };
    std::optional<std::uint64_t> noise_seed{};  ///< derived from seed when absent
    std::size_t n_train{ 100 };
    std::size_t n_test{ 200 };
    fs::path out_dir{ "." };

    [[nodiscard]] std::uint64_t effective_noise_seed() const noexcept { return noise_seed.value_or(detail::mix_seed(seed, 1)); }
};

struct synth_outcome {
    fs::path train;
    fs::path test;
    fs::path manifest;
};

inline synth_outcome cmd_synth(const synth_config &cfg) {
    const auto [train, test] = gen_synthetic(cfg.fn, cfg.n_train, cfg.n_test, noise_spec{ cfg.noise, cfg.effective_noise_seed() }, cfg.seed);
    detail::ensure_dir(cfg.out_dir);
    synth_outcome out{ cfg.out_dir / "train.csv", cfg.out_dir / "test.csv", cfg.out_dir / "manifest.txt" };
    write_csv(out.train, train);
    write_csv(out.test, test);
    auto m = detail::open_out(out.manifest);
    m << "fn=" << to_string(cfg.fn) << '\n'
      << "noise=" << to_string(cfg.noise) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "noise_seed=" << cfg.effective_noise_seed() << '\n'
      << "n_train=" << cfg.n_train << '\n'
      << "n_test=" << cfg.n_test << '\n';
    return out;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct fit_config {
    fs::path train_csv;
    column_selector target{ column_selector::last() };
    std::optional<hyperparams> hp{};  ///< fixed hyperparameters; tuned over `grid` when absent
    grid_spec grid{};
    bool normalize{ true };
    fit_options options{};
    fs::path out_dir{ "." };
};

struct fit_outcome {
    trained_model model;
    kkt_report kkt;
    double kkt_limit{};
    std::optional<tune_result> tuning{};
    double train_seconds{};
    fs::path model_file;
    fs::path kkt_file;
};

/// Tune (optional), fit and attach the regular-column scaling to the model.
[[nodiscard]] inline fit_outcome fit_prepared(const prepared_training &prep, const std::optional<hyperparams> &hp, const grid_spec &grid, const fit_options &options) {
    const auto start = std::chrono::steady_clock::now();
    fit_outcome out;
    if (hp) {
        out.model = fit(prep.data, *hp, options);
    } else {
        out.tuning = cross_validate(prep.data, grid);
        auto &tuning = *out.tuning;
        // a candidate verified on every fold can still fail on the full set; fall back in score order
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < tuning.scores.size(); ++i) {
            if (tuning.scores[i].mean_rmse) {
                order.push_back(i);
            }
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *tuning.scores[a].mean_rmse < *tuning.scores[b].mean_rmse; });
        std::optional<trained_model> fitted;
        for (const std::size_t i : order) {
            try {
                fitted = fit(prep.data, tuning.candidates[i].hp, options);
                tuning.best_index = i;
                tuning.best = tuning.candidates[i].hp;
                break;
            } catch (const numerical_error &e) {
                tuning.failure_log.push_back("candidate " + std::to_string(i) + " on the full training set: " + e.what());
            }
        }
        if (!fitted) {
            throw numerical_error{ "fit: no tuned candidate passes verification on the full training set" };
        }
        out.model = std::move(*fitted);
    }
    out.train_seconds = detail::seconds_since(start);
    out.model.norm = prep.stats.slice(0, static_cast<std::size_t>(prep.data.regular.cols()));
    out.kkt = kkt_residuals(out.model, prep.data);
    out.kkt_limit = options.kkt_tolerance * (1.0 + inf_norm(prep.data.targets));
    return out;
}

inline void write_kkt_report(std::ostream &out, const kkt_report &kkt, double limit) {
    static constexpr std::array<const char *, 6> names{ "down_stationarity", "down_correcting", "down_feasibility", "up_stationarity", "up_correcting", "up_feasibility" };
    const auto values = kkt.values();
    out << "residual,value\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << names[i] << ',' << detail::format_double(values[i]) << '\n';
    }
    out << "max," << detail::format_double(kkt.max()) << '\n';
    out << "limit," << detail::format_double(limit) << '\n';
    out << "pass," << (kkt.max() <= limit ? "yes" : "no") << '\n';
}

inline fit_outcome cmd_fit(const fit_config &cfg) {
    const dataset train = load_csv(cfg.train_csv, cfg.target);
    const prepared_training prep = prepare_training(train, cfg.normalize);
    fit_outcome out = fit_prepared(prep, cfg.hp, cfg.grid, cfg.options);
    detail::ensure_dir(cfg.out_dir);
    out.model_file = cfg.out_dir / "model.json";
    out.kkt_file = cfg.out_dir / "kkt.csv";
    save_model(out.model_file, out.model);
    {
        auto k = detail::open_out(out.kkt_file);
        write_kkt_report(k, out.kkt, out.kkt_limit);
    }
    if (out.tuning) {
        auto t = detail::open_out(cfg.out_dir / "tuning.csv");
        write_tune_csv(t, *out.tuning);
    }
    return out;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct eval_config {
    fs::path model_file;
    fs::path test_csv;
    column_selector target{ column_selector::last() };
    std::optional<fs::path> append_csv{};
    std::string label{};
};

inline constexpr const char *eval_csv_header = "label,n,rmse,sse,sst,sse_over_sst,predict_seconds";

inline eval_outcome cmd_eval(const eval_config &cfg) {
    const trained_model model = load_model(cfg.model_file);
    const dataset test = load_csv(cfg.test_csv, cfg.target);
    eval_outcome out = evaluate_model(model, test);
    if (cfg.append_csv) {
        const bool fresh = !fs::exists(*cfg.append_csv) || fs::file_size(*cfg.append_csv) == 0;
        auto f = detail::open_out(*cfg.append_csv, std::ios::app);
        if (fresh) {
            f << eval_csv_header << '\n';
        }
        f << (cfg.label.empty() ? cfg.test_csv.filename().string() : cfg.label) << ',' << out.m.n << ',' << detail::format_double(out.m.rmse) << ','
          << detail::format_double(out.m.sse) << ',' << detail::format_double(out.m.sst) << ',' << detail::optional_cell(out.m.sse_over_sst) << ','
          << detail::fixed4(out.predict_seconds) << '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct synthetic_source {
    synthetic_fn fn{ synthetic_fn::f2 };
    noise_kind noise{ noise_kind::uniform_pm02 };
    std::size_t n_train{ 100 };
    std::size_t n_test{ 200 };
};

struct csv_source {
    fs::path path;
    column_selector target{ column_selector::last() };
    split_scheme split{ ratio_split{} };  ///< ratio seeds are replaced per repeat
};

/// Univariate series embedded with `lags` lagged inputs; split by `split`.
struct series_source {
    fs::path path;
    std::size_t lags{ 5 };
    column_selector column{ column_selector::last() };
    split_scheme split{ head_split{ 200 } };
};

struct benchmark_entry {
    std::string name;
    std::variant<synthetic_source, csv_source, series_source> source;
};

struct benchmark_config {
    std::vector<benchmark_entry> datasets;
    std::size_t repeats{ 4 };
    std::uint64_t seed{ 0 };
    grid_spec grid{};
    bool with_krr{ true };
    fs::path out_dir{ "." };
};

struct model_summary {
    std::optional<double> rmse{};
    std::optional<double> sse{};
    std::optional<double> sse_over_sst{};
    double train_seconds{};
    double predict_seconds{};
    std::size_t ok_repeats{};
};

struct benchmark_row {
    std::string name;
    model_summary proposed;
    std::optional<model_summary> krr{};
    std::vector<std::string> failures;
};

struct repeat_record {
    std::string name;
    std::size_t repeat{};
    std::string model;
    std::optional<metrics> m{};
    double train_seconds{};
    double predict_seconds{};
    std::string failure{};
};

struct benchmark_outcome {
    std::vector<benchmark_row> rows;
    std::vector<repeat_record> repeats;
    fs::path metrics_file;
    fs::path repeats_file;
    fs::path timing_file;
};

namespace detail {

[[nodiscard]] inline std::pair<dataset, dataset> load_split(const benchmark_entry &entry, std::uint64_t repeat_seed) {
    const auto reseed = [&](split_scheme s) {
        if (auto *r = std::get_if<ratio_split>(&s)) {
            r->seed = repeat_seed;
        }
        return s;
    };
    if (const auto *s = std::get_if<synthetic_source>(&entry.source)) {
        return gen_synthetic(s->fn, s->n_train, s->n_test, noise_spec{ s->noise, mix_seed(repeat_seed, 1) }, repeat_seed);
    }
    if (const auto *c = std::get_if<csv_source>(&entry.source)) {
        return train_test_split(load_csv(c->path, c->target), reseed(c->split));
    }
    const auto &t = std::get<series_source>(entry.source);
    return train_test_split(lag_embed(load_series(t.path, t.column), t.lags), reseed(t.split));
}

[[nodiscard]] inline model_summary summarize(const std::vector<repeat_record> &recs) {
    model_summary s;
    std::vector<double> rmse;
    std::vector<double> sse;
    std::vector<double> ratio;
    for (const auto &r : recs) {
        s.train_seconds += r.train_seconds;
        s.predict_seconds += r.predict_seconds;
        if (!r.m) {
            continue;
        }
        ++s.ok_repeats;
        rmse.push_back(r.m->rmse);
        sse.push_back(r.m->sse);
        if (r.m->sse_over_sst) {
            ratio.push_back(*r.m->sse_over_sst);
        }
    }
    if (!recs.empty()) {
        s.train_seconds /= static_cast<double>(recs.size());
        s.predict_seconds /= static_cast<double>(recs.size());
    }
    if (!rmse.empty()) {
        s.rmse = aggregate_mean(rmse);
        s.sse = aggregate_mean(sse);
    }
    if (!ratio.empty() && ratio.size() == rmse.size()) {
        s.sse_over_sst = aggregate_mean(ratio);
    }
    return s;
}

inline void run_repeat(const benchmark_entry &entry, std::size_t r, const benchmark_config &cfg, repeat_record &proposed, std::optional<repeat_record> &krr) {
    const std::uint64_t repeat_seed = mix_seed(cfg.seed, r);
    proposed = { entry.name, r, "lstsvrpi", std::nullopt, 0.0, 0.0, {} };
    if (cfg.with_krr) {
        krr = repeat_record{ entry.name, r, "krr", std::nullopt, 0.0, 0.0, {} };
    }
    std::pair<dataset, dataset> split;
    prepared_training prep;
    try {
        split = load_split(entry, repeat_seed);
        prep = prepare_training(split.first);
    } catch (const error &e) {
        proposed.failure = e.what();
        if (krr) {
            krr->failure = e.what();
        }
        return;
    }
    grid_spec grid = cfg.grid;
    grid.seed = repeat_seed;

    try {
        const fit_outcome fitted = fit_prepared(prep, std::nullopt, grid, fit_options{});
        const eval_outcome ev = evaluate_model(fitted.model, split.second);
        proposed.m = ev.m;
        proposed.train_seconds = fitted.train_seconds;
        proposed.predict_seconds = ev.predict_seconds;
    } catch (const error &e) {
        proposed.failure = e.what();
    }

    if (krr) {
        try {
            const auto start = std::chrono::steady_clock::now();
            const dataset regular_train{ prep.data.regular, prep.data.targets };
            const tune_result tuned = cross_validate_krr(regular_train, grid);
            const krr_model model = fit_krr_comparator(regular_train, tuned.best.c1, *tuned.best.kernel);
            krr->train_seconds = seconds_since(start);
            const dataset test = apply_norm(split.second, prep.stats);
            const matrix x = test.features.leftCols(prep.data.regular.cols());
            const auto pstart = std::chrono::steady_clock::now();
            const vector y_hat = predict(model, x);
            krr->predict_seconds = seconds_since(pstart);
            krr->m = evaluate(test.targets, y_hat);
        } catch (const error &e) {
            krr->failure = e.what();
        }
    }
}

}  // namespace detail

inline constexpr const char *benchmark_csv_header = "dataset,lstsvrpi_rmse,lstsvrpi_sse,lstsvrpi_sse_over_sst,krr_rmse,krr_sse,krr_sse_over_sst,repeats,lstsvrpi_ok,krr_ok";

/**
 * @brief tune -> fit -> eval for every dataset and repeat, averaged over repeats.
 *
 * Writes metrics.csv (one row per dataset, both models side by side),
 * repeats.csv (one row per repeat and model) and timing.csv. Only timing.csv
 * holds wall-clock values. A failing dataset or repeat is recorded and the run
 * continues.
 */
inline benchmark_outcome cmd_benchmark(const benchmark_config &cfg) {
    if (cfg.datasets.empty()) {
        throw usage_error{ "benchmark: no datasets given" };
    }
    if (cfg.repeats == 0) {
        throw usage_error{ "benchmark: repeats must be at least 1" };
    }
    cfg.grid.validate();
    detail::ensure_dir(cfg.out_dir);

    benchmark_outcome out;
    for (const auto &entry : cfg.datasets) {
        std::vector<repeat_record> proposed(cfg.repeats);
        std::vector<repeat_record> krr;
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
            std::optional<repeat_record> k;
            detail::run_repeat(entry, r, cfg, proposed[r], k);
            if (k) {
                krr.push_back(std::move(*k));
            }
        }
        benchmark_row row;
        row.name = entry.name;
        row.proposed = detail::summarize(proposed);
        if (cfg.with_krr) {
            row.krr = detail::summarize(krr);
        }
        for (const auto *list : { &proposed, &krr }) {
            for (const auto &rec : *list) {
                if (!rec.failure.empty()) {
                    row.failures.push_back(rec.model + " repeat " + std::to_string(rec.repeat) + ": " + rec.failure);
                }
                out.repeats.push_back(rec);
            }
        }
        out.rows.push_back(std::move(row));
    }

    out.metrics_file = cfg.out_dir / "metrics.csv";
    out.repeats_file = cfg.out_dir / "repeats.csv";
    out.timing_file = cfg.out_dir / "timing.csv";
    {
        auto f = detail::open_out(out.metrics_file);
        f << benchmark_csv_header << '\n';
        for (const auto &row : out.rows) {
            const model_summary empty{};
            const model_summary &k = row.krr ? *row.krr : empty;
            f << row.name << ',' << detail::optional_cell(row.proposed.rmse) << ',' << detail::optional_cell(row.proposed.sse) << ','
              << detail::optional_cell(row.proposed.sse_over_sst) << ',' << detail::optional_cell(k.rmse) << ',' << detail::optional_cell(k.sse) << ','
              << detail::optional_cell(k.sse_over_sst) << ',' << cfg.repeats << ',' << row.proposed.ok_repeats << ',' << (row.krr ? std::to_string(k.ok_repeats) : std::string{}) << '\n';
        }
    }
    {
        auto f = detail::open_out(out.repeats_file);
        f << "dataset,repeat,model,rmse,sse,sst,sse_over_sst,status\n";
        for (const auto &rec : out.repeats) {
            f << rec.name << ',' << rec.repeat << ',' << rec.model << ',';
            if (rec.m) {
                f << detail::format_double(rec.m->rmse) << ',' << detail::format_double(rec.m->sse) << ',' << detail::format_double(rec.m->sst) << ','
                  << detail::optional_cell(rec.m->sse_over_sst) << ",ok\n";
            } else {
                f << ",,,,failed\n";
            }
        }
    }
    {
        auto f = detail::open_out(out.timing_file);
        f << "dataset,model,train_seconds,predict_seconds\n";
        for (const auto &row : out.rows) {
            f << row.name << ",lstsvrpi," << detail::fixed4(row.proposed.train_seconds) << ',' << detail::fixed4(row.proposed.predict_seconds) << '\n';
            if (row.krr) {
                f << row.name << ",krr," << detail::fixed4(row.krr->train_seconds) << ',' << detail::fixed4(row.krr->predict_seconds) << '\n';
            }
        }
    }
    {
        auto f = detail::open_out(cfg.out_dir / "failures.log");
        for (const auto &row : out.rows) {
            for (const auto &msg : row.failures) {
                f << row.name << ": " << msg << '\n';
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct stats_config {
    std::optional<fs::path> scores_csv{};
    std::optional<std::vector<double>> avg_ranks{};  ///< alternative to scores_csv
    std::optional<std::size_t> n{};                  ///< dataset count for avg_ranks
    std::vector<std::string> model_names{};          ///< optional labels for avg_ranks
    score_direction direction{ score_direction::lower_better };
    double q_alpha{ nemenyi_q05_six_models };
    std::optional<double> f_critical{};
    std::optional<fs::path> out_csv{};
};

inline stats_report cmd_stats(const stats_config &cfg) {
    if (cfg.scores_csv.has_value() == cfg.avg_ranks.has_value()) {
        throw usage_error{ "stats: give exactly one of a score table or average ranks" };
    }
    stats_report rep;
    if (cfg.scores_csv) {
        std::ifstream in{ *cfg.scores_csv, std::ios::binary };
        if (!in) {
            throw data_error{ "cannot open score table " + cfg.scores_csv->string() };
        }
        rep = analyze(parse_score_table(in, cfg.direction), cfg.q_alpha, cfg.f_critical);
    } else {
        if (!cfg.n) {
            throw usage_error{ "stats: average ranks need the dataset count n" };
        }
        vector r(static_cast<Eigen::Index>(cfg.avg_ranks->size()));
        for (std::size_t i = 0; i < cfg.avg_ranks->size(); ++i) {
            r(static_cast<Eigen::Index>(i)) = (*cfg.avg_ranks)[i];
        }
        rep = analyze_ranks(r, *cfg.n, cfg.q_alpha, cfg.f_critical);
        rep.model_names = cfg.model_names;
    }
    if (cfg.out_csv) {
        auto f = detail::open_out(*cfg.out_csv);
        write_stats_report(f, rep);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct bounds_config {
    fs::path model_file;
    double b{ 1.0 };
    double l{ 1.0 };
    double delta{ 0.05 };
    std::optional<double> empirical_error{};  ///< training RMSE of the model when absent
};

struct bounds_outcome {
    bound_inputs inputs;
    double rademacher{};
    double generalization{};
};

[[nodiscard]] inline bounds_outcome compute_bounds(const trained_model &model, const bounds_config &cfg) {
    bounds_outcome out;
    out.inputs.b = cfg.b;
    out.inputs.l = cfg.l;
    out.inputs.delta = cfg.delta;
    out.inputs.kernel_diag = kernel_diagonal(model.train_regular, model.hp.kernel.value_or(kernel_spec::linear()));
    if (cfg.empirical_error) {
        out.inputs.empirical_error = *cfg.empirical_error;
    } else {
        trained_model scaled = model;  // stored training rows are already scaled
        scaled.norm.reset();
        out.inputs.empirical_error = evaluate(model.train_targets, predict(scaled, model.train_regular)).rmse;
    }
    out.inputs.validate();
    out.rademacher = rademacher_bound(out.inputs.b, out.inputs.kernel_diag);
    out.generalization = generalization_bound(out.inputs);
    return out;
}

inline bounds_outcome cmd_bounds(const bounds_config &cfg) {
    return compute_bounds(load_model(cfg.model_file), cfg);
}

}  // namespace lstsvrpi
