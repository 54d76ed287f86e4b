// Command-line driver: synth, fit, eval, benchmark, stats, bounds.

#include "lstsvrpi/lstsvrpi.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace lstsvrpi;

struct grid_flags {
    std::uint64_t seed{ 0 };
    std::string kernel{ "rbf" };
    std::optional<double> mu{};
    double eps{ 0.01 };
    int grid_lo{ -8 };
    int grid_hi{ 8 };
    int grid_step{ 1 };
    int mu_lo{ -8 };
    int mu_hi{ 8 };
    int mu_step{ 1 };
    std::size_t max_candidates{ 256 };
    std::size_t folds{ 5 };
    unsigned threads{ 1 };
    bool untied{ false };

    void add_to(CLI::App &app) {
        app.add_option("--seed", seed, "Seed for folds, splits and synthetic draws")->capture_default_str();
        app.add_option("--kernel", kernel, "Feature map")->check(CLI::IsMember({ "linear", "rbf" }))->capture_default_str();
        app.add_option("--mu", mu, "Fix the RBF width instead of searching it");
        app.add_option("--eps", eps, "Insensitivity margin eps1 = eps2")->capture_default_str();
        app.add_option("--grid-lo", grid_lo, "Smallest exponent i of c = 2^i")->capture_default_str();
        app.add_option("--grid-hi", grid_hi, "Largest exponent i of c = 2^i")->capture_default_str();
        app.add_option("--grid-step", grid_step, "Exponent step of the c axes")->capture_default_str();
        app.add_option("--mu-lo", mu_lo, "Smallest exponent i of mu = 2^i")->capture_default_str();
        app.add_option("--mu-hi", mu_hi, "Largest exponent i of mu = 2^i")->capture_default_str();
        app.add_option("--mu-step", mu_step, "Exponent step of the mu axis")->capture_default_str();
        app.add_option("--max-candidates", max_candidates, "Evenly strided subsample of the grid (0 = full grid)")->capture_default_str();
        app.add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
        app.add_option("--threads", threads, "Worker threads for candidate scoring")->capture_default_str();
        app.add_flag("--untied", untied, "Search c4..c6 independently of c1..c3");
    }

    [[nodiscard]] grid_spec spec() const {
        grid_spec g;
        g.c = { grid_lo, grid_hi, grid_step };
        g.mu = { mu_lo, mu_hi, mu_step };
        g.pinned_mu = mu;
        g.tie_params = !untied;
        g.eps = eps;
        g.kernel = kernel == "rbf" ? std::optional<kernel_kind>{ kernel_kind::rbf } : std::nullopt;
        g.folds = folds;
        g.seed = seed;
        g.max_candidates = max_candidates;
        g.threads = threads;
        g.validate();
        return g;
    }

    [[nodiscard]] std::optional<kernel_spec> kernel_choice() const {
        if (kernel == "linear") {
            return std::nullopt;
        }
        return kernel_spec::rbf(mu.value_or(1.0));
    }
};

void print_metrics(const metrics &m, double seconds) {
    std::cout << "n=" << m.n << '\n'
              << "rmse=" << detail::format_double(m.rmse) << '\n'
              << "sse=" << detail::format_double(m.sse) << '\n'
              << "sst=" << detail::format_double(m.sst) << '\n'
              << "sse_over_sst=" << (m.sse_over_sst ? detail::format_double(*m.sse_over_sst) : std::string{ "undefined" }) << '\n'
              << "predict_seconds=" << detail::fixed4(seconds) << '\n';
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{ "Least squares twin support vector regression with privileged information" };
    app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
    bool print_config = false;
    app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
    app.require_subcommand(1);

    // synth
    synth_config synth;
    std::string synth_fn = "f2";
    std::string synth_noise = "uniform";
    std::string synth_out = ".";
    auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic train/test pair");
    synth_cmd->configurable();
    synth_cmd->add_option("--fn", synth_fn, "Benchmark function")->check(CLI::IsMember({ "f1", "f2", "f3", "f4" }))->capture_default_str();
    synth_cmd->add_option("--noise", synth_noise, "Noise on training targets")->check(CLI::IsMember({ "uniform", "gauss005", "gauss02" }))->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Input seed")->capture_default_str();
    synth_cmd->add_option("--noise-seed", synth.noise_seed, "Noise seed (derived from --seed when absent)");
    synth_cmd->add_option("--n-train", synth.n_train, "Training rows")->capture_default_str();
    synth_cmd->add_option("--n-test", synth.n_test, "Test rows")->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();

    // fit
    grid_flags fit_grid;
    std::string fit_train;
    std::string fit_target;
    std::string fit_out = ".";
    bool fit_no_tune = false;
    bool fit_no_normalize = false;
    double fit_tol = 1e-8;
    std::vector<double> fit_c(6, 1.0);
    auto *fit_cmd = app.add_subcommand("fit", "Tune, fit and save a model");
    fit_cmd->configurable();
    fit_cmd->add_option("train", fit_train, "Training CSV")->required();
    fit_cmd->add_option("--target", fit_target, "Target column name or index (default: last)");
    fit_cmd->add_option("--out", fit_out, "Output directory for model.json, kkt.csv, tuning.csv")->capture_default_str();
    fit_cmd->add_flag("--no-tune", fit_no_tune, "Use --c1..--c6 and --mu as given");
    fit_cmd->add_flag("--no-normalize", fit_no_normalize, "Skip min-max scaling");
    fit_cmd->add_option("--kkt-tol", fit_tol, "Relative KKT residual tolerance")->capture_default_str();
    for (int i = 0; i < 6; ++i) {
        fit_cmd->add_option("--c" + std::to_string(i + 1), fit_c[static_cast<std::size_t>(i)], "Fixed c" + std::to_string(i + 1) + " (with --no-tune)")->capture_default_str();
    }
    fit_grid.add_to(*fit_cmd);

    // eval
    eval_config eval;
    std::string eval_model;
    std::string eval_test;
    std::string eval_target;
    std::string eval_out;
    auto *eval_cmd = app.add_subcommand("eval", "Score a saved model on a CSV file");
    eval_cmd->configurable();
    eval_cmd->add_option("model", eval_model, "Model file")->required();
    eval_cmd->add_option("test", eval_test, "Test CSV")->required();
    eval_cmd->add_option("--target", eval_target, "Target column name or index (default: last)");
    eval_cmd->add_option("--out", eval_out, "CSV file to append a result row to");
    eval_cmd->add_option("--label", eval.label, "Row label (default: test file name)");

    // benchmark
    grid_flags bench_grid;
    std::vector<std::string> bench_synthetic;
    std::vector<std::string> bench_csv;
    std::vector<std::string> bench_series;
    std::string bench_noise = "uniform";
    std::string bench_out = ".";
    std::size_t bench_n_train = 100;
    std::size_t bench_n_test = 200;
    std::size_t bench_lags = 5;
    double bench_ratio = 0.7;
    std::optional<std::size_t> bench_head{};
    std::size_t bench_repeats = 4;
    bool bench_no_krr = false;
    auto *bench_cmd = app.add_subcommand("benchmark", "Repeated tune/fit/eval over datasets");
    bench_cmd->configurable();
    bench_cmd->add_option("--synthetic", bench_synthetic, "Synthetic function(s), e.g. f2 or f2:gauss02");
    bench_cmd->add_option("--csv", bench_csv, "Regression CSV file(s), split by --ratio or --head");
    bench_cmd->add_option("--series", bench_series, "Time-series CSV file(s), lag-embedded with --lags");
    bench_cmd->add_option("--noise", bench_noise, "Default noise for --synthetic")->check(CLI::IsMember({ "uniform", "gauss005", "gauss02" }))->capture_default_str();
    bench_cmd->add_option("--n-train", bench_n_train, "Synthetic training rows")->capture_default_str();
    bench_cmd->add_option("--n-test", bench_n_test, "Synthetic test rows")->capture_default_str();
    bench_cmd->add_option("--lags", bench_lags, "Lagged inputs for --series")->capture_default_str();
    bench_cmd->add_option("--ratio", bench_ratio, "Training fraction of a shuffled split")->capture_default_str();
    bench_cmd->add_option("--head", bench_head, "Use the first N rows for training instead of a shuffled split");
    bench_cmd->add_option("--repeats", bench_repeats, "Independent repeats per dataset")->capture_default_str();
    bench_cmd->add_flag("--no-krr", bench_no_krr, "Skip the kernel ridge comparator");
    bench_cmd->add_option("--out", bench_out, "Output directory")->capture_default_str();
    bench_grid.add_to(*bench_cmd);

    // stats
    stats_config stats;
    std::string stats_scores;
    std::vector<double> stats_ranks;
    std::size_t stats_n = 0;
    std::string stats_out;
    bool stats_higher = false;
    auto *stats_cmd = app.add_subcommand("stats", "Friedman test and Nemenyi critical difference");
    stats_cmd->configurable();
    stats_cmd->add_option("--scores", stats_scores, "Score table CSV (dataset column, one column per model)");
    stats_cmd->add_option("--avg-ranks", stats_ranks, "Precomputed average ranks, comma separated")->delimiter(',');
    stats_cmd->add_option("--n", stats_n, "Number of datasets behind --avg-ranks");
    stats_cmd->add_option("--models", stats.model_names, "Model labels for --avg-ranks")->delimiter(',');
    stats_cmd->add_option("--q-alpha", stats.q_alpha, "Studentized range critical value")->capture_default_str();
    stats_cmd->add_option("--f-critical", stats.f_critical, "F critical value to compare F_F against");
    stats_cmd->add_flag("--higher-better", stats_higher, "Larger scores rank first");
    stats_cmd->add_option("--out", stats_out, "Also write the report to this CSV file");

    // bounds
    bounds_config bounds;
    std::string bounds_model;
    bool lipschitz_given = false;
    auto *bounds_cmd = app.add_subcommand("bounds", "Rademacher complexity and generalization bound of a saved model");
    bounds_cmd->configurable();
    bounds_cmd->add_option("model", bounds_model, "Model file")->required();
    bounds_cmd->add_option("--B", bounds.b, "Weight-norm cap")->capture_default_str();
    auto *l_opt = bounds_cmd->add_option("--L", bounds.l, "Lipschitz constant of the loss")->capture_default_str();
    bounds_cmd->add_option("--delta", bounds.delta, "Confidence parameter in (0, 1)")->capture_default_str();
    bounds_cmd->add_option("--empirical-error", bounds.empirical_error, "Empirical error (default: training RMSE)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (print_config) {
        std::istringstream all{ app.config_to_str(true, false) };
        for (std::string line; std::getline(all, line);) {
            if (line.rfind("print-config=", 0) != 0) {
                std::cout << line << '\n';
            }
        }
        return 0;
    }

    try {
        if (*synth_cmd) {
            synth.fn = parse_synthetic_fn(synth_fn);
            synth.noise = parse_noise_kind(synth_noise);
            synth.out_dir = synth_out;
            const auto out = cmd_synth(synth);
            std::cout << "wrote " << out.train.string() << ", " << out.test.string() << ", " << out.manifest.string() << '\n';
        } else if (*fit_cmd) {
            fit_config cfg;
            cfg.train_csv = fit_train;
            cfg.target = column_selector::parse(fit_target);
            cfg.grid = fit_grid.spec();
            cfg.normalize = !fit_no_normalize;
            cfg.options.kkt_tolerance = fit_tol;
            cfg.out_dir = fit_out;
            if (fit_no_tune) {
                cfg.hp = hyperparams{ fit_c[0], fit_c[1], fit_c[2], fit_c[3], fit_c[4], fit_c[5], fit_grid.eps, fit_grid.eps, fit_grid.kernel_choice() };
                cfg.hp->validate();
            }
            const auto out = cmd_fit(cfg);
            if (out.tuning) {
                std::cout << "candidates=" << out.tuning->candidates.size() << " failed=" << out.tuning->failure_log.size() << " cv_rmse=" << detail::format_double(out.tuning->best_rmse()) << '\n';
            }
            const auto &hp = out.model.hp;
            std::cout << "c=" << hp.c1 << ',' << hp.c2 << ',' << hp.c3 << ',' << hp.c4 << ',' << hp.c5 << ',' << hp.c6;
            if (hp.kernel) {
                std::cout << " kernel=" << to_string(hp.kernel->kind) << " mu=" << hp.kernel->mu;
            } else {
                std::cout << " kernel=linear";
            }
            std::cout << '\n' << "kkt_max=" << detail::format_double(out.kkt.max()) << " limit=" << detail::format_double(out.kkt_limit) << '\n'
                      << "wrote " << out.model_file.string() << ", " << out.kkt_file.string() << '\n';
        } else if (*eval_cmd) {
            eval.model_file = eval_model;
            eval.test_csv = eval_test;
            eval.target = column_selector::parse(eval_target);
            if (!eval_out.empty()) {
                eval.append_csv = eval_out;
            }
            const auto out = cmd_eval(eval);
            print_metrics(out.m, out.predict_seconds);
        } else if (*bench_cmd) {
            benchmark_config cfg;
            cfg.repeats = bench_repeats;
            cfg.seed = bench_grid.seed;
            cfg.grid = bench_grid.spec();
            cfg.with_krr = !bench_no_krr;
            cfg.out_dir = bench_out;
            const split_scheme split = bench_head ? split_scheme{ head_split{ *bench_head } } : split_scheme{ ratio_split{ bench_ratio, 0 } };
            for (const auto &s : bench_synthetic) {
                const auto colon = s.find(':');
                synthetic_source src;
                src.fn = parse_synthetic_fn(s.substr(0, colon));
                src.noise = parse_noise_kind(colon == std::string::npos ? bench_noise : s.substr(colon + 1));
                src.n_train = bench_n_train;
                src.n_test = bench_n_test;
                cfg.datasets.push_back({ std::string{ to_string(src.fn) } + "_" + std::string{ to_string(src.noise) }, src });
            }
            for (const auto &p : bench_csv) {
                cfg.datasets.push_back({ fs::path{ p }.stem().string(), csv_source{ p, column_selector::last(), split } });
            }
            for (const auto &p : bench_series) {
                cfg.datasets.push_back({ fs::path{ p }.stem().string(), series_source{ p, bench_lags, column_selector::last(), split } });
            }
            const auto out = cmd_benchmark(cfg);
            for (const auto &row : out.rows) {
                std::cout << row.name << ": lstsvrpi_rmse=" << detail::optional_cell(row.proposed.rmse);
                if (row.krr) {
                    std::cout << " krr_rmse=" << detail::optional_cell(row.krr->rmse);
                }
                std::cout << " failures=" << row.failures.size() << '\n';
            }
            std::cout << "wrote " << out.metrics_file.string() << ", " << out.repeats_file.string() << ", " << out.timing_file.string() << '\n';
        } else if (*stats_cmd) {
            if (!stats_scores.empty()) {
                stats.scores_csv = stats_scores;
            }
            if (!stats_ranks.empty()) {
                stats.avg_ranks = stats_ranks;
            }
            if (stats_n > 0) {
                stats.n = stats_n;
            }
            stats.direction = stats_higher ? score_direction::higher_better : score_direction::lower_better;
            if (!stats_out.empty()) {
                stats.out_csv = stats_out;
            }
            write_stats_report(std::cout, cmd_stats(stats));
        } else if (*bounds_cmd) {
            bounds.model_file = bounds_model;
            lipschitz_given = l_opt->count() > 0;
            if (!lipschitz_given) {
                std::cerr << "warning: L defaults to 1, which is illustrative only\n";
            }
            const auto out = cmd_bounds(bounds);
            std::cout << "m=" << out.inputs.kernel_diag.size() << '\n'
                      << "empirical_error=" << detail::format_double(out.inputs.empirical_error) << '\n'
                      << "rademacher=" << detail::format_double(out.rademacher) << '\n'
                      << "generalization=" << detail::format_double(out.generalization) << '\n';
        }
    } catch (const lstsvrpi::error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
