// Command-line front end: one subcommand per processing stage plus `report`
// for the full pipeline.

#include "harvol/attention.hpp"
#include "harvol/diagnostics.hpp"
#include "harvol/errors.hpp"
#include "harvol/implied.hpp"
#include "harvol/inference.hpp"
#include "harvol/ingest.hpp"
#include "harvol/pipeline.hpp"
#include "harvol/report.hpp"
#include "harvol/variance.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace harvol;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> window_hours;
    std::optional<std::size_t> bootstrap_reps;
    std::string out;
};

PipelineConfig load_config(const Globals& g) {
    PipelineConfig c = g.config.empty() ? PipelineConfig{} : PipelineConfig::from_file(g.config);
    if (g.seed) c.seed = *g.seed;
    if (g.window_hours) c.window_hours = *g.window_hours;
    if (g.bootstrap_reps) c.inference.bootstrap.replications = *g.bootstrap_reps;
    if (!g.out.empty()) c.output_dir = g.out;
    return c;
}

GridPtr config_grid(const PipelineConfig& c) { return build_grid(c.start, c.end, c.window_hours); }

void emit(const Globals& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(g.out, std::ios::binary);
    if (!out) throw ValidationError("cli", "cannot write " + g.out);
    out << text;
}

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); }

std::string series_csv(const std::vector<std::pair<std::string, const WindowSeries*>>& cols) {
    const WindowSeries& first = *cols.front().second;
    std::string out = "window_start,date,slot";
    for (const auto& [name, s] : cols) out += "," + name;
    out += "\n";
    for (std::size_t i = 0; i < first.size(); ++i) {
        const Window& w = first.window(i);
        out += fmt::format("{},{},{}", format_timestamp(w.start), format_date(w.date), w.slot);
        for (const auto& [name, s] : cols) out += "," + cell((*s)[i]);
        out += "\n";
    }
    return out;
}

std::vector<ModelSpec> parse_models(const std::vector<int>& numbers, const PipelineConfig& c) {
    std::vector<ModelSpec> specs;
    if (numbers.empty()) return c.models.empty() ? std::vector<ModelSpec>{ModelSpec::preset(7)} : c.models;
    for (int n : numbers) specs.push_back(ModelSpec::preset(n));
    return specs;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intraday FX volatility, implied volatility and search attention"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Pipeline configuration JSON")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--window-hours", g.window_hours, "Window length in hours (2, 3, 4 or 6)");
    app.add_option("--bootstrap-reps", g.bootstrap_reps, "Bootstrap replications");
    app.add_option("--out", g.out, "Output file, or output directory for report");

    std::string start;
    std::string end;
    const auto add_range = [&](CLI::App* sub) {
        sub->add_option("--start", start, "First date, YYYY-MM-DD");
        sub->add_option("--end", end, "Last date, YYYY-MM-DD");
    };

    auto* grid_cmd = app.add_subcommand("grid", "List the windows of the grid");
    add_range(grid_cmd);
    std::string scope_name = "trading";
    grid_cmd->add_option("--scope", scope_name, "trading or all")->check(CLI::IsMember({"trading", "all"}));

    auto* rv_cmd = app.add_subcommand("rv", "Realized variance per window from a price CSV");
    add_range(rv_cmd);
    std::string prices_path;
    double min_coverage = 0.8;
    int sampling_minutes = 5;
    rv_cmd->add_option("prices", prices_path, "timestamp_utc,price CSV")->required()->check(CLI::ExistingFile);
    rv_cmd->add_option("--min-coverage", min_coverage, "Minimum share of expected prices per window");
    rv_cmd->add_option("--sampling-minutes", sampling_minutes, "Price cadence in minutes");

    auto* iv_cmd = app.add_subcommand("iv", "Implied variance per window from a quote CSV");
    add_range(iv_cmd);
    std::string iv_path;
    std::string maturity = "1m";
    iv_cmd->add_option("quotes", iv_path, "timestamp_utc,maturity,quote CSV")->required()->check(CLI::ExistingFile);
    iv_cmd->add_option("--maturity", maturity, "Quote maturity")->check(CLI::IsMember(known_maturities()));

    auto* att_cmd = app.add_subcommand("attention", "Chained, window-averaged attention indices");
    add_range(att_cmd);
    std::string manifest;
    std::size_t ma_window = 0;
    att_cmd->add_option("manifest", manifest, "Batch manifest JSON")->required()->check(CLI::ExistingFile);
    att_cmd->add_option("--ma", ma_window, "Also emit ln of the trailing moving average over this many windows");

    auto* fit_cmd = app.add_subcommand("fit", "Fit models on a dataset and print the coefficient table");
    std::string dataset_path;
    std::vector<int> model_numbers;
    bool own_rows = false;
    fit_cmd->add_option("dataset", dataset_path, "Dataset JSON (see simulate)")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--model", model_numbers, "Model number 1..7, repeatable")->check(CLI::Range(1, 7));
    fit_cmd->add_flag("--own-rows", own_rows, "Fit each model on its own usable rows");

    auto* diag_cmd = app.add_subcommand("diagnose", "Serial-dependence test and block length of a series");
    std::string diag_path;
    std::string column = "residual";
    std::size_t max_lag = kDefaultMaxLag;
    diag_cmd->add_option("csv", diag_path, "CSV with a header row")->required()->check(CLI::ExistingFile);
    diag_cmd->add_option("--column", column, "Column to test");
    diag_cmd->add_option("--max-lag", max_lag, "Largest lag considered");

    auto* desc_cmd = app.add_subcommand("describe", "Descriptive statistics of a dataset");
    std::string desc_path;
    bool as_csv = false;
    desc_cmd->add_option("dataset", desc_path, "Dataset JSON")->required()->check(CLI::ExistingFile);
    desc_cmd->add_flag("--csv", as_csv, "Emit CSV instead of the aligned table");

    auto* sim_cmd = app.add_subcommand("simulate", "Draw a synthetic dataset");
    add_range(sim_cmd);
    double noise_sd = SynthConfig{}.noise_sd;
    sim_cmd->add_option("--noise-sd", noise_sd, "Response noise standard deviation");

    auto* report_cmd = app.add_subcommand("report", "Run the configured pipeline and write the report bundle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        PipelineConfig cfg = load_config(g);
        if (!start.empty()) cfg.start = parse_date(start);
        if (!end.empty()) cfg.end = parse_date(end);

        if (*grid_cmd) {
            const GridPtr grid = config_grid(cfg);
            const auto scope = scope_name == "all" ? CalendarScope::all_days : CalendarScope::trading_days;
            std::string out = "index,trading_index,date,slot,start,end\n";
            for (std::size_t i = 0; i < grid->size(scope); ++i) {
                const Window& w = grid->window(i, scope);
                out += fmt::format("{},{},{},{},{},{}\n", w.index,
                                   w.trading_index ? std::to_string(*w.trading_index) : std::string(),
                                   format_date(w.date), w.slot, format_timestamp(w.start), format_timestamp(w.end));
            }
            emit(g, out);
        } else if (*rv_cmd) {
            const GridPtr grid = config_grid(cfg);
            const PriceSeries prices = ingest_prices(prices_path, std::chrono::minutes{sampling_minutes});
            const RealizedVarianceSeries rv = realized_variance_series(prices, grid, min_coverage);
            Warnings warnings;
            const WindowSeries ln = log_rv(rv.values, &warnings);
            WindowSeries vol(grid, CalendarScope::trading_days);
            for (std::size_t i = 0; i < ln.size(); ++i) {
                if (ln[i]) vol[i] = annualized_volatility(*ln[i]);
            }
            emit(g, series_csv({{"rv", &rv.values}, {"ln_rv", &ln}, {"annualized_vol", &vol}}));
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        } else if (*iv_cmd) {
            const GridPtr grid = config_grid(cfg);
            const WindowSeries iv = implied_variance_series(ingest_iv(iv_path, maturity), grid);
            const WindowSeries ln = log_iv(iv);
            const WindowSeries d = diff_log_iv(ln);
            emit(g, series_csv({{"iv2", &iv}, {"ln_iv", &ln}, {"dln_iv", &d}}));
        } else if (*att_cmd) {
            const GridPtr grid = config_grid(cfg);
            std::vector<std::pair<std::string, WindowSeries>> cols;
            for (const auto& cat : ingest_batches(manifest)) {
                std::vector<std::pair<std::string, WindowSeries>> members;
                for (const auto& tb : cat.terms) {
                    members.emplace_back(tb.term, window_average(chain_all(tb.batches, cfg.chain), grid));
                }
                const CategoryIndex idx = aggregate_category(cat.category, members);
                const std::string name(to_string(cat.category));
                cols.emplace_back("ln_" + name, log_attention(idx.values));
                if (ma_window > 0) {
                    cols.emplace_back("ln_ma" + std::to_string(ma_window) + "_" + name,
                                      ma_log_attention(idx.values, ma_window));
                }
            }
            if (cols.empty()) throw ValidationError("cli", "manifest has no categories");
            std::vector<std::pair<std::string, const WindowSeries*>> refs;
            for (const auto& [n, s] : cols) refs.emplace_back(n, &s);
            emit(g, series_csv(refs));
        } else if (*fit_cmd) {
            const Dataset ds = read_dataset(dataset_path);
            const auto specs = parse_models(model_numbers, cfg);
            InferenceConfig ic = cfg.inference;
            ic.bootstrap.seed = derive_seed(cfg.seed, "bootstrap:fit");
            std::vector<std::size_t> rows;
            if (!own_rows) rows = common_rows(ds.inputs, specs);
            std::vector<FitReport> reports;
            for (const auto& s : specs) reports.push_back(fit_model(ds.inputs, s, ic, own_rows ? nullptr : &rows));
            std::string text = coefficient_table(reports, dataset_path);
            for (const auto& r : reports) {
                for (const auto& w : r.warnings) std::cerr << "warning: " << r.spec.name << ": " << w << "\n";
            }
            emit(g, text);
        } else if (*diag_cmd) {
            const std::vector<double> x = read_csv_column(diag_path, column);
            const SerialTestResult t = auto_portmanteau(x, max_lag);
            const BlockLength b = select_block_length(x);
            emit(g, fmt::format("n,statistic,chosen_lag,p_value,block_length,block_degenerate\n{},{:.17g},{},{:.17g},"
                                "{:.17g},{}\n",
                                x.size(), t.statistic, t.chosen_lag, t.p_value, b.value, b.degenerate));
        } else if (*desc_cmd) {
            const Dataset ds = read_dataset(desc_path);
            Warnings warnings;
            const auto rows = describe_inputs(ds.inputs, "", &warnings);
            emit(g, as_csv ? descriptive_csv(rows) : descriptive_table(rows, desc_path));
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        } else if (*sim_cmd) {
            SynthConfig sc;
            sc.start = cfg.start;
            sc.end = cfg.end;
            sc.window_hours = cfg.window_hours;
            if (sc.window_hours != 4) sc.seasonal.assign(static_cast<std::size_t>(24 / sc.window_hours - 1), 0.0);
            sc.noise_sd = noise_sd;
            sc.seed = derive_seed(cfg.seed, "simulate");
            const SynthDataset sd = simulate(sc);
            emit(g, dataset_json(sd.inputs, sd.truth));
        } else if (*report_cmd) {
            if (g.config.empty()) throw ValidationError("cli", "report needs --config");
            const PipelineResult result = run_pipeline(cfg);
            for (const auto& f : result.failures) {
                std::cerr << "error: " << f.pair << " / " << f.model << ": " << f.message << "\n";
            }
            std::cout << "wrote " << result.files.size() << " file(s) to " << cfg.output_dir.string() << "\n";
            return result.exit_code();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
