#include "harvol/attention.hpp"
#include "harvol/diagnostics.hpp"
#include "harvol/errors.hpp"
#include "harvol/implied.hpp"
#include "harvol/inference.hpp"
#include "harvol/ingest.hpp"
#include "harvol/pipeline.hpp"
#include "harvol/report.hpp"
#include "harvol/variance.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace harvol;

namespace {

py::list series_list(const WindowSeries& s) {
    py::list out;
    for (const auto& v : s.values()) {
        if (v) {
            out.append(*v);
        } else {
            out.append(py::none());
        }
    }
    return out;
}

py::dict fit_dict(const FitReport& r) {
    py::dict d;
    d["model"] = r.spec.name;
    d["labels"] = r.labels;
    d["coefficients"] = r.coefficients;
    d["std_errors"] = r.std_errors;
    d["p_values"] = r.p_values;
    d["r_squared"] = r.r_squared;
    d["adjusted_r_squared"] = r.adjusted_r_squared;
    d["observations"] = r.rows.size();
    d["serial_p_value"] = r.serial.p_value;
    d["block_length"] = r.block_length;
    d["warnings"] = r.warnings;
    return d;
}

ChainedSeries hourly(std::vector<double> values, long offset_hours) {
    return ChainedSeries{"series", Hour{std::chrono::hours{offset_hours}}, std::move(values)};
}

}  // namespace

PYBIND11_MODULE(harvol, m) {
    m.doc() = "Intraday FX realized volatility, implied volatility and attention regressions";
    m.attr("__version__") = std::string(kVersion);

    static py::exception<Error> base_error(m, "Error", PyExc_RuntimeError);
    static py::exception<ValidationError> validation_error(m, "ValidationError", base_error.ptr());
    static py::exception<NumericalError> numerical_error(m, "NumericalError", base_error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::set_error(validation_error, e.what());
        } catch (const NumericalError& e) {
            py::set_error(numerical_error, e.what());
        } catch (const Error& e) {
            py::set_error(base_error, e.what());
        }
    });

    m.def(
        "grid_windows",
        [](const std::string& start, const std::string& end, int window_hours, const std::string& scope) {
            const GridPtr g = build_grid(parse_date(start), parse_date(end), window_hours);
            const auto sc = scope == "all" ? CalendarScope::all_days : CalendarScope::trading_days;
            py::list out;
            for (std::size_t i = 0; i < g->size(sc); ++i) {
                const Window& w = g->window(i, sc);
                py::dict d;
                d["index"] = w.index;
                d["trading_index"] = w.trading_index;
                d["date"] = format_date(w.date);
                d["slot"] = w.slot;
                d["start"] = format_timestamp(w.start);
                d["end"] = format_timestamp(w.end);
                out.append(d);
            }
            return out;
        },
        py::arg("start"), py::arg("end"), py::arg("window_hours") = 4, py::arg("scope") = "trading",
        "Windows of the grid between two inclusive dates; scope is 'trading' or 'all'.");

    m.def(
        "realized_variance",
        [](const std::vector<double>& prices, int windows_per_day) { return realized_variance(prices, windows_per_day); },
        py::arg("prices"), py::arg("windows_per_day") = 6, "Annualized realized variance of one window's prices.");
    m.def("annualized_volatility", &annualized_volatility, py::arg("ln_rv"));
    m.def(
        "window_iv", [](const std::vector<double>& quotes) { return window_iv(quotes); }, py::arg("quotes"),
        "Mean of squared quotes, or None when empty.");

    m.def(
        "clamp_batch",
        [](const std::vector<int>& raw) { return clamp_batch("series", Hour{}, raw).values; }, py::arg("raw"),
        "Lift zeros to 1 and validate a search-volume batch.");
    m.def(
        "chain_pair",
        [](std::vector<double> earlier, std::vector<double> later, std::size_t overlap) {
            if (overlap == 0 || overlap > earlier.size()) {
                throw ValidationError("attention", "overlap must be between 1 and the earlier length");
            }
            const auto offset = static_cast<long>(earlier.size() - overlap);
            return chain_pair(hourly(std::move(earlier), 0), hourly(std::move(later), offset)).values;
        },
        py::arg("earlier"), py::arg("later"), py::arg("overlap"),
        "Chain two hourly series whose last/first `overlap` hours coincide.");

    m.def(
        "auto_block_length", [](const std::vector<double>& x) { return auto_block_length(x); }, py::arg("series"));
    m.def(
        "stationary_bootstrap_indices",
        [](std::size_t n, double block_length, std::uint64_t seed) {
            Rng rng(seed);
            return stationary_bootstrap_indices(n, block_length, rng);
        },
        py::arg("n"), py::arg("block_length"), py::arg("seed"));
    m.def(
        "auto_portmanteau",
        [](const std::vector<double>& x, std::size_t max_lag) {
            const SerialTestResult r = auto_portmanteau(x, max_lag);
            py::dict d;
            d["statistic"] = r.statistic;
            d["chosen_lag"] = r.chosen_lag;
            d["p_value"] = r.p_value;
            d["max_lag"] = r.max_lag;
            return d;
        },
        py::arg("residuals"), py::arg("max_lag") = kDefaultMaxLag);
    m.def("significance_stars", &significance_stars, py::arg("p_value"));

    m.def(
        "simulate",
        [](std::uint64_t seed, double noise_sd, const std::string& path) {
            SynthConfig c;
            c.seed = seed;
            c.noise_sd = noise_sd;
            const SynthDataset sd = simulate(c);
            if (!path.empty()) write_dataset(path, sd.inputs, sd.truth);
            py::dict d;
            d["ln_rv"] = series_list(sd.inputs.ln_rv);
            d["ln_iv"] = series_list(sd.inputs.ln_iv);
            d["dln_iv"] = series_list(sd.inputs.dln_iv);
            d["ln_g"] = series_list(sd.inputs.ln_g);
            d["ln_r"] = series_list(sd.inputs.ln_r);
            d["ln_e"] = series_list(sd.inputs.ln_e);
            d["truth"] = sd.truth;
            return d;
        },
        py::arg("seed") = 1, py::arg("noise_sd") = SynthConfig{}.noise_sd, py::arg("path") = "",
        "Draw a synthetic dataset on the default grid; optionally write it as dataset JSON.");

    m.def(
        "fit",
        [](const std::string& dataset, const std::vector<int>& models, std::size_t replications, std::uint64_t seed,
           bool common) {
            const Dataset ds = read_dataset(dataset);
            std::vector<ModelSpec> specs;
            for (int k : models) specs.push_back(ModelSpec::preset(k));
            InferenceConfig ic;
            ic.bootstrap.replications = replications;
            ic.bootstrap.seed = seed;
            std::vector<std::size_t> rows;
            if (common) rows = common_rows(ds.inputs, specs);
            py::list out;
            for (const auto& s : specs) {
                FitReport r;
                {
                    py::gil_scoped_release release;
                    r = fit_model(ds.inputs, s, ic, common ? &rows : nullptr);
                }
                out.append(fit_dict(r));
            }
            return out;
        },
        py::arg("dataset"), py::arg("models") = std::vector<int>{1, 2, 3, 4, 5, 6, 7},
        py::arg("replications") = kDefaultReplications, py::arg("seed") = kDefaultSeed, py::arg("common_rows") = true,
        "Fit preset models on a dataset JSON file.");

    m.def(
        "describe",
        [](const std::string& dataset) {
            const Dataset ds = read_dataset(dataset);
            py::list out;
            for (const auto& r : describe_inputs(ds.inputs, "")) {
                py::dict d;
                d["label"] = r.label;
                d["count"] = r.count;
                d["mean"] = r.mean;
                d["sd"] = r.sd;
                d["min"] = r.min;
                d["max"] = r.max;
                d["skewness"] = r.skewness;
                d["kurtosis"] = r.kurtosis;
                d["rho1"] = r.rho1;
                d["rho6"] = r.rho6;
                d["rho30"] = r.rho30;
                out.append(d);
            }
            return out;
        },
        py::arg("dataset"));

    m.def(
        "run_pipeline",
        [](const std::string& config) {
            const PipelineResult r = run_pipeline(PipelineConfig::from_file(config));
            std::vector<std::string> files;
            for (const auto& f : r.files) files.push_back(f.generic_string());
            py::dict d;
            d["files"] = files;
            d["exit_code"] = r.exit_code();
            return d;
        },
        py::arg("config"), "Run the configured pipeline and write the report bundle.");
}
