#include "harvol/pipeline.hpp"

#include "harvol/errors.hpp"
#include "harvol/implied.hpp"
#include "harvol/report.hpp"
#include "harvol/variance.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace harvol {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kModule = "pipeline";

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
T get_or(const ordered_json& obj, const char* key, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    return it->get<T>();
}

std::vector<Date> parse_dates(const ordered_json& arr) {
    std::vector<Date> out;
    for (const auto& d : arr) out.push_back(parse_date(d.get<std::string>()));
    return out;
}

ModelSpec parse_model(const ordered_json& m) {
    if (m.is_number_integer()) return ModelSpec::preset(m.get<int>());
    if (!m.is_object()) throw ValidationError(kModule, "model entries must be numbers 1..7 or objects");
    ModelSpec spec;
    if (m.contains("preset")) spec = ModelSpec::preset(m["preset"].get<int>());
    spec.name = get_or<std::string>(m, "name", spec.name);
    if (spec.name.empty()) throw ValidationError(kModule, "custom model needs a name");
    spec.include_attention = get_or<bool>(m, "attention", spec.include_attention);
    spec.include_div = get_or<bool>(m, "div", spec.include_div);
    spec.include_iv_level = get_or<bool>(m, "iv_level", spec.include_iv_level);
    spec.include_v5bar = get_or<bool>(m, "v5bar", spec.include_v5bar);
    spec.attention_ma_window = get_or<std::size_t>(m, "attention_ma_window", spec.attention_ma_window);
    if (m.contains("onset_days")) spec.onset_days = parse_dates(m["onset_days"]);
    return spec;
}

SynthConfig parse_synthetic(const ordered_json& s, const PipelineConfig& c) {
    SynthConfig sc;
    sc.start = c.start;
    sc.end = c.end;
    sc.window_hours = c.window_hours;
    if (sc.window_hours != 4 && !s.contains("seasonal")) {
        sc.seasonal.assign(static_cast<std::size_t>(24 / sc.window_hours - 1), 0.0);
    }
    sc.skip_leading_windows = get_or<std::size_t>(s, "skip_leading_windows", sc.skip_leading_windows);
    sc.intercept = get_or<double>(s, "intercept", sc.intercept);
    sc.persistence = get_or<double>(s, "persistence", sc.persistence);
    sc.div = get_or<double>(s, "div", sc.div);
    sc.iv_level = get_or<double>(s, "iv_level", sc.iv_level);
    sc.v5bar = get_or<double>(s, "v5bar", sc.v5bar);
    sc.noise_sd = get_or<double>(s, "noise_sd", sc.noise_sd);
    if (s.contains("seasonal")) sc.seasonal = s["seasonal"].get<std::vector<double>>();
    if (s.contains("onset")) sc.onset = s["onset"].get<std::vector<double>>();
    if (s.contains("onset_days")) sc.onset_days = parse_dates(s["onset_days"]);
    if (s.contains("attention")) {
        const auto a = s["attention"].get<std::vector<double>>();
        if (a.size() != 3) throw ValidationError(kModule, "synthetic attention needs three coefficients");
        std::copy(a.begin(), a.end(), sc.attention.begin());
    }
    return sc;
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out;
}

bool needs_attention(const std::vector<ModelSpec>& specs) {
    return std::any_of(specs.begin(), specs.end(), [](const ModelSpec& s) { return s.include_attention; });
}

void write_file(const std::filesystem::path& root, const std::filesystem::path& rel, const std::string& content,
                PipelineResult& result) {
    const auto full = root / rel;
    std::filesystem::create_directories(full.parent_path());
    std::ofstream out(full, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError(kModule, "cannot write " + full.string());
    out << content;
    result.files.push_back(rel);
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text, const std::filesystem::path& base_dir) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(kModule, std::string("invalid config JSON: ") + e.what());
    }
    PipelineConfig c;
    try {
        if (doc.contains("grid")) {
            const auto& g = doc["grid"];
            if (g.contains("start")) c.start = parse_date(g["start"].get<std::string>());
            if (g.contains("end")) c.end = parse_date(g["end"].get<std::string>());
            c.window_hours = get_or<int>(g, "window_hours", c.window_hours);
        }
        c.seed = get_or<std::uint64_t>(doc, "seed", c.seed);
        if (doc.contains("attention")) {
            const auto& a = doc["attention"];
            if (a.contains("manifest")) c.attention_manifest = resolve(base_dir, a["manifest"].get<std::string>());
            c.chain.batch_days = get_or<int>(a, "batch_days", c.chain.batch_days);
            c.chain.overlap_days = get_or<int>(a, "overlap_days", c.chain.overlap_days);
        }
        if (doc.contains("pairs")) {
            for (const auto& p : doc["pairs"]) {
                PairSource src;
                src.name = p.at("name").get<std::string>();
                if (p.contains("prices")) src.prices = resolve(base_dir, p["prices"].get<std::string>());
                if (p.contains("iv")) src.iv = resolve(base_dir, p["iv"].get<std::string>());
                src.maturity = get_or<std::string>(p, "maturity", src.maturity);
                if (p.contains("dataset")) src.dataset = resolve(base_dir, p["dataset"].get<std::string>());
                if (p.contains("synthetic")) src.synthetic = parse_synthetic(p["synthetic"], c);
                c.pairs.push_back(std::move(src));
            }
        }
        if (doc.contains("models")) {
            for (const auto& m : doc["models"]) c.models.push_back(parse_model(m));
        }
        if (doc.contains("robustness")) {
            const auto& r = doc["robustness"];
            const auto ma = get_or<std::size_t>(r, "attention_ma_window", 0);
            const bool v5 = get_or<bool>(r, "include_v5bar", false);
            for (auto& m : c.models) {
                if (ma > 0) m.attention_ma_window = ma;
                if (v5) m.include_v5bar = true;
            }
        }
        c.common_rows = get_or<bool>(doc, "common_rows", c.common_rows);
        if (doc.contains("variance")) {
            c.min_coverage = get_or<double>(doc["variance"], "min_coverage", c.min_coverage);
            c.sampling_minutes = get_or<int>(doc["variance"], "sampling_minutes", c.sampling_minutes);
        }
        if (doc.contains("inference")) {
            const auto& inf = doc["inference"];
            c.inference.bootstrap.replications =
                get_or<std::size_t>(inf, "replications", c.inference.bootstrap.replications);
            if (inf.contains("block_length") && !inf["block_length"].is_null()) {
                c.inference.bootstrap.block_length = inf["block_length"].get<double>();
            }
            c.inference.bootstrap.threads = get_or<unsigned>(inf, "threads", c.inference.bootstrap.threads);
            c.inference.max_lag = get_or<std::size_t>(inf, "max_lag", c.inference.max_lag);
        }
        if (doc.contains("output_dir")) c.output_dir = resolve(base_dir, doc["output_dir"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(kModule, std::string("malformed config: ") + e.what());
    }
    return c;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(kModule, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str(), path.parent_path());
}

void PipelineConfig::validate() const {
    (void)WindowGrid(start, end, window_hours);
    if (!(min_coverage > 0.0 && min_coverage <= 1.0)) {
        throw ValidationError(kModule, "min_coverage must lie in (0, 1]");
    }
    if (sampling_minutes <= 0 || (window_hours * 60) % sampling_minutes != 0) {
        throw ValidationError(kModule, "sampling_minutes must divide the window length");
    }
    inference.bootstrap.validate();
    std::set<std::string> names;
    std::set<std::string> model_names;
    for (const auto& m : models) {
        if (!model_names.insert(m.name).second) throw ValidationError(kModule, "duplicate model name " + m.name);
    }
    bool file_pairs = false;
    for (const auto& p : pairs) {
        if (p.name.empty()) throw ValidationError(kModule, "pair without a name");
        if (!names.insert(p.name).second) throw ValidationError(kModule, "duplicate pair name " + p.name);
        const int sources = (!p.prices.empty() || !p.iv.empty()) + !p.dataset.empty() + p.synthetic.has_value();
        if (sources != 1) {
            throw ValidationError(kModule, "pair " + p.name + " needs exactly one of prices+iv, dataset, synthetic");
        }
        if (!p.prices.empty() || !p.iv.empty()) {
            file_pairs = true;
            if (p.prices.empty() || p.iv.empty()) {
                throw ValidationError(kModule, "pair " + p.name + " needs both prices and iv files");
            }
            for (const auto& f : {p.prices, p.iv}) {
                if (!std::filesystem::exists(f)) throw ValidationError(kModule, "missing file " + f.string());
            }
        }
        if (!p.dataset.empty() && !std::filesystem::exists(p.dataset)) {
            throw ValidationError(kModule, "missing file " + p.dataset.string());
        }
        if (p.synthetic) p.synthetic->validate();
    }
    if (file_pairs && needs_attention(models)) {
        if (attention_manifest.empty()) {
            throw ValidationError(kModule, "models use attention but no attention manifest is configured");
        }
        if (!std::filesystem::exists(attention_manifest)) {
            throw ValidationError(kModule, "missing file " + attention_manifest.string());
        }
    }
}

std::vector<PreparedPair> prepare_inputs(const PipelineConfig& config) {
    const GridPtr grid = build_grid(config.start, config.end, config.window_hours);
    std::vector<PreparedPair> out;

    // Attention indices shared by file-based pairs.
    std::array<WindowSeries, 3> attention;
    Warnings attention_warnings;
    const bool any_files = std::any_of(config.pairs.begin(), config.pairs.end(),
                                       [](const PairSource& p) { return !p.prices.empty(); });
    if (any_files && !config.attention_manifest.empty()) {
        for (const auto& cat : ingest_batches(config.attention_manifest)) {
            std::vector<std::pair<std::string, WindowSeries>> members;
            for (const auto& tb : cat.terms) {
                const ChainedSeries chained = chain_all(tb.batches, config.chain);
                members.emplace_back(tb.term, window_average(chained, grid));
            }
            const auto expected = default_terms(cat.category);
            if (members.size() != expected.size()) {
                attention_warnings.push_back("category " + std::string(to_string(cat.category)) + " has " +
                                             std::to_string(members.size()) + " terms, expected " +
                                             std::to_string(expected.size()));
            }
            const CategoryIndex index = aggregate_category(cat.category, members);
            attention[static_cast<std::size_t>(cat.category)] = log_attention(index.values);
        }
        if (needs_attention(config.models)) {
            for (std::size_t a = 0; a < 3; ++a) {
                if (attention[a].empty()) {
                    throw ValidationError(kModule, "attention manifest lacks category " +
                                                       std::string(to_string(static_cast<Category>(a))));
                }
            }
        }
    }

    for (const auto& src : config.pairs) {
        PreparedPair pp;
        pp.name = src.name;
        if (src.synthetic) {
            SynthConfig sc = *src.synthetic;
            sc.seed = derive_seed(config.seed, "simulate:" + src.name);
            SynthDataset sd = simulate(sc);
            pp.data.inputs = std::move(sd.inputs);
            pp.data.truth = std::move(sd.truth);
        } else if (!src.dataset.empty()) {
            pp.data = read_dataset(src.dataset);
            if (!(*pp.data.inputs.grid == *grid)) {
                throw ValidationError(kModule, "dataset " + src.dataset.string() + " is on a different grid");
            }
        } else {
            const PriceSeries prices = ingest_prices(src.prices, std::chrono::minutes{config.sampling_minutes});
            RealizedVarianceSeries rv = realized_variance_series(prices, grid, config.min_coverage);
            auto& in = pp.data.inputs;
            in.grid = grid;
            in.ln_rv = log_rv(rv.values, &pp.warnings);
            if (rv.missing_windows > 0) {
                pp.warnings.push_back(std::to_string(rv.missing_windows) + " RV window(s) below coverage");
            }
            const IVQuoteSeries quotes = ingest_iv(src.iv, src.maturity);
            in.ln_iv = log_iv(implied_variance_series(quotes, grid));
            in.dln_iv = diff_log_iv(in.ln_iv);
            in.ln_g = attention[0];
            in.ln_r = attention[1];
            in.ln_e = attention[2];
            pp.rv = std::move(rv);
            pp.warnings.insert(pp.warnings.end(), attention_warnings.begin(), attention_warnings.end());
        }
        out.push_back(std::move(pp));
    }
    return out;
}

std::vector<DescriptiveRow> describe_inputs(const ModelInputs& inputs, const std::string& prefix,
                                            Warnings* warnings) {
    const std::pair<const WindowSeries*, const char*> series[] = {
        {&inputs.ln_rv, "lnRV"}, {&inputs.ln_iv, "lnIV"}, {&inputs.dln_iv, "dlnIV"},
        {&inputs.ln_g, "lnG"},   {&inputs.ln_r, "lnR"},   {&inputs.ln_e, "lnE"}};
    std::vector<DescriptiveRow> rows;
    for (const auto& [s, name] : series) {
        const std::string label = prefix.empty() ? name : prefix + " " + name;
        if (s->present_count() < 31) {
            if (warnings && !s->empty()) warnings->push_back(label + ": too few values to describe");
            continue;
        }
        rows.push_back(describe(*s, label));
    }
    return rows;
}

int PipelineResult::exit_code() const noexcept {
    if (failures.empty()) return 0;
    return std::any_of(failures.begin(), failures.end(), [](const FitFailure& f) { return f.numerical; }) ? 2 : 1;
}

int exit_code_for(const std::exception& error) noexcept {
    if (dynamic_cast<const NumericalError*>(&error)) return 2;
    return 1;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    std::vector<PreparedPair> pairs = prepare_inputs(config);

    struct Job {
        std::size_t pair;
        std::size_t model;
    };
    struct PairState {
        std::vector<std::size_t> rows;
        std::optional<NestingReport> nesting;
        std::optional<FitFailure> failure;
    };
    std::vector<PairState> state(pairs.size());
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        if (config.models.empty()) break;
        if (config.common_rows) {
            try {
                state[p].rows = common_rows(pairs[p].data.inputs, config.models);
                state[p].nesting = nested_r2_check(pairs[p].data.inputs, config.models);
            } catch (const Error& e) {
                state[p].failure = FitFailure{pairs[p].name, "common rows", e.what(),
                                              dynamic_cast<const NumericalError*>(&e) != nullptr};
                continue;
            }
        }
        for (std::size_t m = 0; m < config.models.size(); ++m) jobs.push_back({p, m});
    }

    std::vector<std::optional<FitReport>> fits(jobs.size());
    std::vector<std::optional<FitFailure>> job_failures(jobs.size());
    unsigned threads = config.inference.bootstrap.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    InferenceConfig inference = config.inference;
    inference.bootstrap.threads = std::max(1u, threads / workers);

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const auto& job = jobs[j];
            const auto& pair = pairs[job.pair];
            InferenceConfig ic = inference;
            ic.bootstrap.seed = derive_seed(config.seed, "bootstrap:" + pair.name);
            try {
                fits[j] = fit_model(pair.data.inputs, config.models[job.model], ic,
                                    config.common_rows ? &state[job.pair].rows : nullptr);
            } catch (const Error& e) {
                job_failures[j] = FitFailure{pair.name, config.models[job.model].name, e.what(),
                                             dynamic_cast<const NumericalError*>(&e) != nullptr};
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    PipelineResult result;
    const auto& root = config.output_dir;
    std::filesystem::create_directories(root);
    ordered_json provenance = ordered_json::object();
    std::vector<DescriptiveRow> described;
    ordered_json pair_meta = ordered_json::array();

    std::size_t j = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& pair = pairs[p];
        const std::filesystem::path dir = sanitize(pair.name);
        Warnings warnings = pair.warnings;
        auto rows = describe_inputs(pair.data.inputs, pair.name, &warnings);
        described.insert(described.end(), rows.begin(), rows.end());
        if (state[p].failure) result.failures.push_back(*state[p].failure);

        std::vector<FitReport> reports;
        for (; j < jobs.size() && jobs[j].pair == p; ++j) {
            if (job_failures[j]) {
                result.failures.push_back(*job_failures[j]);
                continue;
            }
            const FitReport& r = *fits[j];
            const auto rel = dir / ("model_" + sanitize(r.spec.name) + ".json");
            write_file(root, rel, fit_report_json(r), result);
            provenance[rel.generic_string()] = "inference.fit_model";
            if (!pair.data.truth.empty()) {
                const auto rec = dir / ("recovery_" + sanitize(r.spec.name) + ".csv");
                write_file(root, rec, recovery_csv(recovery(r, pair.data.truth)), result);
                provenance[rec.generic_string()] = "report.recovery(inference.fit_model, diagnostics.simulate)";
            }
            reports.push_back(r);
        }
        if (!reports.empty()) {
            write_file(root, dir / "coefficients.txt", coefficient_table(reports, pair.name), result);
            write_file(root, dir / "coefficients.csv", coefficient_csv(reports), result);
            provenance[(dir / "coefficients.txt").generic_string()] = "inference.fit_model";
            provenance[(dir / "coefficients.csv").generic_string()] = "inference.fit_model";
        }
        if (state[p].nesting) {
            const auto& n = *state[p].nesting;
            ordered_json nj;
            nj["common_rows"] = n.common_rows;
            nj["models"] = ordered_json::array();
            for (std::size_t i = 0; i < n.names.size(); ++i) {
                nj["models"].push_back(
                    {{"name", n.names[i]}, {"r_squared", n.r_squared[i]}, {"own_rows", n.own_rows[i]}});
            }
            nj["monotone"] = n.monotone();
            nj["violations"] = ordered_json::array();
            for (const auto& v : n.violations) {
                nj["violations"].push_back({{"smaller", v.smaller},
                                            {"larger", v.larger},
                                            {"r2_smaller", v.r2_smaller},
                                            {"r2_larger", v.r2_larger}});
            }
            write_file(root, dir / "nesting.json", nj.dump(1) + "\n", result);
            provenance[(dir / "nesting.json").generic_string()] = "model.nested_r2_check";
        }

        ordered_json pm;
        pm["name"] = pair.name;
        const auto& src = config.pairs[p];
        if (src.synthetic) {
            pm["source"] = "synthetic";
            pm["simulation_seed"] = derive_seed(config.seed, "simulate:" + src.name);
        } else if (!src.dataset.empty()) {
            pm["source"] = "dataset";
        } else {
            pm["source"] = "files";
            pm["maturity"] = src.maturity;
            if (pair.rv) {
                pm["rv_annualization_factor"] = pair.rv->annualization_factor;
                pm["rv_partial_windows"] = pair.rv->partial_windows;
                pm["rv_missing_windows"] = pair.rv->missing_windows;
            }
        }
        pm["bootstrap_seed"] = derive_seed(config.seed, "bootstrap:" + pair.name);
        pm["common_rows"] = state[p].rows.size();
        pm["warnings"] = warnings;
        pair_meta.push_back(pm);
    }

    if (!described.empty()) {
        write_file(root, "descriptive.txt", descriptive_table(described, "Descriptive statistics"), result);
        write_file(root, "descriptive.csv", descriptive_csv(described), result);
        provenance["descriptive.txt"] = "diagnostics.describe";
        provenance["descriptive.csv"] = "diagnostics.describe";
    }

    ordered_json meta;
    meta["version"] = kVersion;
    meta["seed"] = config.seed;
    meta["grid"] = {{"start", format_date(config.start)},
                    {"end", format_date(config.end)},
                    {"window_hours", config.window_hours}};
    meta["settings"] = {
        {"rv_min_coverage", config.min_coverage},
        {"rv_sampling_minutes", config.sampling_minutes},
        {"rv_returns", "within_window"},
        {"rv_trading_days_per_year", kTradingDaysPerYear},
        {"iv_window_value", "mean_squared_quote"},
        {"iv_stale_carry", "same_utc_day"},
        {"attention_zero_floor", 1},
        {"attention_chain_constant", "max_overlap_ratio"},
        {"attention_batch_days", config.chain.batch_days},
        {"attention_overlap_days", config.chain.overlap_days},
        {"attention_category_missing", "any_member_missing"},
        {"attention_lag_calendar", "all_days"},
        {"price_lag_calendar", "trading_days"},
        {"common_rows", config.common_rows},
        {"ols", "column_pivoted_householder_qr"},
        {"bootstrap", "stationary_pairs"},
        {"bootstrap_replications", config.inference.bootstrap.replications},
        {"bootstrap_block_length",
         config.inference.bootstrap.block_length ? ordered_json(*config.inference.bootstrap.block_length)
                                                 : ordered_json("auto_flat_top_clamped_1_to_n_over_3")},
        {"bootstrap_p_value", "share_centered_abs_ge_abs_estimate"},
        {"serial_test", "automatic_robust_portmanteau"},
        {"serial_test_max_lag", config.inference.max_lag},
        {"stars", "c=1%,b=5%,a=10%"}};
    meta["models"] = ordered_json::array();
    for (const auto& m : config.models) meta["models"].push_back(model_spec_json(m));
    meta["pairs"] = pair_meta;
    meta["failures"] = ordered_json::array();
    for (const auto& f : result.failures) {
        meta["failures"].push_back({{"pair", f.pair}, {"model", f.model}, {"message", f.message}});
    }
    meta["files"] = provenance;
    write_file(root, "metadata.json", meta.dump(1) + "\n", result);
    return result;
}

}  // namespace harvol
