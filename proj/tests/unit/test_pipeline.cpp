#include "harvol/errors.hpp"
#include "harvol/pipeline.hpp"
#include "harvol/rng.hpp"

#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

using namespace harvol;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path(HARVOL_TEST_TMP) / "pipeline" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string synthetic_config(const std::string& models, std::size_t reps, unsigned threads) {
    return R"({"seed": 99, "pairs": [{"name": "USD/RUB", "synthetic": {}}, {"name": "EUR/RUB", "synthetic": {"noise_sd": 0.5}}],
              "models": )" +
           models + R"(, "inference": {"replications": )" + std::to_string(reps) + R"(, "threads": )" +
           std::to_string(threads) + "}}";
}

PipelineConfig config_in(const std::string& json, const fs::path& out) {
    PipelineConfig c = PipelineConfig::from_json(json);
    c.output_dir = out;
    return c;
}

/// Raw inputs for a short sample: 5-minute prices, hourly quotes and one term
/// per attention category in 4-day batches overlapping by one day.
fs::path write_raw_inputs(const fs::path& dir, Date start, Date end) {
    Rng rng(derive_seed(61, "raw-inputs"));
    const Instant t0 = Instant{start};
    const Instant t1 = Instant{end + std::chrono::days{1}};
    {
        std::ofstream prices(dir / "prices.csv");
        prices << "timestamp_utc,price\n";
        double p = 75.0;
        for (Instant t = t0; t < t1; t += std::chrono::minutes{5}) {
            p *= std::exp(0.001 * rng.normal());
            prices << format_timestamp(t) << "," << std::setprecision(10) << p << "\n";
        }
    }
    {
        std::ofstream iv(dir / "iv.csv");
        iv << "timestamp_utc,maturity,quote\n";
        for (Instant t = t0; t < t1; t += std::chrono::hours{1}) {
            iv << format_timestamp(t) << ",1m," << 15.0 + 5.0 * rng.uniform() << "\n";
            iv << format_timestamp(t) << ",3m," << 12.0 + 3.0 * rng.uniform() << "\n";
        }
    }
    nlohmann::ordered_json manifest;
    const long total = (t1 - t0) / std::chrono::hours{1};
    for (const std::string& cat : {"general_market", "ruble", "russian_economy"}) {
        const std::string term = cat + " term";
        for (long s = 0, b = 0; s < total; s += 72, ++b) {
            const std::string file = cat + "_" + std::to_string(b) + ".csv";
            std::ofstream out(dir / file);
            out << "term,timestamp_utc,value\n";
            const long len = std::min(96L, total - s);
            for (long h = 0; h < len; ++h) {
                out << term << "," << format_timestamp(t0 + std::chrono::hours{s + h}) << ","
                    << static_cast<int>(rng.index(101)) << "\n";
            }
            manifest[cat][term].push_back(file);
            if (s + len >= total) break;
        }
    }
    std::ofstream(dir / "manifest.json") << manifest.dump(1);
    return dir / "manifest.json";
}

}  // namespace

TEST_CASE("config parsing", "[pipeline]") {
    const PipelineConfig c = PipelineConfig::from_json(
        R"({"grid": {"start": "2022-01-03", "end": "2022-03-04", "window_hours": 4}, "seed": 5,
            "pairs": [{"name": "X", "synthetic": {"persistence": 0.2}}],
            "models": [1, {"preset": 7, "name": "M7 MA", "attention_ma_window": 6}],
            "robustness": {"include_v5bar": true},
            "inference": {"replications": 49, "block_length": 3, "max_lag": 20}})");
    CHECK(c.seed == 5);
    CHECK(c.start == make_date(2022, 1, 3));
    REQUIRE(c.pairs.size() == 1);
    CHECK(c.pairs[0].synthetic->persistence == 0.2);
    REQUIRE(c.models.size() == 2);
    CHECK(c.models[0].include_v5bar);
    CHECK(c.models[1].attention_ma_window == 6);
    CHECK(c.inference.bootstrap.replications == 49);
    CHECK(*c.inference.bootstrap.block_length == 3.0);
    CHECK(c.inference.max_lag == 20);
    CHECK_NOTHROW(c.validate());

    CHECK_THROWS_AS(PipelineConfig::from_json("{not json"), ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"models": [9]})"), ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"pairs": [{"name": "A", "synthetic": {}}, {"name": "A", "synthetic": {}}]})")
                        .validate(),
                    ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"pairs": [{"name": "A", "prices": "nowhere.csv", "iv": "x.csv"}]})")
                        .validate(),
                    ValidationError);
    CHECK_THROWS_AS(PipelineConfig::from_json(R"({"variance": {"min_coverage": 0}})").validate(), ValidationError);
}

TEST_CASE("synthetic run writes a complete bundle", "[pipeline]") {
    const fs::path out = scratch("bundle");
    const PipelineResult r = run_pipeline(config_in(synthetic_config("[1, 7]", 49, 2), out));
    CHECK(r.exit_code() == 0);
    CHECK(r.failures.empty());
    for (const char* f : {"USD_RUB/model_Model_1.json", "USD_RUB/model_Model_7.json", "USD_RUB/recovery_Model_7.csv",
                          "USD_RUB/coefficients.txt", "USD_RUB/coefficients.csv", "USD_RUB/nesting.json",
                          "EUR_RUB/coefficients.txt", "descriptive.txt", "descriptive.csv", "metadata.json"}) {
        INFO(f);
        CHECK(fs::exists(out / f));
    }
    CHECK(r.files.back() == "metadata.json");

    const auto meta = nlohmann::json::parse(slurp(out / "metadata.json"));
    CHECK(meta["seed"] == 99);
    CHECK(meta["pairs"].size() == 2);
    CHECK(meta["pairs"][0]["bootstrap_seed"] == derive_seed(99, "bootstrap:USD/RUB"));
    CHECK(meta["files"].contains("USD_RUB/model_Model_7.json"));

    const auto nesting = nlohmann::json::parse(slurp(out / "USD_RUB/nesting.json"));
    CHECK(nesting["monotone"] == true);

    const auto m7 = nlohmann::json::parse(slurp(out / "USD_RUB/model_Model_7.json"));
    CHECK(m7["coefficients"].size() == 18);
    CHECK(m7["bootstrap"]["replications"] == 49);

    const std::string table = slurp(out / "USD_RUB/coefficients.txt");
    CHECK(table.find("Model 1") != std::string::npos);
    CHECK(table.find("Model 7") != std::string::npos);
    CHECK(table.find("Observations") != std::string::npos);
}

TEST_CASE("reruns are byte-identical regardless of threads", "[pipeline]") {
    const fs::path a = scratch("rerun_a");
    const fs::path b = scratch("rerun_b");
    const PipelineResult ra = run_pipeline(config_in(synthetic_config("[1, 2, 7]", 99, 1), a));
    const PipelineResult rb = run_pipeline(config_in(synthetic_config("[1, 2, 7]", 99, 4), b));
    REQUIRE(ra.files == rb.files);
    for (const auto& f : ra.files) {
        INFO(f.string());
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("seed changes the results", "[pipeline]") {
    const fs::path a = scratch("seed_a");
    const fs::path b = scratch("seed_b");
    PipelineConfig ca = config_in(synthetic_config("[1]", 49, 1), a);
    PipelineConfig cb = ca;
    cb.output_dir = b;
    cb.seed = 100;
    (void)run_pipeline(ca);
    (void)run_pipeline(cb);
    CHECK(slurp(a / "USD_RUB/model_Model_1.json") != slurp(b / "USD_RUB/model_Model_1.json"));
}

TEST_CASE("empty model list writes descriptives only", "[pipeline]") {
    const fs::path out = scratch("empty");
    const PipelineResult r = run_pipeline(config_in(synthetic_config("[]", 49, 1), out));
    CHECK(r.exit_code() == 0);
    CHECK(r.files == std::vector<fs::path>{"descriptive.txt", "descriptive.csv", "metadata.json"});
}

TEST_CASE("fit failures map to exit codes", "[pipeline]") {
    const fs::path out = scratch("failures");
    // An onset day outside the sample is an input problem.
    const PipelineResult bad_input = run_pipeline(config_in(
        synthetic_config(R"([1, {"name": "late", "onset_days": ["2022-03-12"]}])", 19, 1), out / "input"));
    CHECK(bad_input.exit_code() == 1);
    CHECK_FALSE(bad_input.failures.empty());

    // A repeated onset day makes two identical columns.
    PipelineConfig numeric = config_in(
        synthetic_config(R"([{"name": "twice", "onset_days": ["2022-02-24", "2022-02-24"]}])", 19, 1), out / "num");
    numeric.common_rows = false;
    const PipelineResult rank = run_pipeline(numeric);
    CHECK(rank.exit_code() == 2);
    REQUIRE(rank.failures.size() == 2);
    CHECK(rank.failures[0].message.find("collinear") != std::string::npos);
    CHECK(fs::exists(out / "num" / "metadata.json"));

    CHECK(exit_code_for(ValidationError("x", "y")) == 1);
    CHECK(exit_code_for(NumericalError("x", "y")) == 2);
    CHECK(exit_code_for(std::runtime_error("z")) == 1);
}

TEST_CASE("file-based pair end to end", "[pipeline]") {
    const fs::path dir = scratch("files");
    const Date start = make_date(2022, 2, 14);
    const Date end = make_date(2022, 3, 11);
    const fs::path manifest = write_raw_inputs(dir, start, end);
    nlohmann::ordered_json cfg;
    cfg["grid"] = {{"start", "2022-02-14"}, {"end", "2022-03-11"}, {"window_hours", 4}};
    cfg["attention"] = {{"manifest", "manifest.json"}};
    cfg["pairs"] = nlohmann::ordered_json::array({{{"name", "USD/RUB"}, {"prices", "prices.csv"}, {"iv", "iv.csv"}}});
    cfg["models"] = {1, 7};
    cfg["inference"] = {{"replications", 29}, {"threads", 1}};
    cfg["output_dir"] = "out";
    std::ofstream(dir / "config.json") << cfg.dump();

    const PipelineConfig c = PipelineConfig::from_file(dir / "config.json");
    CHECK(c.output_dir == dir / "out");
    const auto prepared = prepare_inputs(c);
    REQUIRE(prepared.size() == 1);
    const ModelInputs& in = prepared[0].data.inputs;
    CHECK(in.ln_rv.size() == 20u * 6);
    CHECK(in.ln_rv.present_count() == 20u * 6);
    CHECK(in.ln_g.size() == 26u * 6);
    CHECK(in.ln_g.present_count() == 26u * 6);
    REQUIRE(prepared[0].rv);
    CHECK(prepared[0].rv->annualization_factor == 1512.0);
    // One term per category instead of the full lists.
    CHECK(std::any_of(prepared[0].warnings.begin(), prepared[0].warnings.end(),
                      [](const std::string& w) { return w.find("terms, expected") != std::string::npos; }));

    const PipelineResult r = run_pipeline(c);
    for (const auto& f : r.failures) WARN(f.message);
    CHECK(r.exit_code() == 0);
    CHECK(fs::exists(dir / "out" / "USD_RUB" / "model_Model_7.json"));
    CHECK_FALSE(fs::exists(dir / "out" / "USD_RUB" / "recovery_Model_7.csv"));
}

TEST_CASE("shipped configs and term lists", "[pipeline]") {
    const fs::path root = HARVOL_SOURCE_DIR;
    const PipelineConfig synthetic = PipelineConfig::from_file(root / "configs" / "synthetic.json");
    CHECK_NOTHROW(synthetic.validate());
    CHECK(synthetic.models.size() == 7);
    CHECK(synthetic.inference.bootstrap.replications == 4999);

    const PipelineConfig files = PipelineConfig::from_file(root / "configs" / "files.json");
    CHECK(files.pairs.size() == 2);
    CHECK(files.attention_manifest == root / "configs" / "attention" / "manifest.json");
    CHECK_THROWS_AS(files.validate(), ValidationError);  // the raw files are not shipped

    const auto terms = nlohmann::json::parse(slurp(root / "data" / "terms.json"));
    for (Category c : {Category::general_market, Category::ruble, Category::russian_economy}) {
        CHECK(terms.at(std::string(to_string(c))).get<std::vector<std::string>>() == default_terms(c));
    }
}
