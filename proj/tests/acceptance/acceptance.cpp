// One line per acceptance criterion; exits nonzero if any fails.

#include "harvol/attention.hpp"
#include "harvol/diagnostics.hpp"
#include "harvol/inference.hpp"
#include "harvol/model.hpp"
#include "harvol/pipeline.hpp"
#include "harvol/rng.hpp"
#include "harvol/variance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace harvol;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMaster = 20220224;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

Outcome golden_chain() {
    const Hour t0{std::chrono::hours{24 * 19045}};
    const std::vector<int> earlier{50, 60, 70, 80, 100, 40, 30, 5, 25, 5};
    const std::vector<int> later{20, 100, 18, 14, 28, 26, 15, 14, 12, 10};
    const auto start = Clock::now();
    const RawBatch b1 = clamp_batch("term", t0, earlier);
    const RawBatch b2 = clamp_batch("term", t0 + std::chrono::hours{7}, later);
    const ChainedSeries c = chain_pair(ChainedSeries::from_batch(b1), b2);
    const double elapsed = seconds_since(start);
    const std::vector<double> expected{200, 240, 280, 320, 400, 160, 120, 20, 100, 18, 14, 28, 26, 15, 14, 12, 10};
    const bool exact = c.values == expected;
    return {exact && elapsed < 1e-3, format("exact=%s, %.1f us", exact ? "yes" : "no", elapsed * 1e6)};
}

Outcome annualization() {
    const std::pair<double, double> cases[] = {{8.0, 54.5}, {10.0, 148.4}, {12.19, 443.6}, {5.88, 18.9}};
    double worst = 0.0;
    for (const auto& [ln_rv, quoted] : cases) {
        worst = std::max(worst, std::abs(annualized_volatility(ln_rv) / quoted - 1.0));
    }
    return {worst <= 0.005, format("max relative gap %.3f%%", worst * 100.0)};
}

Outcome coefficient_recovery() {
    const auto start = Clock::now();
    InferenceConfig cfg;
    cfg.bootstrap.replications = 999;
    std::size_t inside = 0;
    std::size_t total = 0;
    std::size_t redraws = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        SynthConfig sc;
        sc.seed = derive_seed(kMaster, "recovery", i);
        const SynthDataset d = simulate(sc);
        cfg.bootstrap.seed = derive_seed(kMaster, "recovery-bootstrap", i);
        const FitReport r = fit_model(d.inputs, ModelSpec::preset(7), cfg);
        redraws += r.redraws;
        for (std::size_t c = 0; c < r.labels.size(); ++c) {
            ++total;
            if (std::abs(r.coefficients[c] - d.truth.at(r.labels[c])) <= 3.0 * r.std_errors[c]) ++inside;
        }
    }
    const double share = static_cast<double>(inside) / static_cast<double>(total);
    const double elapsed = seconds_since(start);
    return {share >= 0.95 && elapsed < 600.0,
            format("%zu/%zu pairs within 3 SE (%.2f%%), %zu redraws, %.0f s", inside, total, share * 100.0, redraws,
                   elapsed)};
}

Outcome portmanteau_size_power() {
    const auto start = Clock::now();
    constexpr int kReps = 2000;
    constexpr std::size_t kN = 400;
    int size_rejections = 0;
    int power_rejections = 0;
    std::vector<double> e(kN);
    for (int rep = 0; rep < kReps; ++rep) {
        Rng rng(derive_seed(kMaster, "portmanteau", static_cast<std::uint64_t>(rep)));
        for (auto& v : e) v = rng.normal();
        if (auto_portmanteau(e).p_value < 0.05) ++size_rejections;
        double prev = rng.normal() / std::sqrt(0.75);
        for (auto& v : e) {
            prev = 0.5 * prev + rng.normal();
            v = prev;
        }
        if (auto_portmanteau(e).p_value < 0.05) ++power_rejections;
    }
    const double size = size_rejections / static_cast<double>(kReps);
    const double power = power_rejections / static_cast<double>(kReps);
    const double elapsed = seconds_since(start);
    return {size >= 0.03 && size <= 0.07 && power > 0.90 && elapsed < 300.0,
            format("size %.2f%%, power %.2f%%, %.1f s", size * 100.0, power * 100.0, elapsed)};
}

Outcome bootstrap_size() {
    const auto start = Clock::now();
    InferenceConfig cfg;
    cfg.bootstrap.replications = 999;
    int rejections = 0;
    constexpr int kDatasets = 500;
    for (int i = 0; i < kDatasets; ++i) {
        SynthConfig sc;
        sc.seed = derive_seed(kMaster, "size", static_cast<std::uint64_t>(i));
        sc.attention[0] = 0.0;
        const SynthDataset d = simulate(sc);
        cfg.bootstrap.seed = derive_seed(kMaster, "size-bootstrap", static_cast<std::uint64_t>(i));
        const FitReport r = fit_model(d.inputs, ModelSpec::preset(2), cfg);
        const auto it = std::find(r.labels.begin(), r.labels.end(), "lnG(t-1)");
        if (r.p_values[static_cast<std::size_t>(it - r.labels.begin())] < 0.05) ++rejections;
    }
    const double rate = rejections / static_cast<double>(kDatasets);
    const double elapsed = seconds_since(start);
    return {rate >= 0.025 && rate <= 0.08 && elapsed < 900.0,
            format("rejection rate %.2f%% (%d/%d), %.0f s", rate * 100.0, rejections, kDatasets, elapsed)};
}

Outcome variance_oracle() {
    const auto start = Clock::now();
    Rng rng(derive_seed(kMaster, "rv-oracle"));
    double worst_oracle = 0.0;
    double worst_invariance = 0.0;
    std::vector<double> p(48);
    std::vector<double> inv(48);
    std::vector<double> scaled(48);
    for (int path = 0; path < 1000; ++path) {
        p[0] = std::exp(8.0 * rng.uniform() - 4.0);
        const double vol = 1e-4 * std::exp(5.0 * rng.uniform());
        for (std::size_t j = 1; j < p.size(); ++j) p[j] = p[j - 1] * std::exp(vol * rng.normal());
        const double factor = std::exp(10.0 * rng.uniform() - 5.0);
        for (std::size_t j = 0; j < p.size(); ++j) {
            inv[j] = 1.0 / p[j];
            scaled[j] = p[j] * factor;
        }
        long double sum = 0.0L;
        for (std::size_t j = 1; j < p.size(); ++j) {
            const long double r = 100.0L * (std::log(static_cast<long double>(p[j])) -
                                            std::log(static_cast<long double>(p[j - 1])));
            sum += r * r;
        }
        const long double oracle = 252.0L * 6.0L * sum;
        const double rv = *realized_variance(p, 6);
        if (oracle > 0.0L) {
            worst_oracle = std::max(worst_oracle, static_cast<double>(std::abs((rv - oracle) / oracle)));
        }
        for (const auto* other : {&inv, &scaled}) {
            const double o = *realized_variance(*other, 6);
            if (rv > 0.0) worst_invariance = std::max(worst_invariance, std::abs(o - rv) / rv);
        }
    }
    const double elapsed = seconds_since(start);
    return {worst_oracle <= 1e-10 && worst_invariance <= 1e-12 && elapsed < 10.0,
            format("oracle %.2e, invariance %.2e, %.2f s", worst_oracle, worst_invariance, elapsed)};
}

Outcome nesting() {
    std::vector<ModelSpec> specs;
    for (int m = 1; m <= 7; ++m) specs.push_back(ModelSpec::preset(m));
    const std::vector<std::vector<int>> chains{{1, 2, 4, 7}, {1, 3, 4}, {1, 5, 6, 7}};
    int datasets = 0;
    int broken = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        SynthConfig sc;
        sc.seed = derive_seed(kMaster, "nesting", i);
        sc.noise_sd = 0.1 + 0.04 * static_cast<double>(i);
        if (i % 5 == 0) sc.attention = {0.0, 0.0, 0.0};
        if (i % 7 == 0) sc.div = 0.0;
        const SynthDataset d = simulate(sc);
        const NestingReport report = nested_r2_check(d.inputs, specs);
        ++datasets;
        bool ok = report.monotone();
        for (const auto& chain : chains) {
            for (std::size_t k = 1; k < chain.size(); ++k) {
                const auto a = static_cast<std::size_t>(chain[k - 1] - 1);
                const auto b = static_cast<std::size_t>(chain[k] - 1);
                ok = ok && report.r_squared[a] <= report.r_squared[b];
            }
        }
        broken += ok ? 0 : 1;
    }
    return {broken == 0, format("%d/%d datasets monotone along every chain", datasets - broken, datasets)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto start = Clock::now();
    const fs::path root = fs::path(HARVOL_TEST_TMP) / "acceptance";
    fs::remove_all(root);
    const std::string json = R"({"seed": 20220224,
        "pairs": [{"name": "USD/RUB", "synthetic": {}}, {"name": "EUR/RUB", "synthetic": {"noise_sd": 0.7}}],
        "models": [1, 2, 3, 4, 5, 6, 7]})";
    PipelineConfig a = PipelineConfig::from_json(json);
    PipelineConfig b = a;
    a.output_dir = root / "run_a";
    b.output_dir = root / "run_b";
    if (a.inference.bootstrap.replications != 4999) return {false, "default replication count is not 4999"};
    const PipelineResult ra = run_pipeline(a);
    const PipelineResult rb = run_pipeline(b);
    if (ra.exit_code() != 0 || rb.exit_code() != 0) return {false, "pipeline reported fit failures"};
    if (ra.files != rb.files) return {false, "file lists differ"};
    std::size_t bytes = 0;
    for (const auto& f : ra.files) {
        const std::string x = slurp(a.output_dir / f);
        if (x != slurp(b.output_dir / f)) return {false, "differs: " + f.generic_string()};
        bytes += x.size();
    }
    return {true, format("%zu files, %zu bytes identical, %.0f s", ra.files.size(), bytes, seconds_since(start))};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"chaining golden case", golden_chain},
        {"annualized volatility", annualization},
        {"coefficient recovery", coefficient_recovery},
        {"portmanteau size and power", portmanteau_size_power},
        {"bootstrap test size", bootstrap_size},
        {"realized variance oracle", variance_oracle},
        {"nesting monotonicity", nesting},
        {"determinism", determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
