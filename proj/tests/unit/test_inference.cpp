#include "harvol/diagnostics.hpp"
#include "harvol/errors.hpp"
#include "harvol/inference.hpp"
#include "harvol/rng.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace harvol;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> ar1(double phi, std::size_t n, Rng& rng) {
    std::vector<double> x(n);
    double prev = rng.normal() / std::sqrt(1.0 - phi * phi);
    for (auto& v : x) {
        prev = phi * prev + rng.normal();
        v = prev;
    }
    return x;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

DesignMatrix small_design(std::size_t n, Rng& rng) {
    DesignMatrix dm;
    dm.regressors.resize(static_cast<Eigen::Index>(n), 2);
    dm.response.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        dm.regressors(r, 0) = 1.0;
        dm.regressors(r, 1) = rng.normal();
        dm.response(r) = 0.5 + 0.3 * dm.regressors(r, 1) + rng.normal();
        dm.rows.push_back(i);
    }
    dm.labels = {"const", "x"};
    dm.panels = {Panel::autoregressive, Panel::autoregressive};
    return dm;
}

}  // namespace

TEST_CASE("block length of degenerate input", "[inference]") {
    const std::vector<double> flat(100, 3.0);
    const BlockLength bl = select_block_length(flat);
    CHECK(bl.degenerate);
    CHECK(bl.value == 1.0);
    Warnings w;
    CHECK(auto_block_length(flat, &w) == 1.0);
    CHECK(w.size() == 1);
    CHECK_THROWS_AS(select_block_length(std::vector<double>(19, 1.0)), ValidationError);
    std::vector<double> bad(30, 1.0);
    bad[4] = std::nan("");
    CHECK_THROWS_AS(select_block_length(bad), ValidationError);
}

TEST_CASE("block length grows with persistence", "[inference]") {
    Rng rng(derive_seed(31, "block-length"));
    std::vector<double> iid;
    std::vector<double> weak;
    std::vector<double> strong;
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> x(400);
        for (auto& v : x) v = rng.normal();
        iid.push_back(auto_block_length(x));
        weak.push_back(auto_block_length(ar1(0.1, 400, rng)));
        strong.push_back(auto_block_length(ar1(0.9, 400, rng)));
        for (double b : {iid.back(), weak.back(), strong.back()}) {
            CHECK(b >= 1.0);
            CHECK(b <= 400.0 / 3.0);
        }
    }
    CHECK(median(iid) < 5.0);
    CHECK(median(strong) > median(weak));
}

TEST_CASE("stationary bootstrap indices", "[inference]") {
    Rng rng(derive_seed(32, "indices"));
    for (double bl : {1.0, 3.5, 20.0}) {
        const auto idx = stationary_bootstrap_indices(50, bl, rng);
        REQUIRE(idx.size() == 50);
        for (std::size_t i : idx) CHECK(i < 50);
    }
    // Block length 1 draws every element afresh; a huge block wraps around.
    const auto one_block = stationary_bootstrap_indices(10, 1e12, rng);
    for (std::size_t i = 1; i < one_block.size(); ++i) CHECK(one_block[i] == (one_block[i - 1] + 1) % 10);

    // Mean run length tracks the expected block length.
    std::size_t breaks = 0;
    std::size_t total = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto idx = stationary_bootstrap_indices(500, 5.0, rng);
        for (std::size_t i = 1; i < idx.size(); ++i) breaks += idx[i] != (idx[i - 1] + 1) % 500 ? 1 : 0;
        total += idx.size() - 1;
    }
    CHECK_THAT(static_cast<double>(total) / static_cast<double>(breaks), WithinRel(5.0, 0.05));
}

TEST_CASE("bootstrap p-values", "[inference]") {
    Rng rng(derive_seed(33, "boot"));
    const DesignMatrix dm = small_design(120, rng);
    const OlsFit fit = ols_fit(dm);

    BootstrapConfig cfg;
    cfg.replications = 1;
    cfg.seed = 7;
    cfg.threads = 1;
    const BootstrapResult one = stationary_bootstrap_pvalues(dm, fit, cfg);
    for (double p : one.p_values) CHECK((p == 0.0 || p == 1.0));
    CHECK(one.p_values == stationary_bootstrap_pvalues(dm, fit, cfg).p_values);

    cfg.replications = 399;
    const BootstrapResult single = stationary_bootstrap_pvalues(dm, fit, cfg);
    CHECK(single.block_length_auto);
    for (double p : single.p_values) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(std::fmod(p * 399.0 + 1e-9, 1.0) < 1e-6);
    }
    CHECK(single.std_errors[1] > 0.0);

    for (unsigned threads : {2u, 3u, 8u}) {
        cfg.threads = threads;
        const BootstrapResult multi = stationary_bootstrap_pvalues(dm, fit, cfg);
        CHECK(multi.p_values == single.p_values);
        CHECK(multi.std_errors == single.std_errors);
    }

    cfg.threads = 1;
    cfg.block_length = 4.0;
    const BootstrapResult fixed = stationary_bootstrap_pvalues(dm, fit, cfg);
    CHECK_FALSE(fixed.block_length_auto);
    CHECK(fixed.block_length == 4.0);

    cfg.seed = 8;
    CHECK(stationary_bootstrap_pvalues(dm, fit, cfg).std_errors != fixed.std_errors);

    cfg.replications = 0;
    CHECK_THROWS_AS(stationary_bootstrap_pvalues(dm, fit, cfg), ValidationError);
    cfg.replications = 10;
    cfg.block_length = 0.5;
    CHECK_THROWS_AS(stationary_bootstrap_pvalues(dm, fit, cfg), ValidationError);
}

TEST_CASE("bootstrap standard error tracks the sampling spread", "[inference]") {
    // iid data: bootstrap SE of the slope is close to the classical OLS SE.
    Rng rng(derive_seed(34, "boot-se"));
    const DesignMatrix dm = small_design(400, rng);
    const OlsFit fit = ols_fit(dm);
    BootstrapConfig cfg;
    cfg.replications = 999;
    cfg.block_length = 1.0;
    cfg.threads = 1;
    const BootstrapResult r = stationary_bootstrap_pvalues(dm, fit, cfg);
    const double n = 400.0;
    const double sigma2 = fit.residuals.squaredNorm() / (n - 2.0);
    const Eigen::MatrixXd xtx_inv = (dm.regressors.transpose() * dm.regressors).inverse();
    const double classical = std::sqrt(sigma2 * xtx_inv(1, 1));
    CHECK_THAT(r.std_errors[1], WithinRel(classical, 0.15));
    CHECK(r.p_values[1] < 0.01);
}

TEST_CASE("portmanteau behaviour", "[inference]") {
    Rng rng(derive_seed(35, "portmanteau"));
    std::vector<double> e(400);
    for (auto& v : e) v = rng.normal();
    const SerialTestResult base = auto_portmanteau(e);
    CHECK(base.chosen_lag >= 1);
    CHECK(base.chosen_lag <= kDefaultMaxLag);
    CHECK(base.p_value >= 0.0);
    CHECK(base.p_value <= 1.0);
    CHECK_THAT(base.p_value, WithinAbs(std::erfc(std::sqrt(base.statistic / 2.0)), 1e-15));

    std::vector<double> scaled;
    std::vector<double> shifted;
    for (double v : e) {
        scaled.push_back(3.0 * v);
        shifted.push_back(v + 10.0);
    }
    const SerialTestResult s = auto_portmanteau(scaled);
    CHECK_THAT(s.statistic, WithinRel(base.statistic, 1e-10));
    CHECK(s.chosen_lag == base.chosen_lag);
    CHECK_THAT(auto_portmanteau(shifted).statistic, WithinRel(base.statistic, 1e-8));

    const auto dependent = ar1(0.5, 400, rng);
    CHECK(auto_portmanteau(dependent).p_value < 0.001);

    CHECK_THROWS_AS(auto_portmanteau(std::vector<double>(40, 1.0)), ValidationError);
    CHECK_NOTHROW(auto_portmanteau(std::vector<double>(41, 1.0)));
    CHECK_THROWS_AS(auto_portmanteau(e, 0), ValidationError);
}

TEST_CASE("significance stars", "[inference]") {
    CHECK(significance_stars(0.0) == "c");
    CHECK(significance_stars(0.0099) == "c");
    CHECK(significance_stars(0.01) == "b");
    CHECK(significance_stars(0.0499) == "b");
    CHECK(significance_stars(0.05) == "a");
    CHECK(significance_stars(0.0999) == "a");
    CHECK(significance_stars(0.10) == "");
    CHECK(significance_stars(1.0) == "");
}

TEST_CASE("fit_model assembles a full report", "[inference]") {
    SynthConfig sc;
    sc.seed = 36;
    const SynthDataset d = simulate(sc);
    InferenceConfig cfg;
    cfg.bootstrap.replications = 99;
    cfg.bootstrap.threads = 1;
    const FitReport r = fit_model(d.inputs, ModelSpec::preset(7), cfg);
    CHECK(r.labels.size() == 18);
    CHECK(r.p_values.size() == 18);
    CHECK(r.std_errors.size() == 18);
    CHECK(r.residuals.size() == r.rows.size());
    CHECK(r.replications == 99);
    CHECK(r.serial.max_lag == kDefaultMaxLag);
    CHECK(r.r_squared > 0.0);
    CHECK(r.adjusted_r_squared < r.r_squared);
    cfg.bootstrap.threads = 4;
    CHECK(fit_model(d.inputs, ModelSpec::preset(7), cfg).p_values == r.p_values);
}

TEST_CASE("block length tracks the AR(1) plug-in value", "[inference]") {
    // For AR(1) the optimal expected block is (2 phi / (1 - phi^2))^(2/3) n^(1/3).
    Rng rng(derive_seed(37, "ar1-theory"));
    const std::size_t n = 5000;
    for (double phi : {0.5, 0.8}) {
        std::vector<double> b;
        for (int rep = 0; rep < 40; ++rep) b.push_back(auto_block_length(ar1(phi, n, rng)));
        const double theory = std::pow(2.0 * phi / (1.0 - phi * phi), 2.0 / 3.0) * std::cbrt(static_cast<double>(n));
        CHECK_THAT(median(b), WithinRel(theory, 0.25));
    }
}
