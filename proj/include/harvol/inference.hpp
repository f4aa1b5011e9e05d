#pragma once

#include "harvol/errors.hpp"
#include "harvol/model.hpp"
#include "harvol/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace harvol {

inline constexpr std::size_t kDefaultReplications = 4999;
inline constexpr std::size_t kDefaultMaxLag = 30;
inline constexpr std::uint64_t kDefaultSeed = 20220224;

struct BootstrapConfig {
    std::size_t replications = kDefaultReplications;
    std::uint64_t seed = kDefaultSeed;
    /// Expected block length; selected from the response when unset.
    std::optional<double> block_length;
    /// Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
    unsigned threads = 0;

    void validate() const;
};

struct BlockLength {
    double value = 1.0;
    std::size_t pilot_lag = 0;  ///< M, the flat-top window bandwidth
    bool degenerate = false;    ///< constant series, or an unusable spectral estimate
};

/// Automatic expected block length for the stationary bootstrap.
///
/// Plug-in estimate (2 G^2 / D)^(1/3) n^(1/3) with G and the spectral density
/// at zero estimated through a flat-top lag window. The bandwidth is twice the
/// smallest lag after which 5 consecutive autocorrelations are below
/// 2 sqrt(log10(n) / n). Clamped to [1, n/3]. Requires n >= 20.
[[nodiscard]] BlockLength select_block_length(std::span<const double> series);
[[nodiscard]] double auto_block_length(std::span<const double> series, Warnings* warnings = nullptr);

/// One stationary-bootstrap resample of row indices 0..n-1: blocks start at a
/// uniform position, continue with wraparound, and end with probability
/// 1/block_length after each element.
[[nodiscard]] std::vector<std::size_t> stationary_bootstrap_indices(std::size_t n, double block_length, Rng& rng);

struct BootstrapResult {
    std::vector<double> p_values;    ///< two-sided, from the centered bootstrap distribution
    std::vector<double> std_errors;  ///< standard deviation of the replicate estimates
    double block_length = 1.0;
    bool block_length_auto = true;
    std::size_t replications = 0;
    std::size_t redraws = 0;  ///< rank-deficient resamples that were drawn again
    std::uint64_t seed = 0;
    Warnings warnings;
};

/// Pairs stationary bootstrap of OLS coefficients.
///
/// Replication b draws from substream ("bootstrap", b) of the seed, so the
/// result is identical for any thread count. The p-value of coefficient i is
/// the share of replicates with |beta*_i - beta_i| >= |beta_i|.
[[nodiscard]] BootstrapResult stationary_bootstrap_pvalues(const DesignMatrix& design, const OlsFit& fit,
                                                           const BootstrapConfig& config);

struct SerialTestResult {
    double statistic = 0.0;
    std::size_t chosen_lag = 1;
    double p_value = 1.0;
    std::size_t max_lag = kDefaultMaxLag;
};

/// Automatic portmanteau test for serial correlation, robust to conditional
/// heteroskedasticity.
///
/// Uses autocorrelations normalized by the fourth-moment term, a data-driven
/// lag chosen by penalized maximization (penalty p log n when every robust
/// autocorrelation satisfies sqrt(n)|rho_j| <= sqrt(2.4 log n), otherwise 2p),
/// and a chi-square(1) reference distribution. Requires n > max_lag + 10.
[[nodiscard]] SerialTestResult auto_portmanteau(std::span<const double> residuals,
                                                std::size_t max_lag = kDefaultMaxLag);

/// "c", "b", "a" for significance at 1%, 5%, 10%; empty otherwise.
[[nodiscard]] std::string significance_stars(double p_value);

/// Everything reported for one fitted spec.
struct FitReport {
    ModelSpec spec;
    std::vector<std::string> labels;
    std::vector<Panel> panels;
    std::vector<double> coefficients;
    std::vector<double> p_values;
    std::vector<double> std_errors;
    std::vector<double> residuals;
    std::vector<std::size_t> rows;
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    double condition_estimate = 0.0;
    SerialTestResult serial;
    std::uint64_t seed = 0;
    std::size_t replications = 0;
    double block_length = 1.0;
    bool block_length_auto = true;
    std::size_t redraws = 0;
    std::size_t dropped_rows = 0;
    Warnings warnings;
};

struct InferenceConfig {
    BootstrapConfig bootstrap;
    std::size_t max_lag = kDefaultMaxLag;
};

/// OLS, bootstrap p-values and the residual serial-dependence test for one spec.
[[nodiscard]] FitReport fit_model(const ModelInputs& inputs, const ModelSpec& spec, const InferenceConfig& config,
                                  const std::vector<std::size_t>* restrict_rows = nullptr);

}  // namespace harvol
