#pragma once

#include "harvol/errors.hpp"
#include "harvol/windowing.hpp"

#include <chrono>
#include <optional>
#include <span>
#include <vector>

namespace harvol {

/// Trading days per year used for annualization.
inline constexpr double kTradingDaysPerYear = 252.0;

/// Fixed-cadence exchange-rate prices (quote per base currency).
struct PriceSeries {
    std::vector<Instant> timestamps;
    std::vector<double> prices;
    std::chrono::seconds interval{std::chrono::minutes{5}};

    /// Throws ValidationError on unordered timestamps or nonpositive prices,
    /// naming the offending timestamp.
    void validate() const;
};

/// Sum of squared percentage log returns between consecutive prices, before
/// annualization. Throws ValidationError on a nonpositive price.
[[nodiscard]] double sum_squared_returns(std::span<const double> prices);

/// Annualized realized variance of one window:
/// 252 * w * sum_{j>=2} [100 * (ln P_j - ln P_{j-1})]^2.
///
/// Returns nullopt for fewer than two prices. Only returns inside the window
/// enter the sum.
[[nodiscard]] std::optional<double> realized_variance(std::span<const double> prices, int windows_per_day);

struct RealizedVarianceSeries {
    WindowSeries values;  ///< trading-days scope, annualized
    double annualization_factor = 0.0;
    std::size_t partial_windows = 0;  ///< computed from fewer than the full sample count
    std::size_t missing_windows = 0;  ///< below coverage, or no data
};

/// Buckets prices into the grid's trading windows and computes realized
/// variance per window. A window is computed from its available consecutive
/// prices when at least `min_coverage` of the expected samples are present,
/// and marked missing otherwise.
[[nodiscard]] RealizedVarianceSeries realized_variance_series(const PriceSeries& prices, const GridPtr& grid,
                                                              double min_coverage = 0.8);

/// Elementwise natural log. Zero-variance windows become missing and add a warning.
[[nodiscard]] WindowSeries log_rv(const WindowSeries& rv, Warnings* warnings = nullptr);

/// sqrt(exp(ln_rv)): annualized volatility in percent from a log realized variance.
[[nodiscard]] double annualized_volatility(double ln_rv);

}  // namespace harvol
