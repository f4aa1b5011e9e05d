#pragma once

#include "harvol/windowing.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace harvol {

/// Quoted at-the-money implied volatilities (annualized, percent) for one maturity.
struct IVQuoteSeries {
    std::string maturity = "1m";
    std::vector<Instant> timestamps;
    std::vector<double> quotes;

    void validate() const;
};

/// Maturity labels accepted on ingestion. Only "1m" enters the models.
[[nodiscard]] const std::vector<std::string>& known_maturities();

/// Mean of squared quotes over the window; nullopt for an empty window.
[[nodiscard]] std::optional<double> window_iv(std::span<const double> quotes);

/// Window-level implied variance on the trading calendar.
///
/// A window with no quote of its own inherits the square of the last quote
/// seen earlier on the same UTC day; across days it stays missing.
[[nodiscard]] WindowSeries implied_variance_series(const IVQuoteSeries& quotes, const GridPtr& grid);

[[nodiscard]] WindowSeries log_iv(const WindowSeries& iv);

/// ln IV_t - ln IV_{t-1} with the trading-calendar lag. Missing where either
/// side is missing, and for the first window.
[[nodiscard]] WindowSeries diff_log_iv(const WindowSeries& log_iv);

}  // namespace harvol
