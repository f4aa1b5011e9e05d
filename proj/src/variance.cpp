#include "harvol/variance.hpp"

#include <cmath>
#include <string>

namespace harvol {

void PriceSeries::validate() const {
    if (timestamps.size() != prices.size()) {
        throw ValidationError("variance", "timestamp and price counts differ");
    }
    if (interval.count() <= 0) {
        throw ValidationError("variance", "sampling interval must be positive");
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw ValidationError("variance", "nonpositive price " + std::to_string(prices[i]) + " at " +
                                                  format_timestamp(timestamps[i]));
        }
        if (i > 0 && timestamps[i] <= timestamps[i - 1]) {
            throw ValidationError("variance", "timestamps not strictly increasing at " +
                                                  format_timestamp(timestamps[i]));
        }
    }
}

double sum_squared_returns(std::span<const double> prices) {
    double sum = 0.0;
    for (std::size_t j = 0; j < prices.size(); ++j) {
        if (!(prices[j] > 0.0)) {
            throw ValidationError("variance", "nonpositive price at sample " + std::to_string(j));
        }
        if (j > 0) {
            const double r = 100.0 * std::log1p((prices[j] - prices[j - 1]) / prices[j - 1]);
            sum += r * r;
        }
    }
    return sum;
}

std::optional<double> realized_variance(std::span<const double> prices, int windows_per_day) {
    if (prices.size() < 2) {
        return std::nullopt;
    }
    return kTradingDaysPerYear * windows_per_day * sum_squared_returns(prices);
}

RealizedVarianceSeries realized_variance_series(const PriceSeries& prices, const GridPtr& grid,
                                                double min_coverage) {
    prices.validate();
    const std::size_t n_trading = grid->size(CalendarScope::trading_days);
    const auto window_len = std::chrono::seconds{std::chrono::hours{grid->window_hours()}};
    const auto expected = static_cast<double>(window_len.count() / prices.interval.count());

    std::vector<std::vector<double>> buckets(n_trading);
    for (std::size_t i = 0; i < prices.prices.size(); ++i) {
        const auto all = grid->locate(prices.timestamps[i]);
        if (!all) continue;
        const auto& w = grid->window(*all, CalendarScope::all_days);
        if (!w.trading_index) continue;
        buckets[*w.trading_index].push_back(prices.prices[i]);
    }

    RealizedVarianceSeries out;
    out.annualization_factor = kTradingDaysPerYear * grid->windows_per_day();
    out.values = WindowSeries(grid, CalendarScope::trading_days);
    for (std::size_t t = 0; t < n_trading; ++t) {
        const auto& bucket = buckets[t];
        const double coverage = static_cast<double>(bucket.size()) / expected;
        if (bucket.size() < 2 || coverage < min_coverage) {
            ++out.missing_windows;
            continue;
        }
        if (static_cast<double>(bucket.size()) < expected) ++out.partial_windows;
        out.values[t] = realized_variance(bucket, grid->windows_per_day());
    }
    return out;
}

WindowSeries log_rv(const WindowSeries& rv, Warnings* warnings) {
    WindowSeries out(rv.grid(), rv.scope());
    for (std::size_t i = 0; i < rv.size(); ++i) {
        const auto& v = rv[i];
        if (!v) continue;
        if (*v < 0.0 || !std::isfinite(*v)) {
            throw ValidationError("variance", "negative or non-finite realized variance at window " +
                                                  std::to_string(i));
        }
        if (*v == 0.0) {
            if (warnings) {
                const auto& w = rv.window(i);
                warnings->push_back("zero realized variance in window " + format_timestamp(w.start) +
                                    "; log undefined, marked missing");
            }
            continue;
        }
        out[i] = std::log(*v);
    }
    return out;
}

double annualized_volatility(double ln_rv) { return std::sqrt(std::exp(ln_rv)); }

}  // namespace harvol
