#include "harvol/implied.hpp"

#include "harvol/errors.hpp"

#include <algorithm>
#include <cmath>

namespace harvol {

const std::vector<std::string>& known_maturities() {
    static const std::vector<std::string> labels{"1d", "1w", "2w", "3w", "1m", "3m"};
    return labels;
}

void IVQuoteSeries::validate() const {
    const auto& known = known_maturities();
    if (std::find(known.begin(), known.end(), maturity) == known.end()) {
        throw ValidationError("implied", "unknown maturity '" + maturity + "'");
    }
    if (timestamps.size() != quotes.size()) {
        throw ValidationError("implied", "timestamp and quote counts differ");
    }
    for (std::size_t i = 0; i < quotes.size(); ++i) {
        if (!(quotes[i] > 0.0) || !std::isfinite(quotes[i])) {
            throw ValidationError("implied", "nonpositive quote at " + format_timestamp(timestamps[i]));
        }
        if (i > 0 && timestamps[i] <= timestamps[i - 1]) {
            throw ValidationError("implied", "timestamps not strictly increasing at " +
                                                 format_timestamp(timestamps[i]));
        }
    }
}

std::optional<double> window_iv(std::span<const double> quotes) {
    if (quotes.empty()) return std::nullopt;
    double sum = 0.0;
    for (double q : quotes) sum += q * q;
    return sum / static_cast<double>(quotes.size());
}

WindowSeries implied_variance_series(const IVQuoteSeries& quotes, const GridPtr& grid) {
    quotes.validate();
    const std::size_t n = grid->size(CalendarScope::trading_days);
    std::vector<std::vector<double>> buckets(n);
    // Last quote strictly before each window, for the same-day stale rule.
    std::vector<std::optional<std::pair<Date, double>>> carried(n);

    std::size_t q = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const Window& w = grid->window(t, CalendarScope::trading_days);
        while (q < quotes.quotes.size() && quotes.timestamps[q] < w.start) {
            const Date day = std::chrono::floor<std::chrono::days>(quotes.timestamps[q]);
            carried[t] = std::make_pair(day, quotes.quotes[q]);
            ++q;
        }
        if (!carried[t] && t > 0) carried[t] = carried[t - 1];
        while (q < quotes.quotes.size() && quotes.timestamps[q] < w.end) {
            buckets[t].push_back(quotes.quotes[q]);
            ++q;
        }
        if (t + 1 < n && !buckets[t].empty()) {
            carried[t + 1] = std::make_pair(w.date, buckets[t].back());
        }
    }

    WindowSeries out(grid, CalendarScope::trading_days);
    for (std::size_t t = 0; t < n; ++t) {
        if (!buckets[t].empty()) {
            out[t] = window_iv(buckets[t]);
            continue;
        }
        const Window& w = grid->window(t, CalendarScope::trading_days);
        if (carried[t] && carried[t]->first == w.date) {
            out[t] = carried[t]->second * carried[t]->second;
        }
    }
    return out;
}

WindowSeries log_iv(const WindowSeries& iv) {
    WindowSeries out(iv.grid(), iv.scope());
    for (std::size_t i = 0; i < iv.size(); ++i) {
        if (!iv[i]) continue;
        if (!(*iv[i] > 0.0)) {
            throw ValidationError("implied", "nonpositive implied variance at window " + std::to_string(i));
        }
        out[i] = std::log(*iv[i]);
    }
    return out;
}

WindowSeries diff_log_iv(const WindowSeries& log_iv) {
    if (log_iv.scope() != CalendarScope::trading_days) {
        throw ValidationError("implied", "implied volatility series must be on the trading calendar");
    }
    WindowSeries out(log_iv.grid(), log_iv.scope());
    const auto& grid = *log_iv.grid();
    for (std::size_t t = 0; t < log_iv.size(); ++t) {
        const auto lag = grid.lag_window(t, CalendarScope::trading_days);
        if (!lag || !log_iv[t] || !log_iv[*lag]) continue;
        out[t] = *log_iv[t] - *log_iv[*lag];
    }
    return out;
}

}  // namespace harvol
