#include "harvol/windowing.hpp"

#include "harvol/errors.hpp"

#include <algorithm>
#include <string>

namespace harvol {

std::string_view to_string(CalendarScope scope) {
    return scope == CalendarScope::trading_days ? "trading-days" : "all-days";
}

WindowGrid::WindowGrid(Date start, Date end, int window_hours)
    : start_(start), end_(end), window_hours_(window_hours) {
    if (window_hours != 2 && window_hours != 3 && window_hours != 4 && window_hours != 6) {
        throw ValidationError("windowing", "window length must be 2, 3, 4 or 6 hours, got " +
                                               std::to_string(window_hours));
    }
    if (end < start) {
        throw ValidationError("windowing",
                              "reversed date range " + format_date(start) + " > " + format_date(end));
    }
    const int per_day = 24 / window_hours;
    const auto days = static_cast<std::size_t>((end - start).count() + 1);
    windows_.reserve(days * static_cast<std::size_t>(per_day));
    for (Date d = start; d <= end; d += std::chrono::days{1}) {
        const bool trading = is_weekday(d);
        for (int j = 1; j <= per_day; ++j) {
            Window w;
            w.index = windows_.size();
            w.date = d;
            w.slot = j;
            w.start = Instant{d} + std::chrono::hours{(j - 1) * window_hours};
            w.end = w.start + std::chrono::hours{window_hours};
            if (trading) {
                w.trading_index = trading_.size();
                trading_.push_back(w.index);
            }
            windows_.push_back(w);
        }
    }
}

std::size_t WindowGrid::size(CalendarScope scope) const noexcept {
    return scope == CalendarScope::all_days ? windows_.size() : trading_.size();
}

const Window& WindowGrid::window(std::size_t index, CalendarScope scope) const {
    if (scope == CalendarScope::all_days) {
        return windows_.at(index);
    }
    return windows_[trading_.at(index)];
}

std::size_t WindowGrid::to_all_days(std::size_t trading_index) const { return trading_.at(trading_index); }

std::optional<std::size_t> WindowGrid::locate(Instant ts) const {
    if (windows_.empty() || ts < windows_.front().start || ts >= windows_.back().end) {
        return std::nullopt;
    }
    const auto offset = std::chrono::duration_cast<std::chrono::hours>(ts - windows_.front().start);
    return static_cast<std::size_t>(offset.count() / window_hours_);
}

std::optional<std::size_t> WindowGrid::lag_window(std::size_t t, CalendarScope scope) const {
    if (t >= trading_.size()) {
        throw ValidationError("windowing", "trading window " + std::to_string(t) + " out of range");
    }
    if (scope == CalendarScope::trading_days) {
        if (t == 0) return std::nullopt;
        return t - 1;
    }
    const std::size_t all = trading_[t];
    if (all == 0) return std::nullopt;
    return all - 1;
}

GridPtr build_grid(Date start, Date end, int window_hours) {
    return std::make_shared<const WindowGrid>(start, end, window_hours);
}

WindowSeries::WindowSeries(GridPtr grid, CalendarScope scope)
    : grid_(std::move(grid)), scope_(scope), values_(grid_ ? grid_->size(scope) : 0) {}

WindowSeries::WindowSeries(GridPtr grid, CalendarScope scope, std::vector<std::optional<double>> values)
    : grid_(std::move(grid)), scope_(scope), values_(std::move(values)) {
    if (!grid_) {
        throw ValidationError("windowing", "window series requires a grid");
    }
    if (values_.size() != grid_->size(scope_)) {
        throw ValidationError("windowing", "series length " + std::to_string(values_.size()) +
                                               " does not match " + std::string(to_string(scope_)) +
                                               " window count " + std::to_string(grid_->size(scope_)));
    }
}

std::size_t WindowSeries::present_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

std::vector<double> WindowSeries::present_values() const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (const auto& v : values_) {
        if (v) out.push_back(*v);
    }
    return out;
}

void require_same_grid(const WindowSeries& a, const WindowSeries& b, std::string_view what) {
    if (!a.grid() || !b.grid() || !(*a.grid() == *b.grid())) {
        throw ValidationError("windowing", std::string(what) + ": series are on different grids");
    }
}

}  // namespace harvol
