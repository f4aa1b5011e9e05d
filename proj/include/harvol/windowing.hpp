#pragma once

#include "harvol/calendar.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace harvol {

/// Which calendar a series lives on. FX prices and implied volatilities exist
/// Monday to Friday only; search-volume attention exists every day.
enum class CalendarScope { trading_days, all_days };

[[nodiscard]] std::string_view to_string(CalendarScope scope);

/// One intraday window `[start, end)`. `slot` is the window-of-day label,
/// 1 for the window starting at 00:00 UTC.
struct Window {
    std::size_t index = 0;  ///< position in the all-days sequence
    std::optional<std::size_t> trading_index;  ///< position in the trading sequence, if a weekday
    Date date{};
    int slot = 1;
    Instant start{};
    Instant end{};
};

/// The ordered sequence of intraday windows between two inclusive dates.
///
/// Immutable once built. Windows are numbered twice: once over every calendar
/// day (attention series) and once over weekdays only (price and IV series).
class WindowGrid {
public:
    static constexpr int kDefaultWindowHours = 4;

    /// Throws ValidationError unless `window_hours` is one of 2, 3, 4, 6 and
    /// `start <= end`.
    WindowGrid(Date start, Date end, int window_hours = kDefaultWindowHours);

    [[nodiscard]] Date start_date() const noexcept { return start_; }
    [[nodiscard]] Date end_date() const noexcept { return end_; }
    [[nodiscard]] int window_hours() const noexcept { return window_hours_; }
    [[nodiscard]] int windows_per_day() const noexcept { return 24 / window_hours_; }

    [[nodiscard]] std::size_t size(CalendarScope scope) const noexcept;

    /// Window at position `index` of the given scope's numbering.
    [[nodiscard]] const Window& window(std::size_t index, CalendarScope scope) const;
    [[nodiscard]] std::span<const Window> all_windows() const noexcept { return windows_; }

    [[nodiscard]] std::size_t to_all_days(std::size_t trading_index) const;

    /// All-days index of the window containing `ts`, or nullopt outside the grid.
    [[nodiscard]] std::optional<std::size_t> locate(Instant ts) const;

    /// Index (in `scope` numbering) of the window preceding trading window `t`.
    ///
    /// On the trading calendar Monday's first window lags to Friday's last; on
    /// the all-days calendar it lags to Sunday's last window. Returns nullopt
    /// when the preceding window falls before the sample.
    [[nodiscard]] std::optional<std::size_t> lag_window(std::size_t t, CalendarScope scope) const;

    friend bool operator==(const WindowGrid& a, const WindowGrid& b) noexcept {
        return a.start_ == b.start_ && a.end_ == b.end_ && a.window_hours_ == b.window_hours_;
    }

private:
    Date start_;
    Date end_;
    int window_hours_;
    std::vector<Window> windows_;
    std::vector<std::size_t> trading_;  // trading index -> all-days index
};

using GridPtr = std::shared_ptr<const WindowGrid>;

[[nodiscard]] GridPtr build_grid(Date start, Date end, int window_hours = WindowGrid::kDefaultWindowHours);

[[nodiscard]] inline std::optional<std::size_t> lag_window(const WindowGrid& grid, std::size_t t,
                                                           CalendarScope scope) {
    return grid.lag_window(t, scope);
}

/// One optional value per window of a grid, on a given calendar scope.
/// Missing values are explicit and never imputed.
class WindowSeries {
public:
    WindowSeries() = default;
    WindowSeries(GridPtr grid, CalendarScope scope);
    WindowSeries(GridPtr grid, CalendarScope scope, std::vector<std::optional<double>> values);

    [[nodiscard]] const GridPtr& grid() const noexcept { return grid_; }
    [[nodiscard]] CalendarScope scope() const noexcept { return scope_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

    [[nodiscard]] const std::optional<double>& operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] std::optional<double>& operator[](std::size_t i) { return values_[i]; }
    [[nodiscard]] const std::vector<std::optional<double>>& values() const noexcept { return values_; }

    [[nodiscard]] std::size_t present_count() const noexcept;
    /// Present values in order, skipping missing slots.
    [[nodiscard]] std::vector<double> present_values() const;

    [[nodiscard]] const Window& window(std::size_t i) const { return grid_->window(i, scope_); }

private:
    GridPtr grid_;
    CalendarScope scope_ = CalendarScope::trading_days;
    std::vector<std::optional<double>> values_;
};

/// Throws ValidationError if the two series are not on equal grids.
void require_same_grid(const WindowSeries& a, const WindowSeries& b, std::string_view what);

}  // namespace harvol
