#pragma once

#include "harvol/windowing.hpp"

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace harvol {

using Hour = std::chrono::sys_time<std::chrono::hours>;

/// Most observations a search-volume vendor returns in one request.
inline constexpr std::size_t kMaxBatchObservations = 270;

/// One downloaded batch of hourly search-volume indices for a single term,
/// after zeros are lifted to 1. Hours are consecutive from `start`.
struct RawBatch {
    std::string term;
    Hour start{};
    std::vector<int> values;

    [[nodiscard]] Hour end() const { return start + std::chrono::hours{static_cast<long>(values.size())}; }
};

/// A long hourly series built by chaining batches. Values are real and carry
/// the scale of the latest batch.
struct ChainedSeries {
    std::string term;
    Hour start{};
    std::vector<double> values;

    [[nodiscard]] Hour end() const { return start + std::chrono::hours{static_cast<long>(values.size())}; }

    static ChainedSeries from_batch(const RawBatch& batch);
};

/// Replaces zeros with 1. Throws ValidationError for values outside 0..100 or
/// batches longer than kMaxBatchObservations.
[[nodiscard]] RawBatch clamp_batch(std::string term, Hour start, std::span<const int> raw);

/// Maximum over the overlap of later/earlier. Throws ValidationError if the
/// spans do not overlap.
[[nodiscard]] double rescaling_constant(const ChainedSeries& earlier, const ChainedSeries& later);

/// Rescales the whole earlier series by the maximum overlap ratio, keeps the
/// later values on the overlap, and appends the later tail.
[[nodiscard]] ChainedSeries chain_pair(const ChainedSeries& earlier, const ChainedSeries& later);
[[nodiscard]] ChainedSeries chain_pair(const ChainedSeries& earlier, const RawBatch& later);

struct ChainConfig {
    int batch_days = 4;
    int overlap_days = 1;
};

/// Left fold of chain_pair over batches sorted by start. Every consecutive
/// pair must overlap by exactly `overlap_days`.
[[nodiscard]] ChainedSeries chain_all(std::span<const RawBatch> batches, const ChainConfig& config = {});

/// Arithmetic mean of the hourly values inside each all-days window; missing
/// where no hour is covered.
[[nodiscard]] WindowSeries window_average(const ChainedSeries& series, const GridPtr& grid);

enum class Category { general_market, ruble, russian_economy };

[[nodiscard]] std::string_view to_string(Category category);
[[nodiscard]] Category parse_category(std::string_view text);
[[nodiscard]] const std::vector<std::string>& default_terms(Category category);

struct CategoryIndex {
    Category category = Category::general_market;
    std::vector<std::string> terms;
    WindowSeries values;  ///< all-days scope
};

/// Per-window mean across member terms. A window is missing if any member is.
[[nodiscard]] CategoryIndex aggregate_category(Category category,
                                               std::span<const std::pair<std::string, WindowSeries>> members);

[[nodiscard]] WindowSeries log_attention(const WindowSeries& index);

/// ln of the trailing mean over the current and previous `window - 1`
/// observations; missing until `window` values are available.
[[nodiscard]] WindowSeries ma_log_attention(const WindowSeries& index, std::size_t window = 6);

}  // namespace harvol
