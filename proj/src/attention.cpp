#include "harvol/attention.hpp"

#include "harvol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace harvol {
namespace {

std::string describe_span(std::string_view term, Hour start, Hour end) {
    return "'" + std::string(term) + "' [" + format_timestamp(Instant{start}) + ", " +
           format_timestamp(Instant{end}) + ")";
}

}  // namespace

ChainedSeries ChainedSeries::from_batch(const RawBatch& batch) {
    return ChainedSeries{batch.term, batch.start, std::vector<double>(batch.values.begin(), batch.values.end())};
}

RawBatch clamp_batch(std::string term, Hour start, std::span<const int> raw) {
    if (raw.size() > kMaxBatchObservations) {
        throw ValidationError("attention", "batch for '" + term + "' has " + std::to_string(raw.size()) +
                                               " observations, more than " +
                                               std::to_string(kMaxBatchObservations));
    }
    RawBatch batch{std::move(term), start, {}};
    batch.values.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] < 0 || raw[i] > 100) {
            throw ValidationError("attention", "search volume " + std::to_string(raw[i]) + " outside 0..100 for '" +
                                                   batch.term + "' at " +
                                                   format_timestamp(Instant{start + std::chrono::hours{i}}));
        }
        batch.values.push_back(std::max(raw[i], 1));
    }
    return batch;
}

double rescaling_constant(const ChainedSeries& earlier, const ChainedSeries& later) {
    const Hour lo = std::max(earlier.start, later.start);
    const Hour hi = std::min(earlier.end(), later.end());
    if (hi <= lo || later.start < earlier.start) {
        throw ValidationError("attention", "cannot chain: no overlap between " +
                                               describe_span(earlier.term, earlier.start, earlier.end()) +
                                               " and " + describe_span(later.term, later.start, later.end()));
    }
    double constant = -std::numeric_limits<double>::infinity();
    for (Hour h = lo; h < hi; h += std::chrono::hours{1}) {
        const double e = earlier.values[static_cast<std::size_t>((h - earlier.start).count())];
        const double l = later.values[static_cast<std::size_t>((h - later.start).count())];
        if (!(e > 0.0)) {
            throw ValidationError("attention", "nonpositive value in " +
                                                   describe_span(earlier.term, earlier.start, earlier.end()));
        }
        constant = std::max(constant, l / e);
    }
    return constant;
}

ChainedSeries chain_pair(const ChainedSeries& earlier, const ChainedSeries& later) {
    const double k = rescaling_constant(earlier, later);
    ChainedSeries out{later.term, earlier.start, {}};
    const auto keep = static_cast<std::size_t>((later.start - earlier.start).count());
    out.values.reserve(keep + later.values.size());
    for (std::size_t i = 0; i < keep; ++i) out.values.push_back(earlier.values[i] * k);
    out.values.insert(out.values.end(), later.values.begin(), later.values.end());
    // A later batch that ends before the earlier one leaves an earlier tail.
    if (later.end() < earlier.end()) {
        const auto from = static_cast<std::size_t>((later.end() - earlier.start).count());
        for (std::size_t i = from; i < earlier.values.size(); ++i) out.values.push_back(earlier.values[i] * k);
    }
    return out;
}

ChainedSeries chain_pair(const ChainedSeries& earlier, const RawBatch& later) {
    return chain_pair(earlier, ChainedSeries::from_batch(later));
}

ChainedSeries chain_all(std::span<const RawBatch> batches, const ChainConfig& config) {
    if (batches.empty()) {
        throw ValidationError("attention", "no batches to chain");
    }
    if (config.batch_days <= config.overlap_days || config.overlap_days < 0) {
        throw ValidationError("attention", "overlap must be shorter than the batch span");
    }
    const std::chrono::hours overlap{24 * config.overlap_days};
    const std::chrono::hours span{24 * config.batch_days};
    ChainedSeries acc = ChainedSeries::from_batch(batches.front());
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const auto& b = batches[i];
        if (b.values.size() > static_cast<std::size_t>(span.count())) {
            throw ValidationError("attention", "batch " + describe_span(b.term, b.start, b.end()) + " exceeds " +
                                                   std::to_string(config.batch_days) + " days");
        }
        if (i == 0) continue;
        const auto& prev = batches[i - 1];
        if (b.term != prev.term) {
            throw ValidationError("attention", "batches for different terms in one chain: '" + prev.term +
                                                   "' and '" + b.term + "'");
        }
        if (b.start <= prev.start || prev.end() - b.start != overlap) {
            throw ValidationError("attention", "batches " + describe_span(prev.term, prev.start, prev.end()) +
                                                   " and " + describe_span(b.term, b.start, b.end()) +
                                                   " are misaligned: expected an overlap of " +
                                                   std::to_string(config.overlap_days) + " day(s)");
        }
        acc = chain_pair(acc, b);
    }
    return acc;
}

WindowSeries window_average(const ChainedSeries& series, const GridPtr& grid) {
    WindowSeries out(grid, CalendarScope::all_days);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Window& w = grid->window(i, CalendarScope::all_days);
        double sum = 0.0;
        int count = 0;
        for (Hour h = std::chrono::floor<std::chrono::hours>(w.start); Instant{h} < w.end; h += std::chrono::hours{1}) {
            if (h < series.start || h >= series.end()) continue;
            sum += series.values[static_cast<std::size_t>((h - series.start).count())];
            ++count;
        }
        if (count > 0) out[i] = sum / count;
    }
    return out;
}

std::string_view to_string(Category category) {
    switch (category) {
        case Category::general_market: return "general_market";
        case Category::ruble: return "ruble";
        case Category::russian_economy: return "russian_economy";
    }
    return "unknown";
}

Category parse_category(std::string_view text) {
    if (text == "general_market") return Category::general_market;
    if (text == "ruble") return Category::ruble;
    if (text == "russian_economy") return Category::russian_economy;
    throw ValidationError("attention", "unknown attention category '" + std::string(text) + "'");
}

const std::vector<std::string>& default_terms(Category category) {
    static const std::vector<std::string> general{"S&P 500", "VIX", "stock market", "FX market",
                                                  "dow jones", "nasdaq", "nyse"};
    static const std::vector<std::string> ruble{"ruble", "usd rub", "eur rub", "btc rub",
                                                "Russian central bank", "Russian interest rate"};
    static const std::vector<std::string> economy{
        "economic sanctions", "Vnesheconombank", "Promsvyazbank", "VTB Bank", "Sberbank",
        "Alfa Bank", "Rossiya Bank", "SWIFT Russia", "asset freeze", "Nord Stream 2",
        "export controls", "Moscow stock exchange", "currency control", "fx reserves", "Maersk Russia",
        "British Petroleum Russia", "Ikea Russia", "Apple Russia", "Disney Russia", "Equinor Russia",
        "Exxon Russia", "Shell Russia", "Mastercard Russia", "Boeing Russia", "Airbus Russia",
        "American Express Russia", "Dell Russia", "Ford Russia", "Google Russia", "Airbnb Russia",
        "Meta Russia", "HM Russia", "McDonalds Russia", "Nike Russia", "Visa Russia"};
    switch (category) {
        case Category::general_market: return general;
        case Category::ruble: return ruble;
        case Category::russian_economy: return economy;
    }
    return general;
}

CategoryIndex aggregate_category(Category category,
                                 std::span<const std::pair<std::string, WindowSeries>> members) {
    if (members.empty()) {
        throw ValidationError("attention", "category '" + std::string(to_string(category)) + "' has no terms");
    }
    const WindowSeries& first = members.front().second;
    CategoryIndex out{category, {}, WindowSeries(first.grid(), first.scope())};
    for (const auto& [term, series] : members) {
        require_same_grid(first, series, "aggregate_category");
        if (series.scope() != first.scope()) {
            throw ValidationError("attention", "term '" + term + "' is on a different calendar scope");
        }
        out.terms.push_back(term);
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        double sum = 0.0;
        bool complete = true;
        for (const auto& member : members) {
            const auto& v = member.second[i];
            if (!v) {
                complete = false;
                break;
            }
            sum += *v;
        }
        if (complete) out.values[i] = sum * inv;
    }
    return out;
}

WindowSeries log_attention(const WindowSeries& index) {
    WindowSeries out(index.grid(), index.scope());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (!index[i]) continue;
        if (!(*index[i] > 0.0)) {
            throw ValidationError("attention", "nonpositive attention index at window " + std::to_string(i));
        }
        out[i] = std::log(*index[i]);
    }
    return out;
}

WindowSeries ma_log_attention(const WindowSeries& index, std::size_t window) {
    if (window == 0) {
        throw ValidationError("attention", "moving-average window must be positive");
    }
    WindowSeries out(index.grid(), index.scope());
    for (std::size_t i = window - 1; i < index.size(); ++i) {
        double sum = 0.0;
        bool complete = true;
        for (std::size_t k = 0; k < window; ++k) {
            const auto& v = index[i - k];
            if (!v) {
                complete = false;
                break;
            }
            sum += *v;
        }
        if (!complete) continue;
        const double mean = sum / static_cast<double>(window);
        if (!(mean > 0.0)) {
            throw ValidationError("attention", "nonpositive attention index near window " + std::to_string(i));
        }
        out[i] = std::log(mean);
    }
    return out;
}

}  // namespace harvol
