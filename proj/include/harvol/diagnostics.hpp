#pragma once

#include "harvol/model.hpp"
#include "harvol/windowing.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace harvol {

/// One line of a descriptive-statistics table. Kurtosis is non-excess
/// (3 for a Gaussian); skewness and kurtosis are plain moment ratios.
struct DescriptiveRow {
    std::string label;
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    Instant min_at{};
    double max = 0.0;
    Instant max_at{};
    std::optional<double> skewness;  ///< missing for a constant series
    std::optional<double> kurtosis;
    double rho1 = 0.0;
    double rho6 = 0.0;
    double rho30 = 0.0;
};

/// Sample autocorrelation at `lag` of a gap-free sequence.
[[nodiscard]] double autocorrelation(std::span<const double> x, std::size_t lag);

/// Moments, extremes with their window start, and autocorrelations at lags
/// 1, 6 and 30 over the present values in window order. Needs at least 31
/// present values.
[[nodiscard]] DescriptiveRow describe(const WindowSeries& series, std::string label);

/// Stationary log-AR(1): x_t = mean + persistence (x_{t-1} - mean) + sd e_t.
struct ArProcess {
    double mean = 0.0;
    double persistence = 0.0;
    double innovation_sd = 0.0;
};

/// Settings of the synthetic volatility data-generating process. Defaults
/// resemble the magnitudes of the USD/RUB sample.
struct SynthConfig {
    Date start = make_date(2021, 12, 1);
    Date end = make_date(2022, 3, 7);
    int window_hours = 4;
    /// Leading trading windows blanked out; the default grid has 414 trading
    /// windows, leaving 406 observed.
    std::size_t skip_leading_windows = 8;

    double intercept = -1.3;
    double persistence = 0.3;                                           ///< coefficient on ln V_{t-1}
    std::vector<double> seasonal{-0.16, -0.05, -0.08, -0.03, -0.20};    ///< slots 1..w-1
    std::vector<Date> onset_days = ModelSpec::default_onset_days();
    std::vector<double> onset{0.02, -0.02, -0.06, 0.07, 0.04, 0.11};
    std::array<double, 3> attention{0.13, 0.04, 0.03};                  ///< G, R, E
    double div = 0.61;
    double iv_level = 0.9;
    double v5bar = 0.0;
    double noise_sd = 0.9;

    ArProcess ln_iv{6.0, 0.98, 0.08};
    std::array<ArProcess, 3> ln_attention{{{3.16, 0.79, 0.37}, {1.28, 0.92, 0.46}, {1.96, 0.66, 0.59}}};

    std::uint64_t seed = 1;

    /// Throws NumericalError naming the first slot whose effective lag-1
    /// coefficient is not inside (-1, 1), ValidationError for inconsistent sizes.
    void validate() const;
};

struct SynthDataset {
    ModelInputs inputs;
    WindowSeries rv;  ///< realized variance in levels
    /// True coefficient per design label (labels as produced by build_design).
    std::map<std::string, double> truth;
};

/// Draws a dataset from the log-log volatility recursion. Exogenous series and
/// the response noise use separate named substreams of `seed`.
[[nodiscard]] SynthDataset simulate(const SynthConfig& config);

}  // namespace harvol
