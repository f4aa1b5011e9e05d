#pragma once

#include "harvol/errors.hpp"
#include "harvol/windowing.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace harvol {

/// Which regressors enter the log-log volatility regression.
///
/// Every spec carries the constant, lagged log RV, its interactions with the
/// window-of-day dummies (slots 1..w-1; the last slot is the baseline) and
/// with one dummy per onset day. The flags add the optional blocks.
struct ModelSpec {
    std::string name;
    bool include_attention = false;  ///< ln G, ln R, ln E at t-1 (all-days lag)
    bool include_div = false;        ///< first difference of ln IV at t-1
    bool include_iv_level = false;   ///< ln IV at t-1
    bool include_v5bar = false;      ///< ln of the mean RV over the previous five windows
    /// When positive, attention enters as ln of its trailing moving average of
    /// this many windows instead of the plain log.
    std::size_t attention_ma_window = 0;
    std::vector<Date> onset_days = default_onset_days();

    /// Models 1..7 of the standard set:
    /// 1 base, 2 +attention, 3 +dlnIV, 4 +attention+dlnIV, 5 +lnIV,
    /// 6 +lnIV+attention, 7 +lnIV+attention+dlnIV.
    static ModelSpec preset(int model_number);
    static std::vector<Date> default_onset_days();

    /// True if every optional block of `*this` is also in `other` and both use
    /// the same onset days and attention transform.
    [[nodiscard]] bool nested_in(const ModelSpec& other) const;
};

/// Window-level inputs on one grid. ln_rv, ln_iv, dln_iv use the trading
/// calendar; the attention logs use the all-days calendar. Series a spec does
/// not use may be left empty.
struct ModelInputs {
    GridPtr grid;
    WindowSeries ln_rv;
    WindowSeries ln_iv;
    WindowSeries dln_iv;
    WindowSeries ln_g;
    WindowSeries ln_r;
    WindowSeries ln_e;
};

/// Regressor block a column belongs to, matching the report panel layout.
enum class Panel { autoregressive, implied_volatility, attention, seasonality, onset };

struct DesignMatrix {
    std::vector<std::string> labels;
    std::vector<Panel> panels;
    Eigen::MatrixXd regressors;  ///< rows x columns, constant first
    Eigen::VectorXd response;    ///< ln V_t
    std::vector<std::size_t> rows;     ///< trading index of each row
    std::vector<std::size_t> dropped;  ///< trading indices dropped for a missing value
    Warnings warnings;

    [[nodiscard]] std::size_t row_count() const noexcept { return rows.size(); }
    [[nodiscard]] std::size_t column_count() const noexcept { return labels.size(); }
};

/// Materializes the regression for `spec`.
///
/// Rows whose response or any regressor is missing are dropped and recorded.
/// If `restrict_rows` is given, only those trading indices are considered.
/// Throws ValidationError when a regressor is missing in every row or an
/// onset day has no window in the sample.
[[nodiscard]] DesignMatrix build_design(const ModelInputs& inputs, const ModelSpec& spec,
                                        const std::vector<std::size_t>* restrict_rows = nullptr);

inline constexpr double kConditionWarningThreshold = 1e8;

struct OlsFit {
    std::vector<std::string> labels;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    double condition_estimate = 0.0;
    Warnings warnings;
};

/// Least squares by column-pivoted Householder QR.
///
/// Throws NumericalError on rank deficiency, naming the collinear columns, or
/// when there are not more rows than columns.
[[nodiscard]] OlsFit ols_fit(const DesignMatrix& design);

/// Coefficients only; returns nullopt for a rank-deficient design.
[[nodiscard]] std::optional<Eigen::VectorXd> ols_coefficients(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct NestingViolation {
    std::string smaller;
    std::string larger;
    double r2_smaller = 0.0;
    double r2_larger = 0.0;
};

struct NestingReport {
    std::vector<std::string> names;
    std::vector<double> r_squared;
    std::size_t common_rows = 0;
    std::vector<std::size_t> own_rows;  ///< rows each spec would use on its own
    std::vector<NestingViolation> violations;

    [[nodiscard]] bool monotone() const noexcept { return violations.empty(); }
};

/// Fits every spec on the common row set (the rows usable by the union of all
/// specs) and checks that R^2 does not decrease from a spec to any spec it is
/// nested in.
[[nodiscard]] NestingReport nested_r2_check(const ModelInputs& inputs, const std::vector<ModelSpec>& specs);

/// Rows usable by every spec in `specs` (the union spec's rows).
[[nodiscard]] std::vector<std::size_t> common_rows(const ModelInputs& inputs, const std::vector<ModelSpec>& specs);

}  // namespace harvol
