#include "harvol/model.hpp"

#include "harvol/attention.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace harvol {

ModelSpec ModelSpec::preset(int model_number) {
    ModelSpec spec;
    spec.name = "Model " + std::to_string(model_number);
    switch (model_number) {
        case 1: break;
        case 2: spec.include_attention = true; break;
        case 3: spec.include_div = true; break;
        case 4: spec.include_attention = spec.include_div = true; break;
        case 5: spec.include_iv_level = true; break;
        case 6: spec.include_iv_level = spec.include_attention = true; break;
        case 7: spec.include_iv_level = spec.include_attention = spec.include_div = true; break;
        default:
            throw ValidationError("model", "model number must be 1..7, got " + std::to_string(model_number));
    }
    return spec;
}

std::vector<Date> ModelSpec::default_onset_days() {
    return {make_date(2022, 2, 21), make_date(2022, 2, 22), make_date(2022, 2, 23),
            make_date(2022, 2, 24), make_date(2022, 2, 25), make_date(2022, 2, 28)};
}

bool ModelSpec::nested_in(const ModelSpec& other) const {
    const auto implies = [](bool a, bool b) { return !a || b; };
    return implies(include_attention, other.include_attention) && implies(include_div, other.include_div) &&
           implies(include_iv_level, other.include_iv_level) && implies(include_v5bar, other.include_v5bar) &&
           onset_days == other.onset_days &&
           (!include_attention || attention_ma_window == other.attention_ma_window);
}

namespace {

struct Column {
    std::string label;
    Panel panel;
    std::function<std::optional<double>(std::size_t)> value;  // by trading index of the response
};

void require_series(const WindowSeries& s, const GridPtr& grid, CalendarScope scope, const char* name) {
    if (!s.grid() || !(*s.grid() == *grid) || s.scope() != scope) {
        throw ValidationError("model", std::string(name) + " series is missing or not on the model grid (" +
                                           std::string(to_string(scope)) + " scope)");
    }
}

WindowSeries exp_series(const WindowSeries& log_series) {
    WindowSeries out(log_series.grid(), log_series.scope());
    for (std::size_t i = 0; i < log_series.size(); ++i) {
        if (log_series[i]) out[i] = std::exp(*log_series[i]);
    }
    return out;
}

}  // namespace

DesignMatrix build_design(const ModelInputs& in, const ModelSpec& spec, const std::vector<std::size_t>* restrict_rows) {
    if (!in.grid) throw ValidationError("model", "inputs have no grid");
    const GridPtr& grid = in.grid;
    const WindowGrid& g = *grid;
    require_series(in.ln_rv, grid, CalendarScope::trading_days, "ln RV");

    const auto trading_lag = [&g](std::size_t t) { return g.lag_window(t, CalendarScope::trading_days); };
    const auto all_lag = [&g](std::size_t t) { return g.lag_window(t, CalendarScope::all_days); };
    const auto lagged = [](const WindowSeries& s, std::optional<std::size_t> idx) -> std::optional<double> {
        if (!idx) return std::nullopt;
        return s[*idx];
    };
    const WindowSeries& rv = in.ln_rv;
    const int w = g.windows_per_day();

    std::vector<Column> cols;
    cols.push_back({"const", Panel::autoregressive, [](std::size_t) { return std::optional<double>{1.0}; }});
    cols.push_back({"lnRV(t-1)", Panel::autoregressive,
                    [&, trading_lag](std::size_t t) { return lagged(rv, trading_lag(t)); }});

    std::vector<double> v_levels;
    if (spec.include_v5bar) {
        v_levels.reserve(rv.size());
        cols.push_back({"lnRV5(t-1)", Panel::autoregressive, [&](std::size_t t) -> std::optional<double> {
                            double sum = 0.0;
                            std::optional<std::size_t> idx = t;
                            for (int k = 0; k < 5; ++k) {
                                idx = trading_lag(*idx);
                                if (!idx || !rv[*idx]) return std::nullopt;
                                sum += std::exp(*rv[*idx]);
                            }
                            return std::log(sum / 5.0);
                        }});
    }

    if (spec.include_div) {
        require_series(in.dln_iv, grid, CalendarScope::trading_days, "dln IV");
        cols.push_back({"dlnIV(t-1)", Panel::implied_volatility,
                        [&](std::size_t t) { return lagged(in.dln_iv, trading_lag(t)); }});
    }
    if (spec.include_iv_level) {
        require_series(in.ln_iv, grid, CalendarScope::trading_days, "ln IV");
        cols.push_back({"lnIV(t-1)", Panel::implied_volatility,
                        [&](std::size_t t) { return lagged(in.ln_iv, trading_lag(t)); }});
    }

    // Holds moving-average transforms so the column lambdas can reference them.
    std::vector<WindowSeries> attention(3);
    if (spec.include_attention) {
        const WindowSeries* sources[3] = {&in.ln_g, &in.ln_r, &in.ln_e};
        const char* names[3] = {"lnG(t-1)", "lnR(t-1)", "lnE(t-1)"};
        for (int a = 0; a < 3; ++a) {
            require_series(*sources[a], grid, CalendarScope::all_days, names[a]);
            attention[a] = spec.attention_ma_window > 0
                               ? ma_log_attention(exp_series(*sources[a]), spec.attention_ma_window)
                               : *sources[a];
        }
        for (int a = 0; a < 3; ++a) {
            std::string label = names[a];
            if (spec.attention_ma_window > 0) {
                label = label.substr(0, 2) + "MA" + std::to_string(spec.attention_ma_window) + label.substr(2);
            }
            cols.push_back({label, Panel::attention,
                            [&, a](std::size_t t) { return lagged(attention[a], all_lag(t)); }});
        }
    }

    for (int j = 1; j < w; ++j) {
        cols.push_back({"lnRV(t-1)*I(j=" + std::to_string(j) + ")", Panel::seasonality,
                        [&, j](std::size_t t) -> std::optional<double> {
                            const auto v = lagged(rv, trading_lag(t));
                            if (!v) return std::nullopt;
                            return g.window(t, CalendarScope::trading_days).slot == j ? *v : 0.0;
                        }});
    }
    for (const Date& day : spec.onset_days) {
        cols.push_back({"lnRV(t-1)*I(q=" + format_date(day) + ")", Panel::onset,
                        [&, day](std::size_t t) -> std::optional<double> {
                            const auto v = lagged(rv, trading_lag(t));
                            if (!v) return std::nullopt;
                            return g.window(t, CalendarScope::trading_days).date == day ? *v : 0.0;
                        }});
    }

    std::vector<std::size_t> candidates;
    if (restrict_rows) {
        candidates = *restrict_rows;
    } else {
        candidates.resize(rv.size());
        for (std::size_t t = 0; t < rv.size(); ++t) candidates[t] = t;
    }

    const std::size_t k = cols.size();
    std::vector<std::size_t> present_per_col(k, 0);
    std::vector<double> buffer;
    buffer.reserve(candidates.size() * k);
    DesignMatrix dm;
    std::vector<double> y;
    std::vector<double> row(k);
    for (std::size_t t : candidates) {
        if (t >= rv.size()) throw ValidationError("model", "restricted row index out of range");
        bool complete = rv[t].has_value();
        for (std::size_t c = 0; c < k; ++c) {
            const auto v = cols[c].value(t);
            if (v) {
                ++present_per_col[c];
                row[c] = *v;
            } else {
                complete = false;
            }
        }
        if (!complete) {
            dm.dropped.push_back(t);
            continue;
        }
        buffer.insert(buffer.end(), row.begin(), row.end());
        y.push_back(*rv[t]);
        dm.rows.push_back(t);
    }

    for (std::size_t c = 0; c < k; ++c) {
        if (present_per_col[c] == 0) {
            throw ValidationError("model", "regressor " + cols[c].label + " is missing in every row");
        }
    }
    for (const Date& day : spec.onset_days) {
        const bool any = std::any_of(dm.rows.begin(), dm.rows.end(), [&](std::size_t t) {
            return g.window(t, CalendarScope::trading_days).date == day;
        });
        if (!any) {
            throw ValidationError("model", "onset day " + format_date(day) + " has no usable window in the sample");
        }
    }

    const std::size_t n = dm.rows.size();
    dm.regressors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    dm.response.resize(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        dm.response(static_cast<Eigen::Index>(r)) = y[r];
        for (std::size_t c = 0; c < k; ++c) {
            dm.regressors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buffer[r * k + c];
        }
    }
    for (const auto& c : cols) {
        dm.labels.push_back(c.label);
        dm.panels.push_back(c.panel);
    }
    if (!dm.dropped.empty()) {
        dm.warnings.push_back(std::to_string(dm.dropped.size()) + " row(s) dropped for missing values");
    }
    return dm;
}

std::optional<Eigen::VectorXd> ols_coefficients(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols()) return std::nullopt;
    return Eigen::VectorXd(qr.solve(y));
}

OlsFit ols_fit(const DesignMatrix& design) {
    const auto n = design.regressors.rows();
    const auto k = design.regressors.cols();
    if (n <= k) {
        throw NumericalError("model", "need more rows than columns (" + std::to_string(n) + " rows, " +
                                          std::to_string(k) + " columns)");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.regressors);
    if (qr.rank() < k) {
        std::string names;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < k; ++i) {
            if (!names.empty()) names += ", ";
            names += design.labels[static_cast<std::size_t>(perm(i))];
        }
        throw NumericalError("model", "rank-deficient design (rank " + std::to_string(qr.rank()) + " of " +
                                          std::to_string(k) + "); collinear columns: " + names);
    }

    OlsFit fit;
    fit.labels = design.labels;
    fit.coefficients = qr.solve(design.response);
    fit.residuals = design.response - design.regressors * fit.coefficients;

    const auto& r = qr.matrixR();
    const double r_max = std::abs(r(0, 0));
    const double r_min = std::abs(r(k - 1, k - 1));
    fit.condition_estimate = r_min > 0.0 ? r_max / r_min : std::numeric_limits<double>::infinity();
    if (fit.condition_estimate > kConditionWarningThreshold) {
        fit.warnings.push_back("design is ill-conditioned (condition estimate " +
                               std::to_string(fit.condition_estimate) + ")");
    }

    const double ssr = fit.residuals.squaredNorm();
    const double sst = (design.response.array() - design.response.mean()).square().sum();
    fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
    fit.adjusted_r_squared =
        1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / static_cast<double>(n - k);
    return fit;
}

std::vector<std::size_t> common_rows(const ModelInputs& inputs, const std::vector<ModelSpec>& specs) {
    if (specs.empty()) return {};
    ModelSpec all = specs.front();
    for (const auto& s : specs) {
        all.include_attention = all.include_attention || s.include_attention;
        all.include_div = all.include_div || s.include_div;
        all.include_iv_level = all.include_iv_level || s.include_iv_level;
        all.include_v5bar = all.include_v5bar || s.include_v5bar;
        if (s.include_attention) all.attention_ma_window = s.attention_ma_window;
    }
    return build_design(inputs, all).rows;
}

NestingReport nested_r2_check(const ModelInputs& inputs, const std::vector<ModelSpec>& specs) {
    NestingReport report;
    const auto rows = common_rows(inputs, specs);
    report.common_rows = rows.size();
    for (const auto& spec : specs) {
        report.names.push_back(spec.name);
        report.own_rows.push_back(build_design(inputs, spec).row_count());
        report.r_squared.push_back(ols_fit(build_design(inputs, spec, &rows)).r_squared);
    }
    for (std::size_t a = 0; a < specs.size(); ++a) {
        for (std::size_t b = 0; b < specs.size(); ++b) {
            if (a == b || !specs[a].nested_in(specs[b])) continue;
            if (report.r_squared[b] < report.r_squared[a]) {
                report.violations.push_back({specs[a].name, specs[b].name, report.r_squared[a], report.r_squared[b]});
            }
        }
    }
    return report;
}

}  // namespace harvol
