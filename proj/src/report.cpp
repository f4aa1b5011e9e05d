#include "harvol/report.hpp"

#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>

namespace harvol {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<Panel, 5> kPanels{Panel::autoregressive, Panel::implied_volatility, Panel::attention,
                                       Panel::seasonality, Panel::onset};

std::string num(double v, int precision = 4) {
    if (!std::isfinite(v)) return "nan";
    std::string s = fmt::format("{:.{}f}", v, precision);
    if (s.find_first_not_of("-0.") == std::string::npos) s.erase(0, s[0] == '-' ? 1 : 0);
    return s;
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

nlohmann::ordered_json model_spec_json(const ModelSpec& spec) {
    nlohmann::ordered_json onset = nlohmann::ordered_json::array();
    for (Date d : spec.onset_days) onset.push_back(format_date(d));
    return {{"name", spec.name},
            {"include_attention", spec.include_attention},
            {"include_div", spec.include_div},
            {"include_iv_level", spec.include_iv_level},
            {"include_v5bar", spec.include_v5bar},
            {"attention_ma_window", spec.attention_ma_window},
            {"onset_days", onset}};
}

std::string_view to_string(Panel panel) {
    switch (panel) {
        case Panel::autoregressive: return "A. Autoregressive";
        case Panel::implied_volatility: return "B. Implied volatility";
        case Panel::attention: return "C. Attention";
        case Panel::seasonality: return "D. Intraday seasonality";
        case Panel::onset: return "E. Onset days";
    }
    return "?";
}

std::string fit_report_json(const FitReport& r) {
    ordered_json coef = ordered_json::array();
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        coef.push_back({{"regressor", r.labels[i]},
                        {"panel", to_string(r.panels[i])},
                        {"estimate", r.coefficients[i]},
                        {"std_error", r.std_errors[i]},
                        {"p_value", r.p_values[i]},
                        {"stars", significance_stars(r.p_values[i])}});
    }
    ordered_json doc;
    doc["spec"] = model_spec_json(r.spec);
    doc["coefficients"] = coef;
    doc["observations"] = r.rows.size();
    doc["dropped_rows"] = r.dropped_rows;
    doc["r_squared"] = r.r_squared;
    doc["adjusted_r_squared"] = r.adjusted_r_squared;
    doc["condition_estimate"] = r.condition_estimate;
    doc["serial_test"] = {{"statistic", r.serial.statistic},
                          {"chosen_lag", r.serial.chosen_lag},
                          {"p_value", r.serial.p_value},
                          {"max_lag", r.serial.max_lag}};
    doc["bootstrap"] = {{"seed", r.seed},
                        {"replications", r.replications},
                        {"block_length", r.block_length},
                        {"block_length_auto", r.block_length_auto},
                        {"redraws", r.redraws}};
    doc["warnings"] = r.warnings;
    doc["rows"] = r.rows;
    doc["residuals"] = r.residuals;
    return doc.dump(1) + "\n";
}

std::string coefficient_table(const std::vector<FitReport>& models, const std::string& title) {
    // Row labels in first-seen order per panel, across all models.
    std::array<std::vector<std::string>, kPanels.size()> rows;
    for (const auto& m : models) {
        for (std::size_t i = 0; i < m.labels.size(); ++i) {
            auto& list = rows[static_cast<std::size_t>(m.panels[i])];
            if (std::find(list.begin(), list.end(), m.labels[i]) == list.end()) list.push_back(m.labels[i]);
        }
    }
    std::size_t label_w = 24;
    for (const auto& list : rows) {
        for (const auto& l : list) label_w = std::max(label_w, l.size() + 2);
    }
    constexpr std::size_t cell_w = 12;

    std::string out = title + "\n";
    std::string header = pad_right("", label_w);
    for (const auto& m : models) header += pad_left(m.spec.name, cell_w);
    const std::string rule(header.size(), '-');
    out += rule + "\n" + header + "\n" + rule + "\n";

    for (std::size_t p = 0; p < kPanels.size(); ++p) {
        if (rows[p].empty()) continue;
        out += std::string(to_string(kPanels[p])) + "\n";
        for (const auto& label : rows[p]) {
            std::string est = pad_right("  " + label, label_w);
            std::string pv = pad_right("", label_w);
            for (const auto& m : models) {
                const auto it = std::find(m.labels.begin(), m.labels.end(), label);
                if (it == m.labels.end()) {
                    est += pad_left("", cell_w);
                    pv += pad_left("", cell_w);
                    continue;
                }
                const auto i = static_cast<std::size_t>(it - m.labels.begin());
                const std::string stars = significance_stars(m.p_values[i]);
                est += pad_left(num(m.coefficients[i]) + pad_right(stars, 1), cell_w);
                pv += pad_left("(" + num(m.p_values[i], 3) + ") ", cell_w);
            }
            out += est + "\n" + pv + "\n";
        }
    }
    out += "F. Diagnostics\n";
    std::string serial = pad_right("  Serial p-value", label_w);
    std::string r2 = pad_right("  R2", label_w);
    std::string adj = pad_right("  Adj. R2", label_w);
    std::string obs = pad_right("  Observations", label_w);
    for (const auto& m : models) {
        serial += pad_left(num(m.serial.p_value, 3) + " ", cell_w);
        r2 += pad_left(num(m.r_squared, 3) + " ", cell_w);
        adj += pad_left(num(m.adjusted_r_squared, 3) + " ", cell_w);
        obs += pad_left(std::to_string(m.rows.size()) + " ", cell_w);
    }
    out += serial + "\n" + r2 + "\n" + adj + "\n" + obs + "\n" + rule + "\n";
    out += "c, b, a: significant at 1%, 5%, 10% (stationary bootstrap p-values in parentheses)\n";
    return out;
}

std::string coefficient_csv(const std::vector<FitReport>& models) {
    std::string out = "model,panel,regressor,estimate,std_error,p_value,stars\n";
    for (const auto& m : models) {
        for (std::size_t i = 0; i < m.labels.size(); ++i) {
            out += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{}\n", csv_field(m.spec.name),
                               csv_field(std::string(to_string(m.panels[i]))), csv_field(m.labels[i]),
                               m.coefficients[i], m.std_errors[i], m.p_values[i], significance_stars(m.p_values[i]));
        }
    }
    return out;
}

std::string descriptive_table(const std::vector<DescriptiveRow>& rows, const std::string& title) {
    const std::vector<std::string> cols{"N",    "Mean", "SD",   "Min",  "Date", "Hour", "Max",
                                        "Date", "Hour", "Skew", "Kurt", "rho1", "rho6", "rho30"};
    std::size_t label_w = 10;
    for (const auto& r : rows) label_w = std::max(label_w, r.label.size() + 2);
    constexpr std::size_t cell_w = 10;
    constexpr std::size_t date_w = 12;
    const auto at = [&](Instant t) {
        return pad_left(format_date(std::chrono::floor<std::chrono::days>(t)), date_w) + pad_left(format_hour(t), cell_w);
    };
    std::string out = title + "\n";
    std::string header = pad_right("", label_w);
    for (const auto& c : cols) header += pad_left(c, c == "Date" ? date_w : cell_w);
    const std::string rule(header.size(), '-');
    out += rule + "\n" + header + "\n" + rule + "\n";
    for (const auto& r : rows) {
        std::string line = pad_right(r.label, label_w);
        line += pad_left(std::to_string(r.count), cell_w);
        for (double v : {r.mean, r.sd}) line += pad_left(num(v, 3), cell_w);
        line += pad_left(num(r.min, 3), cell_w) + at(r.min_at);
        line += pad_left(num(r.max, 3), cell_w) + at(r.max_at);
        line += pad_left(r.skewness ? num(*r.skewness, 3) : "-", cell_w);
        line += pad_left(r.kurtosis ? num(*r.kurtosis, 3) : "-", cell_w);
        for (double v : {r.rho1, r.rho6, r.rho30}) line += pad_left(num(v, 3), cell_w);
        out += line + "\n";
    }
    out += rule + "\n";
    return out;
}

std::string descriptive_csv(const std::vector<DescriptiveRow>& rows) {
    std::string out = "series,count,mean,sd,min,min_at,max,max_at,skewness,kurtosis,rho1,rho6,rho30\n";
    const auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); };
    for (const auto& r : rows) {
        out += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{},{:.17g},{},{},{},{:.17g},{:.17g},{:.17g}\n",
                           csv_field(r.label), r.count, r.mean, r.sd, r.min, format_timestamp(r.min_at), r.max,
                           format_timestamp(r.max_at), opt(r.skewness), opt(r.kurtosis), r.rho1, r.rho6, r.rho30);
    }
    return out;
}

std::vector<RecoveryRow> recovery(const FitReport& report, const std::map<std::string, double>& truth,
                                  double tolerance_se) {
    std::vector<RecoveryRow> out;
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        const auto it = truth.find(report.labels[i]);
        if (it == truth.end()) continue;
        RecoveryRow row;
        row.label = report.labels[i];
        row.truth = it->second;
        row.estimate = report.coefficients[i];
        row.std_error = report.std_errors[i];
        row.within = std::abs(row.estimate - row.truth) <= tolerance_se * row.std_error;
        out.push_back(std::move(row));
    }
    return out;
}

std::string recovery_csv(const std::vector<RecoveryRow>& rows) {
    std::string out = "regressor,truth,estimate,std_error,within_tolerance\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{}\n", csv_field(r.label), r.truth, r.estimate, r.std_error,
                           r.within ? "true" : "false");
    }
    return out;
}

}  // namespace harvol
