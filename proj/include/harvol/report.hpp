#pragma once

#include "harvol/diagnostics.hpp"
#include "harvol/inference.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace harvol {

[[nodiscard]] std::string_view to_string(Panel panel);

[[nodiscard]] nlohmann::ordered_json model_spec_json(const ModelSpec& spec);

/// Machine-readable form of one fit, including residuals and the rows used.
[[nodiscard]] std::string fit_report_json(const FitReport& report);

/// Aligned-text coefficient table, one column per model. Panels A-E hold the
/// regressor blocks, panel F the residual test p-value, R^2 and adjusted R^2.
/// Cells are the estimate followed by c/b/a stars with the bootstrap p-value
/// on the next line.
[[nodiscard]] std::string coefficient_table(const std::vector<FitReport>& models, const std::string& title);

/// Long-format CSV: model,panel,regressor,estimate,std_error,p_value,stars.
[[nodiscard]] std::string coefficient_csv(const std::vector<FitReport>& models);

[[nodiscard]] std::string descriptive_table(const std::vector<DescriptiveRow>& rows, const std::string& title);
[[nodiscard]] std::string descriptive_csv(const std::vector<DescriptiveRow>& rows);

struct RecoveryRow {
    std::string label;
    double truth = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    bool within = false;  ///< |estimate - truth| <= tolerance_se * std_error
};

/// Compares a fit against known coefficients; labels without a truth are skipped.
[[nodiscard]] std::vector<RecoveryRow> recovery(const FitReport& report, const std::map<std::string, double>& truth,
                                                double tolerance_se = 3.0);
[[nodiscard]] std::string recovery_csv(const std::vector<RecoveryRow>& rows);

}  // namespace harvol
