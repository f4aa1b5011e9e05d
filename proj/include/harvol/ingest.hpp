#pragma once

#include "harvol/attention.hpp"
#include "harvol/diagnostics.hpp"
#include "harvol/implied.hpp"
#include "harvol/variance.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace harvol {

/// `timestamp_utc,price` with a header row.
[[nodiscard]] PriceSeries ingest_prices(const std::filesystem::path& path,
                                        std::chrono::seconds interval = std::chrono::minutes{5});

/// `timestamp_utc,maturity,quote` with a header row; returns the rows of one
/// maturity. Every row is validated, including other maturities.
[[nodiscard]] IVQuoteSeries ingest_iv(const std::filesystem::path& path, const std::string& maturity = "1m");

/// One batch file: `term,timestamp_utc,value`, consecutive hours, one term.
[[nodiscard]] RawBatch ingest_batch(const std::filesystem::path& path);

struct TermBatches {
    std::string term;
    std::vector<RawBatch> batches;
};

struct CategoryBatches {
    Category category = Category::general_market;
    std::vector<TermBatches> terms;
};

/// Reads a manifest `{category: {term: [batch files in chronological order]}}`.
/// Relative paths resolve against the manifest's directory. Throws
/// ValidationError naming the pair of files when batches are out of order.
[[nodiscard]] std::vector<CategoryBatches> ingest_batches(const std::filesystem::path& manifest);

/// Window-level inputs in the JSON layout written by `write_dataset`.
struct Dataset {
    ModelInputs inputs;
    std::map<std::string, double> truth;  ///< empty unless simulated
};

[[nodiscard]] Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const ModelInputs& inputs,
                   const std::map<std::string, double>& truth = {});
[[nodiscard]] std::string dataset_json(const ModelInputs& inputs, const std::map<std::string, double>& truth = {});

/// Reads one numeric column from a CSV with a header row; empty cells are skipped.
[[nodiscard]] std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column);

}  // namespace harvol
