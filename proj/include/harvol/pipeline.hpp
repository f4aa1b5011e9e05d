#pragma once

#include "harvol/attention.hpp"
#include "harvol/diagnostics.hpp"
#include "harvol/inference.hpp"
#include "harvol/ingest.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace harvol {

inline constexpr std::string_view kVersion = "0.1.0";

/// Where one currency pair's window-level inputs come from. Exactly one of
/// raw files (prices + iv), a dataset JSON, or a synthetic configuration.
struct PairSource {
    std::string name;
    std::filesystem::path prices;
    std::filesystem::path iv;
    std::string maturity = "1m";
    std::filesystem::path dataset;
    std::optional<SynthConfig> synthetic;
};

struct PipelineConfig {
    Date start = make_date(2021, 12, 1);
    Date end = make_date(2022, 3, 7);
    int window_hours = WindowGrid::kDefaultWindowHours;
    std::uint64_t seed = kDefaultSeed;

    std::vector<PairSource> pairs;
    std::filesystem::path attention_manifest;  ///< shared by file-based pairs
    ChainConfig chain;

    std::vector<ModelSpec> models;
    bool common_rows = true;  ///< fit every model on the rows usable by all of them

    double min_coverage = 0.8;
    int sampling_minutes = 5;

    InferenceConfig inference;
    std::filesystem::path output_dir = "harvol-out";

    /// Parses a JSON config; relative paths resolve against `base_dir`.
    static PipelineConfig from_json(const std::string& text, const std::filesystem::path& base_dir = {});
    static PipelineConfig from_file(const std::filesystem::path& path);

    /// Throws ValidationError for missing files, duplicate pair names, or specs
    /// needing attention series that no source provides.
    void validate() const;
};

/// Window-level inputs for every pair, built from the configured sources.
struct PreparedPair {
    std::string name;
    Dataset data;
    std::optional<RealizedVarianceSeries> rv;  ///< set when built from prices
    Warnings warnings;
};

[[nodiscard]] std::vector<PreparedPair> prepare_inputs(const PipelineConfig& config);

struct FitFailure {
    std::string pair;
    std::string model;
    std::string message;
    bool numerical = false;
};

struct PipelineResult {
    std::vector<std::filesystem::path> files;  ///< written, relative to output_dir, in order
    std::vector<FitFailure> failures;

    /// 0 when every fit succeeded, 2 if any failed numerically, otherwise 1.
    [[nodiscard]] int exit_code() const noexcept;
};

/// Builds inputs, fits every spec for every pair, and writes the report
/// bundle. Pair x spec fits run concurrently; files are written afterwards in
/// a fixed order, so the bundle depends only on the config.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Descriptive rows for the series of one pair; series with too few values
/// are skipped with a warning.
[[nodiscard]] std::vector<DescriptiveRow> describe_inputs(const ModelInputs& inputs, const std::string& prefix,
                                                          Warnings* warnings = nullptr);

/// Maps an error to the process exit code: 1 validation, 2 numerical.
[[nodiscard]] int exit_code_for(const std::exception& error) noexcept;

}  // namespace harvol
