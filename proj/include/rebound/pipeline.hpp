/*
 * Run configuration and the end-to-end rebound pipeline.
 *
 * Configuration files are flat `key = value` text; `#` starts a comment.
 * Every key has a default. The defaults are set up for a long S&P 500 run:
 * 50/50/110/1500 day grid, radius 200, split 1975-01-01, 40-day alarms.
 */
#pragma once

#include "rebound/evaluation.hpp"
#include "rebound/fit.hpp"
#include "rebound/pattern.hpp"
#include "rebound/windows.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace rebound {

struct RunConfig {
    GridConfig grid;
    SearchConfig search;

    double delta = 20.0;
    int bins = 3;
    std::vector<std::pair<double, double>> alpha_beta{{0.5, 0.3}, {0.4, 0.3}, {0.6, 0.2}};
    Date split = std::chrono::year{1975} / 1 / 1;
    int radius = 200;
    bool negative_bubbles_only = true;
    bool exclude_boundary_fits = true;
    bool causal = true;

    int duration = 40;

    std::filesystem::path input;
    std::string date_column = "Date";
    std::string price_column = "Adj Close";
    std::filesystem::path output_dir = "rebound_run";
    unsigned workers = 1;

    void validate() const;

    /// Canonical `key = value` listing; order and formatting are fixed.
    std::string to_text() const;

    /// Applies `key = value` overrides; unknown keys throw ConfigError.
    void apply(const std::map<std::string, std::string>& values);

    /// FNV-1a 64 of to_text() minus the io keys, as 16 hex digits.
    std::string hash() const;
};

std::map<std::string, std::string> parse_config_text(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

TrainConfig train_config(const RunConfig& config, double alpha, double beta);

struct DiagramSummary {
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t n_features_I = 0;
    std::size_t n_features_II = 0;
    double in_sample_skill = 0.0;
    double out_of_sample_skill = 0.0;
    std::vector<ErrorDiagramPoint> in_sample;
    std::vector<ErrorDiagramPoint> out_of_sample;
};

struct PipelineResult {
    std::size_t n_windows = 0;
    std::size_t n_fits = 0;
    std::size_t skipped_windows = 0;
    std::size_t n_learning_fits = 0;
    std::size_t n_rebounds_in_sample = 0;
    std::size_t n_rebounds_out_of_sample = 0;
    std::vector<DiagramSummary> diagrams;  ///< one per (alpha, beta)
};

/// Runs on an in-memory series and writes the artifact directory.
PipelineResult run_pipeline(const RunConfig& config, const PriceSeries& series);

/// Loads `config.input` and runs.
PipelineResult run_pipeline(const RunConfig& config);

/// Pipeline stage that failed, prepended to the propagated message.
template <class Error>
[[noreturn]] void rethrow_in_stage(const char* stage, const Error& e) {
    throw Error(std::string(stage) + ": " + e.what());
}

} // namespace rebound
