/*
 * Multistart calibration of the LPPL / power-law model on a window.
 *
 * The linear amplitudes are profiled out by least squares, so the search
 * runs over the nonlinear parameters only. For LPPL the oscillation is
 * written as C1 cos(omega ln(tc-t)) + C2 sin(omega ln(tc-t)), which makes
 * phi and C linear as well and leaves a three-dimensional search over
 * (m, tc, omega). (C, phi) are recovered from (C1, C2) afterwards and the
 * final amplitudes are re-solved through solve_linear_params.
 *
 * Starts come from a scrambled Halton design over the bounded box; the best
 * candidates seed bounded Nelder-Mead descents. Everything is a pure
 * function of (series, window, config), so results do not depend on the
 * order or thread in which windows are processed.
 */
#pragma once

#include "rebound/lppl.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace rebound {

enum class ModelKind { lppl, power_law };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct SearchConfig {
    ModelKind model = ModelKind::lppl;
    double m_min = 0.01;
    double m_max = 0.99;
    double omega_min = 2.0;
    double omega_max = 25.0;
    /// tc is searched in (t_last, t2 + tc_horizon * (t2 - t1)].
    double tc_horizon = 0.5;
    int n_candidates = 256;  ///< quasi-random design points scored before descent
    int n_starts = 6;        ///< local descents launched from the best candidates
    int max_evals = 1500;    ///< objective budget per descent
    double xtol = 1e-10;     ///< simplex diameter in the unit box
    double ftol = 1e-15;     ///< relative spread of simplex values
    std::uint64_t seed = 20090603;
    std::size_t min_points = 30;

    void validate() const;
};

/**
 * Best fit of the configured model to the log prices inside `window`.
 *
 * Throws DataError when fewer than `min_points` observations fall in the
 * window and NumericalError when every descent ended degenerate.
 */
FitResult fit_window(const PriceSeries& series, const Window& window, const SearchConfig& config);

/// Same, on explicit arrays (times as day numbers). Used by the scan and tests.
FitResult fit_points(std::span<const double> times, std::span<const double> log_prices,
                     const Window& window, const SearchConfig& config);

/// Per-window seed mixed from the root seed and the window bounds.
std::uint64_t window_seed(std::uint64_t root_seed, const Window& window);

struct ScanReport {
    std::vector<FitResult> fits;   ///< in window order, skipped windows omitted
    std::size_t skipped_windows = 0;  ///< too few points or all descents degenerate
};

/**
 * Fits every window, in parallel over `workers` threads (0 = hardware
 * concurrency). The output is independent of the worker count.
 */
ScanReport scan_windows(const PriceSeries& series, std::span<const Window> windows,
                        const SearchConfig& config, unsigned workers = 1);

void write_fits_csv(std::ostream& out, std::span<const FitResult> fits);
std::vector<FitResult> read_fits_csv(std::istream& in);
void save_fits_csv(const std::filesystem::path& path, std::span<const FitResult> fits);
std::vector<FitResult> load_fits_csv(const std::filesystem::path& path);

/// One JSON object per line with the same fields as the CSV.
void write_fits_jsonl(std::ostream& out, std::span<const FitResult> fits);

} // namespace rebound
