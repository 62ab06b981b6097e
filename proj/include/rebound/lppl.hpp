/*
 * Power-law and log-periodic power-law (LPPL) log-price models.
 *
 *   power law : log p(t) = A + B (tc - t)^m
 *   LPPL      : log p(t) = A + B (tc - t)^m + C (tc - t)^m cos(omega ln(tc - t) - phi)
 *
 * Times are continuous day numbers (see rebound::day_number), so (tc - t)
 * is measured in calendar days. B < 0 describes a positive (upward) bubble,
 * B > 0 its mirror image, a negative bubble ending in a rebound.
 */
#pragma once

#include "rebound/timeseries.hpp"
#include "rebound/windows.hpp"

#include <span>
#include <utility>
#include <vector>

namespace rebound {

struct PowerLawParams {
    double A = 0.0;
    double B = 0.0;
    double m = 0.5;
    double tc = 0.0;
};

struct LpplParams {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double m = 0.5;
    double tc = 0.0;
    double omega = 6.0;
    double phi = 0.0;

    PowerLawParams power_law() const { return {A, B, m, tc}; }

    friend bool operator==(const LpplParams&, const LpplParams&) = default;
};

/// Throws DataError if t >= tc.
double eval_power_law(const PowerLawParams& p, double t);
double eval_lppl(const LpplParams& p, double t);

inline double eval_power_law(const PowerLawParams& p, Date t) { return eval_power_law(p, day_number(t)); }
inline double eval_lppl(const LpplParams& p, Date t) { return eval_lppl(p, day_number(t)); }

/// Wraps an angle into [0, 2 pi).
double wrap_phase(double phi);

/// The four parameters that enter the LPPL model nonlinearly.
struct NonlinearParams {
    double m = 0.5;
    double tc = 0.0;
    double omega = 6.0;
    double phi = 0.0;
};

struct LinearSolution {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double sse = 0.0;
    bool degenerate = false;
};

/**
 * Least-squares (A, B, C) for fixed (m, tc, omega, phi).
 *
 * `times` and `log_prices` must have equal length of at least 6 and every
 * time must precede tc; otherwise DataError. A rank-deficient design is
 * reported through `degenerate` (the returned coefficients are then the
 * minimum-norm pivoted solution).
 */
LinearSolution solve_linear_params(const NonlinearParams& nonlinear, std::span<const double> times,
                                   std::span<const double> log_prices);

/// Same reduction for the pure power law (C fixed at zero).
LinearSolution solve_power_law_linear(double m, double tc, std::span<const double> times,
                                      std::span<const double> log_prices);

enum class BubbleSign { positive_bubble, negative_bubble, indeterminate };

const char* to_string(BubbleSign sign);

struct FitResult {
    Window window;
    LpplParams params;  ///< C == 0 for a pure power-law fit
    double rmse = 0.0;
    std::size_t n_points = 0;
    bool converged = false;
    int n_restarts_used = 0;
    /// A nonlinear parameter ended within 1% of its search bound.
    bool at_bound = false;

    friend bool operator==(const FitResult&, const FitResult&) = default;
};

/// B < -eps: positive bubble; B > eps: negative bubble; otherwise indeterminate.
BubbleSign classify_bubble_sign(const FitResult& fit, double eps = 0.0);

/// Linear-interpolation (type 7) quantile of an unsorted sample. 0 <= q <= 1.
double quantile(std::vector<double> values, double q);

struct TcBand {
    double lower_level = 0.0;
    double upper_level = 0.0;
    double lower = 0.0;  ///< day number
    double upper = 0.0;  ///< day number
};

/**
 * Empirical quantile bands of tc across converged fits, one band per
 * (lower, upper) level pair. Throws DataError when no fit converged.
 */
std::vector<TcBand> aggregate_tc_quantiles(std::span<const FitResult> fits,
                                           std::span<const std::pair<double, double>> levels);

} // namespace rebound
