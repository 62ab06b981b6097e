/*
 * Synthetic price series with known ground truth.
 */
#pragma once

#include "rebound/lppl.hpp"
#include "rebound/timeseries.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rebound {

/// Closed-form solution of dx/dt = k x^m (m > 1): x0 (1 - t/tc)^(1/(1-m)).
struct SingularityParams {
    double x0 = 1.0;
    double m = 2.0;
    double tc = 1.0;

    /// tc = x0^(1-m) / (k (m - 1)).
    static SingularityParams from_rate(double x0, double k, double m);
};

/// Throws ConfigError for m <= 1 or x0 <= 0, DataError if any t >= tc or t < 0.
std::vector<double> singularity_trajectory(const SingularityParams& params, std::span<const double> t_grid);

enum class SynthModel { singularity_ode, power_law, lppl };

const char* to_string(SynthModel model);
SynthModel parse_synth_model(std::string_view text);

struct SynthSpec {
    SynthModel model = SynthModel::lppl;
    LpplParams lppl;               ///< power_law uses C = 0
    SingularityParams singularity; ///< time origin at `start`, in days
    Date start = std::chrono::year{2000} / 1 / 3;
    Date end = std::chrono::year{2002} / 12 / 31;
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthSeries {
    PriceSeries series;
    SynthSpec truth;
};

/// Weekday dates in [start, end].
std::vector<Date> weekdays(Date start, Date end);

/**
 * Prices exp(model(t) + N(0, sigma^2)) on every weekday of the span. For
 * the singularity model the trajectory itself is the price level before
 * the log-noise is applied.
 */
SynthSeries synth_lppl_series(const SynthSpec& spec);

struct ReboundCourse {
    PriceSeries series;
    std::vector<TradingDay> troughs;
};

struct CourseConfig {
    int n_bubbles = 6;
    int spacing = 450;       ///< trading days between troughs
    double noise_sigma = 0.005;
    std::uint64_t seed = 7;
    int radius = 200;
    Date start = std::chrono::year{1990} / 1 / 1;
};

/**
 * Chain of negative bubbles, each an LPPL decline (B > 0) into a trough at
 * its critical time followed by a power-law recovery. Trough k sits at
 * trading day k * spacing + spacing / 2. Throws ConfigError unless
 * spacing > 2 * radius and every count is positive.
 */
ReboundCourse plant_rebound_course(const CourseConfig& config);

void write_truth_json(std::ostream& out, const SynthSpec& spec);

} // namespace rebound
