/*
 * Rebounds, peaks and crashes on a daily price series.
 *
 * A rebound is a day whose price is the minimum over the `radius` trading
 * days on each side; peaks use the maximum. Days within `radius` of either
 * end of the series are never eligible, and ties are all reported.
 */
#pragma once

#include "rebound/timeseries.hpp"

#include <iosfwd>
#include <vector>

namespace rebound {

enum class EventKind { rebound, peak, crash };

const char* to_string(EventKind kind);

struct DetectionRule {
    int radius = 200;      ///< trading days (rebounds / peaks)
    double drop = 0.15;    ///< fractional fall (crashes)
    int horizon = 21;      ///< calendar days (crashes)
};

struct EventSet {
    EventKind kind = EventKind::rebound;
    std::vector<TradingDay> days;  ///< sorted, unique
    DetectionRule rule;
};

EventSet detect_rebounds(const PriceSeries& series, int radius = 200);
EventSet detect_peaks(const PriceSeries& series, int radius = 200);

/**
 * Local maxima followed by a fall of more than `drop` within `horizon`
 * calendar days.
 *
 * A day qualifies when its price is at least every price in the preceding
 * `horizon` days and in the following `horizon` days, and the minimum over
 * (d, d + horizon] is below (1 - drop) P_d. Qualifying days closer than
 * `horizon` days to each other describe the same crash; only the highest
 * (latest on ties) is reported.
 */
EventSet detect_crashes(const PriceSeries& series, double drop = 0.15, int horizon = 21);

/// Literal predicates, usable to re-check reported days.
bool is_rebound(const PriceSeries& series, std::size_t index, int radius);
bool is_peak(const PriceSeries& series, std::size_t index, int radius);
bool is_crash_day(const PriceSeries& series, std::size_t index, double drop, int horizon);

void write_events_csv(std::ostream& out, const EventSet& events);

} // namespace rebound
