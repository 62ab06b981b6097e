/*
 * Error diagrams for alarm series.
 *
 * For a threshold T, the alarm set holds every day with RI > T plus the
 * `duration` trading days that follow it. Each threshold yields one point
 * (alarm days / total days, missed rebounds / total rebounds). Random
 * predictions sit on y = 1 - x; skill shows as area below that line.
 */
#pragma once

#include "rebound/extrema.hpp"
#include "rebound/pattern.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace rebound {

struct ErrorDiagramPoint {
    double threshold = 0.0;
    double alarm_fraction = 0.0;
    double miss_fraction = 0.0;
};

/// Alarm mask aligned with `ri`.
std::vector<bool> alarm_mask(std::span<const AlarmPoint> ri, double threshold, int duration = 40);

std::vector<TradingDay> build_alarm_set(std::span<const AlarmPoint> ri, double threshold,
                                        int duration = 40);

/// Every distinct RI value plus -inf and +inf, ascending.
std::vector<double> auto_thresholds(std::span<const AlarmPoint> ri);

/**
 * One point per threshold, sorted by threshold. Rebounds outside the span
 * of `ri` are ignored; throws DataError when none fall inside.
 */
std::vector<ErrorDiagramPoint> error_diagram(std::span<const AlarmPoint> ri, const EventSet& rebounds,
                                             std::span<const double> thresholds, int duration = 40);

std::vector<ErrorDiagramPoint> error_diagram(std::span<const AlarmPoint> ri, const EventSet& rebounds,
                                             int duration = 40);

/// Trapezoidal area of (1 - x) - y along the curve ordered by alarm fraction.
double skill_summary(std::span<const ErrorDiagramPoint> points);

/// Smallest miss fraction among points with alarm fraction <= max_alarm_fraction.
double miss_at_alarm_fraction(std::span<const ErrorDiagramPoint> points, double max_alarm_fraction);

void write_error_diagram_csv(std::ostream& out, std::span<const ErrorDiagramPoint> points);

/// Two-column (x, y) blocks: the curve, then the anti-diagonal reference.
void write_error_diagram_plot(std::ostream& out, std::span<const ErrorDiagramPoint> points);

} // namespace rebound
