#include "rebound/evaluation.hpp"

#include "rebound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace rebound {

std::vector<bool> alarm_mask(std::span<const AlarmPoint> ri, double threshold, int duration) {
    if (duration < 0) throw ConfigError("alarm duration must be non-negative");
    std::vector<bool> mask(ri.size(), false);
    // Remaining alarm days carried forward from the latest crossing.
    long remaining = -1;
    for (std::size_t i = 0; i < ri.size(); ++i) {
        if (ri[i].ri > threshold) remaining = duration;
        else --remaining;
        mask[i] = remaining >= 0;
    }
    return mask;
}

std::vector<TradingDay> build_alarm_set(std::span<const AlarmPoint> ri, double threshold, int duration) {
    const auto mask = alarm_mask(ri, threshold, duration);
    std::vector<TradingDay> out;
    for (std::size_t i = 0; i < ri.size(); ++i)
        if (mask[i]) out.push_back(ri[i].day);
    return out;
}

std::vector<double> auto_thresholds(std::span<const AlarmPoint> ri) {
    std::vector<double> t;
    t.reserve(ri.size() + 2);
    t.push_back(-std::numeric_limits<double>::infinity());
    for (const auto& a : ri) t.push_back(a.ri);
    t.push_back(std::numeric_limits<double>::infinity());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

std::vector<ErrorDiagramPoint> error_diagram(std::span<const AlarmPoint> ri, const EventSet& rebounds,
                                             std::span<const double> thresholds, int duration) {
    if (ri.empty()) throw DataError("empty alarm series");
    // Positions of the rebounds inside the alarm span, matched by date.
    std::vector<std::size_t> targets;
    for (const auto& r : rebounds.days) {
        const auto it = std::lower_bound(ri.begin(), ri.end(), r.date,
                                         [](const AlarmPoint& a, Date d) { return a.day.date < d; });
        if (it != ri.end() && it->day.date == r.date) targets.push_back(static_cast<std::size_t>(it - ri.begin()));
    }
    if (targets.empty()) throw DataError("no rebounds inside the alarm span: failure to predict is undefined");

    std::vector<double> sorted(thresholds.begin(), thresholds.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<ErrorDiagramPoint> out;
    out.reserve(sorted.size());
    for (double th : sorted) {
        const auto mask = alarm_mask(ri, th, duration);
        const auto alarmed = static_cast<double>(std::count(mask.begin(), mask.end(), true));
        const auto missed = static_cast<double>(
            std::count_if(targets.begin(), targets.end(), [&](std::size_t i) { return !mask[i]; }));
        out.push_back({th, alarmed / static_cast<double>(ri.size()), missed / static_cast<double>(targets.size())});
    }
    return out;
}

std::vector<ErrorDiagramPoint> error_diagram(std::span<const AlarmPoint> ri, const EventSet& rebounds, int duration) {
    const auto th = auto_thresholds(ri);
    return error_diagram(ri, rebounds, th, duration);
}

double skill_summary(std::span<const ErrorDiagramPoint> points) {
    if (points.size() < 2) throw DataError("skill summary needs at least two error-diagram points");
    std::vector<ErrorDiagramPoint> p(points.begin(), points.end());
    std::stable_sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
        if (a.alarm_fraction != b.alarm_fraction) return a.alarm_fraction < b.alarm_fraction;
        return a.miss_fraction > b.miss_fraction;
    });
    double area = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        const double x0 = p[i - 1].alarm_fraction, x1 = p[i].alarm_fraction;
        const double g0 = (1.0 - x0) - p[i - 1].miss_fraction;
        const double g1 = (1.0 - x1) - p[i].miss_fraction;
        area += 0.5 * (g0 + g1) * (x1 - x0);
    }
    return area;
}

double miss_at_alarm_fraction(std::span<const ErrorDiagramPoint> points, double max_alarm_fraction) {
    double best = 1.0;
    for (const auto& p : points)
        if (p.alarm_fraction <= max_alarm_fraction) best = std::min(best, p.miss_fraction);
    return best;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_error_diagram_csv(std::ostream& out, std::span<const ErrorDiagramPoint> points) {
    out << "threshold,alarm_fraction,miss_fraction\n";
    for (const auto& p : points)
        out << fmt(p.threshold) << ',' << fmt(p.alarm_fraction) << ',' << fmt(p.miss_fraction) << '\n';
}

void write_error_diagram_plot(std::ostream& out, std::span<const ErrorDiagramPoint> points) {
    std::vector<ErrorDiagramPoint> p(points.begin(), points.end());
    std::stable_sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
        if (a.alarm_fraction != b.alarm_fraction) return a.alarm_fraction < b.alarm_fraction;
        return a.miss_fraction > b.miss_fraction;
    });
    out << "# error diagram: alarm_fraction miss_fraction\n";
    for (const auto& q : p) out << fmt(q.alarm_fraction) << ' ' << fmt(q.miss_fraction) << '\n';
    out << "\n\n# random baseline y = 1 - x\n0 1\n1 0\n";
}

} // namespace rebound
