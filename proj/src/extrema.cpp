#include "rebound/extrema.hpp"

#include "rebound/errors.hpp"
#include "rebound/log.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

namespace rebound {

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::rebound: return "rebound";
    case EventKind::peak: return "peak";
    case EventKind::crash: return "crash";
    }
    return "?";
}

namespace {

// Days equal to the extreme of their centred (2r+1)-day window, by a
// monotone-deque sliding extreme. `better(a, b)` is true if a beats b.
template <class Better>
std::vector<TradingDay> centred_extrema(const PriceSeries& s, int radius, Better better) {
    std::vector<TradingDay> out;
    const auto& p = s.prices();
    const auto n = p.size();
    const auto r = static_cast<std::size_t>(radius);
    if (n < 2 * r + 1) return out;
    std::deque<std::size_t> dq;  // indices with monotone prices, front = window extreme
    // window of centre c is [c - r, c + r]
    for (std::size_t i = 0; i < n; ++i) {
        while (!dq.empty() && !better(p[dq.back()], p[i])) dq.pop_back();
        dq.push_back(i);
        if (i < 2 * r) continue;
        const std::size_t c = i - r;
        while (dq.front() < c - r) dq.pop_front();
        if (p[c] == p[dq.front()]) out.push_back(s.day(c));
    }
    return out;
}

void check_radius(int radius) {
    if (radius < 1) throw ConfigError("extremum radius must be at least 1");
}

} // namespace

EventSet detect_rebounds(const PriceSeries& series, int radius) {
    check_radius(radius);
    EventSet out{EventKind::rebound, {}, {}};
    out.rule.radius = radius;
    if (series.size() <= 2 * static_cast<std::size_t>(radius)) {
        warn("series of " + std::to_string(series.size()) + " days too short for rebound radius " +
             std::to_string(radius));
        return out;
    }
    out.days = centred_extrema(series, radius, [](double a, double b) { return a < b; });
    return out;
}

EventSet detect_peaks(const PriceSeries& series, int radius) {
    check_radius(radius);
    EventSet out{EventKind::peak, {}, {}};
    out.rule.radius = radius;
    if (series.size() <= 2 * static_cast<std::size_t>(radius)) {
        warn("series of " + std::to_string(series.size()) + " days too short for peak radius " +
             std::to_string(radius));
        return out;
    }
    out.days = centred_extrema(series, radius, [](double a, double b) { return a > b; });
    return out;
}

bool is_rebound(const PriceSeries& series, std::size_t index, int radius) {
    const auto r = static_cast<std::size_t>(radius);
    if (index < r || index + r >= series.size()) return false;
    for (std::size_t x = index - r; x <= index + r; ++x)
        if (series.price(x) < series.price(index)) return false;
    return true;
}

bool is_peak(const PriceSeries& series, std::size_t index, int radius) {
    const auto r = static_cast<std::size_t>(radius);
    if (index < r || index + r >= series.size()) return false;
    for (std::size_t x = index - r; x <= index + r; ++x)
        if (series.price(x) > series.price(index)) return false;
    return true;
}

bool is_crash_day(const PriceSeries& series, std::size_t index, double drop, int horizon) {
    const Date d = series.date(index);
    const double pd = series.price(index);
    for (std::size_t j = series.lower_index(d - std::chrono::days{horizon}); j < index; ++j)
        if (series.price(j) > pd) return false;
    const std::size_t end = series.upper_index(d + std::chrono::days{horizon});
    double low = pd;
    for (std::size_t j = index + 1; j < end; ++j) {
        if (series.price(j) > pd) return false;
        low = std::min(low, series.price(j));
    }
    return low < (1.0 - drop) * pd;
}

EventSet detect_crashes(const PriceSeries& series, double drop, int horizon) {
    if (!(drop > 0.0 && drop < 1.0)) throw ConfigError("crash drop must lie in (0, 1)");
    if (horizon < 1) throw ConfigError("crash horizon must be at least one day");
    EventSet out{EventKind::crash, {}, {}};
    out.rule.drop = drop;
    out.rule.horizon = horizon;
    std::vector<std::size_t> cluster;
    const auto flush = [&] {
        if (cluster.empty()) return;
        std::size_t best = cluster.front();
        for (std::size_t i : cluster)
            if (series.price(i) >= series.price(best)) best = i;
        out.days.push_back(series.day(best));
        cluster.clear();
    };
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!is_crash_day(series, i, drop, horizon)) continue;
        if (!cluster.empty() && (series.date(i) - series.date(cluster.back())).count() > horizon) flush();
        cluster.push_back(i);
    }
    flush();
    return out;
}

void write_events_csv(std::ostream& out, const EventSet& events) {
    out << "kind,date\n";
    for (const auto& d : events.days) out << to_string(events.kind) << ',' << format_date(d.date) << '\n';
}

} // namespace rebound
