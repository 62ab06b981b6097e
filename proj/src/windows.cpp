#include "rebound/windows.hpp"

#include "rebound/errors.hpp"

#include <algorithm>
#include <ostream>

namespace rebound {

void GridConfig::validate() const {
    if (dt1 <= 0 || dt2 <= 0) throw ConfigError("grid steps dt1 and dt2 must be positive");
    if (dt_min <= 0 || dt_min >= dt_max) throw ConfigError("grid requires 0 < dt_min < dt_max");
    if (t20 < t10) throw ConfigError("grid requires t10 <= t20");
}

namespace {

// Calls emit(t1, t2) for every grid window, ascending t1 then t2.
template <class Emit>
void for_each_window(const GridConfig& c, Emit&& emit) {
    c.validate();
    const long span = (c.t20 - c.t10).count();
    for (long s = 0; s < span; s += c.dt1) {
        // t2 = t20 - k*dt2 with dt_min <= t2 - t1 <= dt_max, i.e.
        // (span - s - dt_max) / dt2 <= k <= (span - s - dt_min) / dt2.
        const long head = span - s;
        if (head < c.dt_min) break;
        const long k_max = (head - c.dt_min) / c.dt2;
        const long k_min = head <= c.dt_max ? 0 : (head - c.dt_max + c.dt2 - 1) / c.dt2;
        for (long k = k_max; k >= k_min; --k) {
            emit(c.t10 + std::chrono::days{s}, c.t20 - std::chrono::days{k * c.dt2});
        }
    }
}

} // namespace

std::vector<Window> generate_windows(const GridConfig& config) {
    std::vector<Window> out;
    for_each_window(config, [&](Date t1, Date t2) { out.push_back({t1, t2}); });
    return out;
}

std::size_t count_windows(const GridConfig& config) {
    std::size_t n = 0;
    for_each_window(config, [&](Date, Date) { ++n; });
    return n;
}

void write_windows_csv(std::ostream& out, const std::vector<Window>& windows) {
    out << "t1,t2\n";
    for (const auto& w : windows) out << format_date(w.t1) << ',' << format_date(w.t2) << '\n';
}

} // namespace rebound
