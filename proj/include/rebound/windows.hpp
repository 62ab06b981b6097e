/*
 * Multi-scale (t1, t2) window grid for the LPPL scan.
 *
 * Start dates step forward from t10 by dt1 days, end dates step backward
 * from t20 by dt2 days. Every pair with dt_min <= t2 - t1 <= dt_max (both
 * bounds inclusive) is emitted, ordered by t1 then t2.
 */
#pragma once

#include "rebound/timeseries.hpp"

#include <iosfwd>
#include <vector>

namespace rebound {

struct Window {
    Date t1;
    Date t2;

    int length_days() const { return (t2 - t1).count(); }

    friend bool operator==(const Window&, const Window&) = default;
    friend auto operator<=>(const Window&, const Window&) = default;
};

struct GridConfig {
    Date t10 = std::chrono::year{1950} / 1 / 3;
    Date t20 = std::chrono::year{2009} / 6 / 3;
    int dt1 = 50;
    int dt2 = 50;
    int dt_min = 110;
    int dt_max = 1500;

    /// Throws ConfigError when a grid invariant does not hold.
    void validate() const;
};

std::vector<Window> generate_windows(const GridConfig& config);

/// Number of windows without materializing them.
std::size_t count_windows(const GridConfig& config);

void write_windows_csv(std::ostream& out, const std::vector<Window>& windows);

} // namespace rebound
