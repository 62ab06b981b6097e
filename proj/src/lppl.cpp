#include "rebound/lppl.hpp"

#include "rebound/errors.hpp"
#include "linear_lsq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rebound {

namespace {

double time_to_critical(double tc, double t) {
    const double dt = tc - t;
    if (!(dt > 0.0)) throw DataError("model evaluated at or after the critical time");
    return dt;
}

} // namespace

double eval_power_law(const PowerLawParams& p, double t) {
    const double dt = time_to_critical(p.tc, t);
    return p.A + p.B * std::pow(dt, p.m);
}

double eval_lppl(const LpplParams& p, double t) {
    const double dt = time_to_critical(p.tc, t);
    const double f = std::pow(dt, p.m);
    return p.A + p.B * f + p.C * f * std::cos(p.omega * std::log(dt) - p.phi);
}

double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(phi, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

LinearSolution solve_linear_params(const NonlinearParams& nl, std::span<const double> times,
                                   std::span<const double> log_prices) {
    if (times.size() != log_prices.size()) throw DataError("times and log prices differ in length");
    if (times.size() < 6) throw DataError("at least 6 observations needed for 3 linear parameters");
    detail::DesignMatrix x(times.size(), 3);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double dt = time_to_critical(nl.tc, times[i]);
        const double f = std::pow(dt, nl.m);
        x(i, 0) = 1.0;
        x(i, 1) = f;
        x(i, 2) = f * std::cos(nl.omega * std::log(dt) - nl.phi);
    }
    const auto sol = detail::least_squares(x, log_prices);
    return {sol.coef[0], sol.coef[1], sol.coef[2], sol.sse, sol.rank < 3};
}

LinearSolution solve_power_law_linear(double m, double tc, std::span<const double> times,
                                      std::span<const double> log_prices) {
    if (times.size() != log_prices.size()) throw DataError("times and log prices differ in length");
    if (times.size() < 5) throw DataError("at least 5 observations needed for 2 linear parameters");
    detail::DesignMatrix x(times.size(), 2);
    for (std::size_t i = 0; i < times.size(); ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::pow(time_to_critical(tc, times[i]), m);
    }
    const auto sol = detail::least_squares(x, log_prices);
    return {sol.coef[0], sol.coef[1], 0.0, sol.sse, sol.rank < 2};
}

const char* to_string(BubbleSign sign) {
    switch (sign) {
    case BubbleSign::positive_bubble: return "positive_bubble";
    case BubbleSign::negative_bubble: return "negative_bubble";
    case BubbleSign::indeterminate: return "indeterminate";
    }
    return "?";
}

BubbleSign classify_bubble_sign(const FitResult& fit, double eps) {
    if (fit.params.B < -eps) return BubbleSign::positive_bubble;
    if (fit.params.B > eps) return BubbleSign::negative_bubble;
    return BubbleSign::indeterminate;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<TcBand> aggregate_tc_quantiles(std::span<const FitResult> fits,
                                           std::span<const std::pair<double, double>> levels) {
    std::vector<double> tcs;
    for (const auto& f : fits)
        if (f.converged) tcs.push_back(f.params.tc);
    if (tcs.empty()) throw DataError("no converged fits to aggregate");
    std::vector<TcBand> out;
    out.reserve(levels.size());
    for (const auto& [lo, hi] : levels) {
        if (lo > hi) throw ConfigError("quantile band with lower level above upper level");
        out.push_back({lo, hi, quantile(tcs, lo), quantile(tcs, hi)});
    }
    return out;
}

} // namespace rebound
