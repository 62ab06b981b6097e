#include "rebound/synth.hpp"

#include "rebound/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace rebound {

SingularityParams SingularityParams::from_rate(double x0, double k, double m) {
    if (!(x0 > 0.0) || !(k > 0.0) || !(m > 1.0)) throw ConfigError("singularity needs x0 > 0, k > 0, m > 1");
    return {x0, m, std::pow(x0, 1.0 - m) / (k * (m - 1.0))};
}

std::vector<double> singularity_trajectory(const SingularityParams& p, std::span<const double> t_grid) {
    if (!(p.m > 1.0)) throw ConfigError("singularity exponent m must exceed 1");
    if (!(p.x0 > 0.0) || !(p.tc > 0.0)) throw ConfigError("singularity needs x0 > 0 and tc > 0");
    const double power = 1.0 / (1.0 - p.m);
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        if (t < 0.0 || t >= p.tc) throw DataError("singularity trajectory evaluated outside [0, tc)");
        out.push_back(p.x0 * std::pow(1.0 - t / p.tc, power));
    }
    return out;
}

const char* to_string(SynthModel model) {
    switch (model) {
    case SynthModel::singularity_ode: return "singularity_ode";
    case SynthModel::power_law: return "power_law";
    case SynthModel::lppl: return "lppl";
    }
    return "?";
}

SynthModel parse_synth_model(std::string_view text) {
    if (text == "singularity_ode") return SynthModel::singularity_ode;
    if (text == "power_law") return SynthModel::power_law;
    if (text == "lppl") return SynthModel::lppl;
    throw ConfigError("unknown synthetic model '" + std::string(text) + "'");
}

void SynthSpec::validate() const {
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
    if (!(start < end)) throw ConfigError("synthetic span must have start < end");
    if (model == SynthModel::singularity_ode) {
        if (!(singularity.m > 1.0) || !(singularity.x0 > 0.0)) throw ConfigError("singularity needs m > 1, x0 > 0");
        if (!(static_cast<double>((end - start).count()) < singularity.tc))
            throw ConfigError("synthetic span reaches the singularity time");
    } else {
        if (!(day_number(end) < lppl.tc)) throw ConfigError("synthetic span reaches the critical time");
        if (!(lppl.m > 0.0 && lppl.m < 1.0)) throw ConfigError("LPPL exponent m must lie in (0, 1)");
    }
}

std::vector<Date> weekdays(Date start, Date end) {
    std::vector<Date> out;
    for (Date d = start; d <= end; d += std::chrono::days{1}) {
        const std::chrono::weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(d);
    }
    return out;
}

SynthSeries synth_lppl_series(const SynthSpec& spec) {
    spec.validate();
    auto dates = weekdays(spec.start, spec.end);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> prices;
    prices.reserve(dates.size());
    LpplParams model = spec.lppl;
    if (spec.model == SynthModel::power_law) model.C = 0.0;
    for (Date d : dates) {
        double y = 0.0;
        if (spec.model == SynthModel::singularity_ode) {
            const double t = static_cast<double>((d - spec.start).count());
            const double x = spec.singularity.x0 * std::pow(1.0 - t / spec.singularity.tc, 1.0 / (1.0 - spec.singularity.m));
            y = std::log(x);
        } else {
            y = eval_lppl(model, day_number(d));
        }
        const double eps = spec.noise_sigma > 0.0 ? spec.noise_sigma * noise(rng) : 0.0;
        prices.push_back(std::exp(y + eps));
    }
    SynthSeries out{PriceSeries(std::move(dates), std::move(prices)), spec};
    if (spec.model == SynthModel::power_law) out.truth.lppl.C = 0.0;
    return out;
}

ReboundCourse plant_rebound_course(const CourseConfig& c) {
    if (c.n_bubbles < 1 || c.spacing < 1 || c.radius < 1) throw ConfigError("course counts must be positive");
    if (!(c.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
    if (c.spacing <= 2 * c.radius)
        throw ConfigError("spacing " + std::to_string(c.spacing) + " too small for rebound radius " +
                          std::to_string(c.radius) + " (need spacing > 2 * radius)");

    const auto total = static_cast<std::size_t>(c.n_bubbles) * static_cast<std::size_t>(c.spacing);
    std::vector<Date> dates;
    dates.reserve(total);
    for (Date d = c.start; dates.size() < total; d += std::chrono::days{1}) {
        const std::chrono::weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) dates.push_back(d);
    }

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto draw = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> y(total);
    std::vector<TradingDay> troughs;
    double level = std::log(100.0);
    const auto s = static_cast<std::size_t>(c.spacing);
    for (std::size_t k = 0; k < static_cast<std::size_t>(c.n_bubbles); ++k) {
        const std::size_t first = k * s, trough = first + s / 2, last = first + s - 1;
        const double tc = day_number(dates[trough]);
        const double t_first = day_number(dates[first]), t_last = day_number(dates[last]);

        const double m = draw(0.3, 0.7);
        const double omega = draw(5.0, 11.0);
        const double phi = draw(0.0, 2.0 * std::numbers::pi);
        const double decline = draw(0.25, 0.40);
        const double B = decline / std::pow(tc - t_first, m);
        const double C = B * draw(0.05, 0.15);
        const double m_up = draw(0.4, 0.7);
        const double R = draw(0.35, 0.50) / std::pow(t_last - tc, m_up);

        const auto shape = [&](double t) {
            if (t < tc) {
                const double dt = tc - t;
                return std::pow(dt, m) * (B + C * std::cos(omega * std::log(dt) - phi));
            }
            return R * std::pow(t - tc, m_up);
        };
        // Continuity with the previous segment's last value.
        const double A = level - shape(t_first);
        for (std::size_t i = first; i <= last; ++i) y[i] = A + shape(day_number(dates[i]));
        level = y[last];
        troughs.push_back({dates[trough], trough});
    }

    std::vector<double> prices(total);
    for (std::size_t i = 0; i < total; ++i) {
        const double eps = c.noise_sigma > 0.0 ? c.noise_sigma * noise(rng) : 0.0;
        prices[i] = std::exp(y[i] + eps);
    }
    return {PriceSeries(std::move(dates), std::move(prices)), std::move(troughs)};
}

void write_truth_json(std::ostream& out, const SynthSpec& spec) {
    nlohmann::ordered_json j;
    j["model"] = to_string(spec.model);
    j["start"] = format_date(spec.start);
    j["end"] = format_date(spec.end);
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    if (spec.model == SynthModel::singularity_ode) {
        j["x0"] = spec.singularity.x0;
        j["m"] = spec.singularity.m;
        j["tc_days_from_start"] = spec.singularity.tc;
    } else {
        const auto& p = spec.lppl;
        j["A"] = p.A;
        j["B"] = p.B;
        j["C"] = p.C;
        j["m"] = p.m;
        j["tc"] = p.tc;
        j["tc_date"] = format_date(date_from_day_number(p.tc));
        j["omega"] = p.omega;
        j["phi"] = p.phi;
    }
    out << j.dump(2) << '\n';
}

} // namespace rebound
