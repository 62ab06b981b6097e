#include "rebound/errors.hpp"
#include "rebound/extrema.hpp"
#include "rebound/synth.hpp"

#include <doctest.h>

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <sstream>

using namespace rebound;
using namespace std::chrono;

TEST_CASE("singularity closed form") {
    const auto p = SingularityParams::from_rate(2.0, 0.01, 2.0);
    CHECK(p.tc == doctest::Approx(50.0));
    const std::vector<double> t{0.0, 25.0};
    const auto x = singularity_trajectory(p, t);
    CHECK(x[0] == 2.0);
    CHECK(x[1] == doctest::Approx(4.0));
    CHECK_THROWS_AS(singularity_trajectory(p, std::vector<double>{50.0}), DataError);
    CHECK_THROWS_AS(singularity_trajectory(p, std::vector<double>{-1.0}), DataError);
    CHECK_THROWS_AS(SingularityParams::from_rate(1.0, 0.01, 1.0), ConfigError);
}

TEST_CASE("singularity matches an adaptive ODE integration") {
    using namespace boost::numeric::odeint;
    for (const auto& [x0, k, m] : {std::tuple{1.0, 0.02, 1.5}, std::tuple{3.0, 0.001, 2.5}, std::tuple{0.5, 0.1, 3.0}}) {
        const auto p = SingularityParams::from_rate(x0, k, m);
        std::vector<double> grid;
        for (int i = 0; i <= 90; ++i) grid.push_back(p.tc * 0.01 * i);
        const auto closed = singularity_trajectory(p, grid);

        auto stepper = make_controlled(1e-13, 1e-13, runge_kutta_dopri5<double>());
        double x = x0;
        const auto rhs = [k, m](const double& y, double& dy, double) { dy = k * std::pow(y, m); };
        std::vector<double> numeric{x0};
        for (std::size_t i = 1; i < grid.size(); ++i) {
            integrate_adaptive(stepper, rhs, x, grid[i - 1], grid[i], p.tc * 1e-4);
            numeric.push_back(x);
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CAPTURE(i);
            CHECK(std::abs(numeric[i] - closed[i]) <= 1e-6 * closed[i]);
            if (i > 0) CHECK(closed[i] > closed[i - 1]);
        }
    }
}

TEST_CASE("noiseless LPPL series") {
    SynthSpec s;
    s.lppl = {.A = 5.0, .B = 0.02, .C = 0.002, .m = 0.5, .tc = day_number(s.end) + 30, .omega = 7.0, .phi = 1.0};
    const auto out = synth_lppl_series(s);
    const auto y = log_prices(out.series);
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(y[i] == doctest::Approx(eval_lppl(s.lppl, out.series.date(i))).epsilon(1e-14));
    for (Date d : out.series.dates()) {
        const weekday wd{d};
        CHECK(wd != Saturday);
        CHECK(wd != Sunday);
    }
    CHECK(out.series.first_date() == parse_date("2000-01-03"));
}

TEST_CASE("negative bubble declines with steepening slope") {
    SynthSpec s;
    s.model = SynthModel::power_law;
    s.lppl = {.A = 5.0, .B = 0.05, .C = 0.0, .m = 0.5, .tc = day_number(s.end) + 10, .omega = 7.0, .phi = 0.0};
    const auto y = log_prices(synth_lppl_series(s).series);
    const auto t = day_numbers(synth_lppl_series(s).series);
    double prev_slope = 0.0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        const double slope = (y[i] - y[i - 1]) / (t[i] - t[i - 1]);
        CHECK(slope < 0.0);
        if (i > 1) CHECK(slope < prev_slope);
        prev_slope = slope;
    }
}

TEST_CASE("noise is seeded") {
    SynthSpec s;
    s.lppl = {.A = 5.0, .B = 0.02, .C = 0.002, .m = 0.5, .tc = day_number(s.end) + 30, .omega = 7.0, .phi = 1.0};
    s.noise_sigma = 0.02;
    s.seed = 9;
    const auto a = synth_lppl_series(s), b = synth_lppl_series(s);
    CHECK(a.series == b.series);
    s.seed = 10;
    CHECK_FALSE(synth_lppl_series(s).series == a.series);
}

TEST_CASE("spec validation") {
    SynthSpec s;
    s.lppl.tc = day_number(s.end);
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.lppl.tc = day_number(s.end) + 5;
    s.noise_sigma = -1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK(parse_synth_model("singularity_ode") == SynthModel::singularity_ode);
}

TEST_CASE("singularity series") {
    SynthSpec s;
    s.model = SynthModel::singularity_ode;
    s.singularity = SingularityParams::from_rate(10.0, 0.0001, 2.0);  // tc = 1000 days
    s.end = s.start + days{900};
    const auto out = synth_lppl_series(s);
    const double t = static_cast<double>((out.series.last_date() - s.start).count());
    CHECK(out.series.prices().back() ==
          doctest::Approx(singularity_trajectory(s.singularity, std::vector<double>{t})[0]));
    std::ostringstream j;
    write_truth_json(j, out.truth);
    CHECK(j.str().find("\"singularity_ode\"") != std::string::npos);
}

TEST_CASE("planted rebound course") {
    SUBCASE("single trough, no noise") {
        CourseConfig c;
        c.n_bubbles = 1;
        c.noise_sigma = 0.0;
        const auto course = plant_rebound_course(c);
        const auto r = detect_rebounds(course.series, 200);
        REQUIRE(r.days.size() == 1);
        CHECK(r.days[0] == course.troughs[0]);
    }
    SUBCASE("three troughs with noise") {
        CourseConfig c;
        c.n_bubbles = 3;
        c.spacing = 500;
        c.noise_sigma = 0.005;
        const auto course = plant_rebound_course(c);
        const auto r = detect_rebounds(course.series, 200);
        REQUIRE(r.days.size() == 3);
        for (int k = 0; k < 3; ++k) {
            const long gap = static_cast<long>(r.days[k].index) - static_cast<long>(course.troughs[k].index);
            CHECK(std::abs(gap) <= 5);
        }
    }
    SUBCASE("spacing must exceed twice the radius") {
        CourseConfig c;
        c.n_bubbles = 2;
        c.spacing = 100;
        CHECK_THROWS_AS(plant_rebound_course(c), ConfigError);
    }
    SUBCASE("deterministic") {
        CourseConfig c;
        CHECK(plant_rebound_course(c).series == plant_rebound_course(c).series);
    }
}
