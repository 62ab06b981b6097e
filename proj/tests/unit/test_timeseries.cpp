#include "rebound/errors.hpp"
#include "rebound/log.hpp"
#include "rebound/timeseries.hpp"
#include "rebound/windows.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace rebound;
using namespace std::chrono;

namespace {

PriceSeries ten_days() {
    std::vector<Date> d;
    std::vector<double> p;
    for (int i = 0; i < 10; ++i) {
        d.push_back(sys_days{year{2020} / 3 / 2} + days{i});
        p.push_back(10.0 + i);
    }
    return {d, p};
}

struct CapturedWarnings {
    std::vector<std::string> seen;
    WarningSink previous;
    CapturedWarnings() {
        previous = set_warning_sink([this](std::string_view m) { seen.emplace_back(m); });
    }
    ~CapturedWarnings() { set_warning_sink(previous); }
};

} // namespace

TEST_CASE("dates round-trip through text and day numbers") {
    CHECK(format_date(parse_date("2009-06-03")) == "2009-06-03");
    CHECK(day_number(parse_date("1970-01-01")) == 0.0);
    CHECK(day_number(parse_date("1970-01-11")) == 10.0);
    CHECK(date_from_day_number(10.75) == parse_date("1970-01-11"));
    CHECK(date_from_day_number(-0.5) == parse_date("1969-12-31"));
    CHECK_THROWS_AS(parse_date("2009-13-01"), DataError);
    CHECK_THROWS_AS(parse_date("2009-02-30"), DataError);
    CHECK_THROWS_AS(parse_date("06/03/2009"), DataError);
}

TEST_CASE("PriceSeries invariants") {
    const Date a = parse_date("2020-01-01"), b = parse_date("2020-01-02");
    CHECK_NOTHROW(PriceSeries({a, b}, {1.0, 2.0}));
    CHECK_THROWS_AS(PriceSeries({a}, {1.0}), DataError);
    CHECK_THROWS_AS(PriceSeries({a, b}, {1.0, 0.0}), DataError);
    CHECK_THROWS_AS(PriceSeries({b, a}, {1.0, 2.0}), DataError);
    CHECK_THROWS_AS(PriceSeries({a, a}, {1.0, 2.0}), DataError);
    CHECK_THROWS_AS(PriceSeries({a, b}, {1.0}), DataError);
}

TEST_CASE("read_csv") {
    SUBCASE("three rows") {
        std::istringstream in("Date,Open,Adj Close\n2009-06-01,1,10\n2009-06-02,1,11\n2009-06-03,1,12\n");
        const auto r = read_csv(in);
        CHECK(r.series.size() == 3);
        CHECK(r.rejected_rows == 0);
        CHECK(r.series.price(2) == 12.0);
    }
    SUBCASE("negative price row is rejected and counted") {
        CapturedWarnings w;
        std::istringstream in("Date,Adj Close\n2009-06-01,10\n2009-06-02,-5\n2009-06-03,12\n");
        const auto r = read_csv(in);
        CHECK(r.series.size() == 2);
        CHECK(r.rejected_rows == 1);
        CHECK(w.seen.size() == 1);
    }
    SUBCASE("missing price is rejected") {
        std::istringstream in("Date,Adj Close\n2009-06-01,10\n2009-06-02,\n2009-06-03,12\n2009-06-04,null\n");
        CHECK(read_csv(in).rejected_rows == 2);
    }
    SUBCASE("shuffled dates come out ascending") {
        std::istringstream in("Date,Adj Close\n2009-06-03,12\n2009-06-01,10\n2009-06-04,13\n2009-06-02,11\n");
        const auto r = read_csv(in);
        REQUIRE(r.series.size() == 4);
        for (std::size_t i = 1; i < 4; ++i) CHECK(r.series.date(i - 1) < r.series.date(i));
        CHECK(r.series.prices() == std::vector<double>{10, 11, 12, 13});
    }
    SUBCASE("custom columns and quoted header") {
        std::istringstream in("\"day\",\"close\"\r\n2009-06-01,10\r\n2009-06-02,11\r\n");
        CHECK(read_csv(in, "day", "close").series.size() == 2);
    }
    SUBCASE("errors") {
        std::istringstream dup("Date,Adj Close\n2009-06-01,10\n2009-06-01,11\n");
        CHECK_THROWS_AS(read_csv(dup), DataError);
        std::istringstream none("Date,Adj Close\n2009-06-01,-1\n2009-06-02,0\n");
        CHECK_THROWS_AS(read_csv(none), DataError);
        std::istringstream nocol("Date,Close\n2009-06-01,1\n");
        CHECK_THROWS_AS(read_csv(nocol), DataError);
        std::istringstream baddate("Date,Adj Close\n2009-6-1,1\n2009-06-02,2\n");
        CHECK_THROWS_AS(read_csv(baddate), DataError);
        CHECK_THROWS_AS(load_csv("/nonexistent/prices.csv"), DataError);
    }
}

TEST_CASE("write_csv round-trips exactly") {
    const auto s = PriceSeries({parse_date("2001-01-01"), parse_date("2001-01-02")}, {1.0 / 3.0, std::exp(1.0)});
    std::stringstream io;
    write_csv(io, s);
    CHECK(read_csv(io).series == s);
}

TEST_CASE("log_prices") {
    const auto s = PriceSeries({parse_date("2001-01-01"), parse_date("2001-01-02"), parse_date("2001-01-03")},
                               {1.0, std::numbers::e, 8.0});
    const auto y = log_prices(s);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-15));

    const auto g = log_prices(PriceSeries({parse_date("2001-01-01"), parse_date("2001-01-02"),
                                           parse_date("2001-01-03")}, {2.0, 4.0, 8.0}));
    CHECK(g[1] - g[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(g[2] - g[1] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("slice") {
    const auto s = ten_days();
    CHECK(slice(s, Window{s.first_date(), s.last_date()}) == s);
    CHECK(slice(s, Window{s.first_date() - days{30}, s.last_date() + days{30}}) == s);

    const auto part = slice(s, Window{s.date(3), s.date(7)});
    CHECK(part.size() == 5);
    CHECK(part.first_date() == s.date(3));
    CHECK(part.day(0).index == 0);

    CHECK_THROWS_AS(slice(s, Window{s.date(4), s.date(4)}), DataError);
    CHECK_THROWS_AS(slice(s, Window{s.last_date() + days{1}, s.last_date() + days{9}}), DataError);
}

TEST_CASE("index lookup") {
    const auto s = ten_days();
    CHECK(s.lower_index(s.date(4)) == 4);
    CHECK(s.upper_index(s.date(4)) == 5);
    CHECK(s.lower_index(s.last_date() + days{1}) == s.size());
    CHECK(s.upper_index(s.first_date() - days{1}) == 0);
}
