/*
 * Daily adjusted-close price series: loading, validation, slicing.
 *
 * Dates are whole calendar days (`std::chrono::sys_days`). Continuous
 * times such as a fitted critical time are carried as a `double` count of
 * days since 1970-01-01, see `day_number`.
 */
#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rebound {

using Date = std::chrono::sys_days;

/// Days since 1970-01-01 as a real number.
inline double day_number(Date d) { return static_cast<double>(d.time_since_epoch().count()); }

/// Whole date containing the continuous time `t` (floor).
Date date_from_day_number(double t);

/// Parses YYYY-MM-DD. Throws DataError on malformed or impossible dates.
Date parse_date(std::string_view text);

std::string format_date(Date d);

struct TradingDay {
    Date date;
    std::size_t index = 0;

    friend bool operator==(const TradingDay&, const TradingDay&) = default;
};

/**
 * Immutable sequence of (date, price) pairs.
 *
 * Invariants enforced at construction: at least two observations, dates
 * strictly increasing, every price finite and strictly positive.
 */
class PriceSeries {
public:
    PriceSeries(std::vector<Date> dates, std::vector<double> prices);

    std::size_t size() const { return dates_.size(); }
    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<double>& prices() const { return prices_; }

    Date date(std::size_t i) const { return dates_.at(i); }
    double price(std::size_t i) const { return prices_.at(i); }
    TradingDay day(std::size_t i) const { return {dates_.at(i), i}; }

    Date first_date() const { return dates_.front(); }
    Date last_date() const { return dates_.back(); }

    /// Index of the first day with date >= d (size() if none).
    std::size_t lower_index(Date d) const;
    /// Index one past the last day with date <= d.
    std::size_t upper_index(Date d) const;

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

private:
    std::vector<Date> dates_;
    std::vector<double> prices_;
};

struct CsvLoadResult {
    PriceSeries series;
    std::size_t rejected_rows = 0;
};

/**
 * Reads a headered CSV file with an ISO date column and a price column.
 *
 * Rows with a missing, unparseable or non-positive price are skipped and
 * counted in `rejected_rows`. Rows are sorted ascending by date. Throws
 * DataError if the file cannot be read, a column is absent, a date is
 * malformed, no valid rows remain, or a date repeats.
 */
CsvLoadResult load_csv(const std::filesystem::path& path, std::string_view date_column = "Date",
                       std::string_view price_column = "Adj Close");
CsvLoadResult read_csv(std::istream& in, std::string_view date_column = "Date",
                       std::string_view price_column = "Adj Close");

/// Writes `date,price` rows with round-trip precision.
void write_csv(std::ostream& out, const PriceSeries& series, std::string_view date_column = "Date",
               std::string_view price_column = "Adj Close");
void save_csv(const std::filesystem::path& path, const PriceSeries& series,
              std::string_view date_column = "Date", std::string_view price_column = "Adj Close");

std::vector<double> log_prices(const PriceSeries& series);

/// Continuous time of every observation (see day_number).
std::vector<double> day_numbers(const PriceSeries& series);

struct Window;

/// All observations with t1 <= date <= t2, re-indexed from zero.
/// Throws DataError if fewer than two observations fall inside.
PriceSeries slice(const PriceSeries& series, const Window& window);
PriceSeries slice(const PriceSeries& series, Date from, Date to);

} // namespace rebound
