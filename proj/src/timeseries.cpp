#include "rebound/timeseries.hpp"

#include "rebound/errors.hpp"
#include "rebound/log.hpp"
#include "rebound/windows.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace rebound {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view text, double& value) {
    if (text.empty()) return false;
    // std::from_chars does not accept a leading '+'.
    if (text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

template <class Int>
bool parse_int(std::string_view text, Int& value) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

} // namespace

Date date_from_day_number(double t) {
    return Date{std::chrono::days{static_cast<long>(std::floor(t))}};
}

Date parse_date(std::string_view text) {
    text = trim(text);
    int y = 0;
    unsigned mo = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_int(text.substr(0, 4), y) ||
        !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d)) {
        throw DataError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
    return Date{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

PriceSeries::PriceSeries(std::vector<Date> dates, std::vector<double> prices)
    : dates_(std::move(dates)), prices_(std::move(prices)) {
    if (dates_.size() != prices_.size()) throw DataError("dates and prices differ in length");
    if (dates_.size() < 2) throw DataError("a price series needs at least two observations");
    for (std::size_t i = 0; i < prices_.size(); ++i) {
        if (!(prices_[i] > 0.0) || !std::isfinite(prices_[i]))
            throw DataError("non-positive price on " + format_date(dates_[i]));
        if (i > 0 && !(dates_[i - 1] < dates_[i]))
            throw DataError("dates not strictly increasing at " + format_date(dates_[i]));
    }
}

std::size_t PriceSeries::lower_index(Date d) const {
    return static_cast<std::size_t>(std::lower_bound(dates_.begin(), dates_.end(), d) - dates_.begin());
}

std::size_t PriceSeries::upper_index(Date d) const {
    return static_cast<std::size_t>(std::upper_bound(dates_.begin(), dates_.end(), d) - dates_.begin());
}

CsvLoadResult read_csv(std::istream& in, std::string_view date_column, std::string_view price_column) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV input (header row required)");
    const auto header = split_fields(line);
    const auto find_column = [&](std::string_view name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("CSV column '" + std::string(name) + "' not found");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_col = find_column(date_column);
    const std::size_t price_col = find_column(price_column);

    std::vector<std::pair<Date, double>> rows;
    std::size_t rejected = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() <= date_col) throw DataError("line " + std::to_string(line_no) + ": missing date");
        Date date;
        try {
            date = parse_date(fields[date_col]);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        double price = 0.0;
        if (fields.size() <= price_col || !parse_double(fields[price_col], price) || !(price > 0.0) ||
            !std::isfinite(price)) {
            ++rejected;
            continue;
        }
        rows.emplace_back(date, price);
    }
    if (rows.empty()) throw DataError("no valid price rows");
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) throw DataError("duplicate date " + format_date(rows[i].first));
    }
    if (rejected > 0) warn(std::to_string(rejected) + " row(s) rejected for missing or non-positive price");

    std::vector<Date> dates;
    std::vector<double> prices;
    dates.reserve(rows.size());
    prices.reserve(rows.size());
    for (const auto& [d, p] : rows) {
        dates.push_back(d);
        prices.push_back(p);
    }
    return {PriceSeries(std::move(dates), std::move(prices)), rejected};
}

CsvLoadResult load_csv(const std::filesystem::path& path, std::string_view date_column,
                       std::string_view price_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    return read_csv(in, date_column, price_column);
}

void write_csv(std::ostream& out, const PriceSeries& series, std::string_view date_column,
               std::string_view price_column) {
    out << date_column << ',' << price_column << '\n';
    char buf[32];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", series.price(i));
        out << format_date(series.date(i)) << ',' << buf << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const PriceSeries& series, std::string_view date_column,
              std::string_view price_column) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_csv(out, series, date_column, price_column);
}

std::vector<double> log_prices(const PriceSeries& series) {
    std::vector<double> out(series.size());
    std::transform(series.prices().begin(), series.prices().end(), out.begin(),
                   [](double p) { return std::log(p); });
    return out;
}

std::vector<double> day_numbers(const PriceSeries& series) {
    std::vector<double> out(series.size());
    std::transform(series.dates().begin(), series.dates().end(), out.begin(),
                   [](Date d) { return day_number(d); });
    return out;
}

PriceSeries slice(const PriceSeries& series, Date from, Date to) {
    const std::size_t lo = series.lower_index(from);
    const std::size_t hi = series.upper_index(to);
    if (hi <= lo + 1) {
        throw DataError("window " + format_date(from) + ".." + format_date(to) + " selects " +
                        std::to_string(hi > lo ? hi - lo : 0) + " observation(s)");
    }
    return PriceSeries({series.dates().begin() + lo, series.dates().begin() + hi},
                       {series.prices().begin() + lo, series.prices().begin() + hi});
}

PriceSeries slice(const PriceSeries& series, const Window& window) {
    return slice(series, window.t1, window.t2);
}

} // namespace rebound
