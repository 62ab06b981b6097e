#include "rebound/errors.hpp"
#include "rebound/pattern.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace rebound;
using namespace std::chrono;

namespace {

FitResult fit_with(double tc, double m = 0.5, double omega = 8.0, double B = 0.1) {
    FitResult f;
    f.window = {parse_date("1960-01-04"), parse_date("1961-01-02")};
    f.params = {.A = 1.0, .B = B, .C = 0.01, .m = m, .tc = tc, .omega = omega, .phi = 0.0};
    f.rmse = 0.01;
    f.n_points = 250;
    f.converged = true;
    return f;
}

EventSet rebounds_at(std::initializer_list<const char*> dates) {
    EventSet e;
    std::size_t i = 0;
    for (auto d : dates) e.days.push_back({parse_date(d), i++});
    return e;
}

// One bin per parameter (no edges): every fit lands in bin 0 everywhere.
FeatureSet all_class_I_features() {
    FeatureSet fs;
    for (auto p : kTraitParameters) fs.features_I.push_back({p, 0});
    return fs;
}

PriceSeries daily(Date from, int n) {
    std::vector<Date> d;
    std::vector<double> p;
    for (int i = 0; i < n; ++i) {
        d.push_back(from + days{i});
        p.push_back(100.0);
    }
    return {d, p};
}

} // namespace

TEST_CASE("proximity labeling") {
    const auto reb = rebounds_at({"1962-03-01"});
    const double r = day_number(parse_date("1962-03-01"));
    for (double delta : {0.0, 5.0, 20.0}) {
        const auto on = label_fits(std::vector{fit_with(r)}, reb, delta);
        CHECK(on[0].label == FitClass::class_I);
        CHECK(on[0].nearest_rebound_distance == 0.0);
        const auto off = label_fits(std::vector{fit_with(r + delta + 1.0)}, reb, delta);
        CHECK(off[0].label == FitClass::class_II);
    }
}

TEST_CASE("ten scripted fits against two rebounds") {
    const auto reb = rebounds_at({"1962-03-01", "1963-07-15"});
    const double r1 = day_number(parse_date("1962-03-01")), r2 = day_number(parse_date("1963-07-15"));
    // offsets from r1 and the hand-evaluated nearest distance and class (delta = 20)
    struct Row {
        double tc;
        double dist;
        FitClass cls;
    };
    const std::vector<Row> table{
        {r1 - 20.0, 20.0, FitClass::class_I},   {r1 - 20.5, 20.5, FitClass::class_II},
        {r1 + 3.25, 3.25, FitClass::class_I},   {r1 + 100.0, 100.0, FitClass::class_II},
        {r2 - 1.0, 1.0, FitClass::class_I},     {r2 + 19.9, 19.9, FitClass::class_I},
        {r2 + 21.0, 21.0, FitClass::class_II},  {(r1 + r2) / 2, (r2 - r1) / 2, FitClass::class_II},
        {r1 - 400.0, 400.0, FitClass::class_II}, {r2 + 0.5, 0.5, FitClass::class_I},
    };
    std::vector<FitResult> fits;
    for (const auto& row : table) fits.push_back(fit_with(row.tc));
    const auto lab = label_fits(fits, reb, 20.0);
    REQUIRE(lab.size() == table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CAPTURE(i);
        CHECK(lab[i].nearest_rebound_distance == doctest::Approx(table[i].dist));
        CHECK(lab[i].label == table[i].cls);
    }
    const auto none = label_fits(fits, EventSet{}, 20.0);
    for (const auto& l : none) CHECK(l.label == FitClass::class_II);
    CHECK_THROWS_AS(label_fits(fits, reb, -1.0), ConfigError);
}

TEST_CASE("tercile edges") {
    const auto e = quantile_edges({9, 1, 8, 2, 7, 3, 6, 4, 5}, 3);
    REQUIRE(e.size() == 2);
    CHECK(e[0] == doctest::Approx(11.0 / 3.0));
    CHECK(e[1] == doctest::Approx(19.0 / 3.0));
    TraitBinning b;
    b.edges[TraitBinning::index(TraitParameter::m)] = e;
    std::array<int, 3> occupancy{};
    for (int v = 1; v <= 9; ++v) occupancy[b.bin(TraitParameter::m, v)]++;
    CHECK(occupancy == std::array<int, 3>{3, 3, 3});

    CHECK(quantile_edges(std::vector<double>(12, 0.4), 3).empty());
    CHECK(quantile_edges({1, 2, 3}, 1).empty());
    CHECK_THROWS_AS(quantile_edges({1, 2, 3}, 0), ConfigError);
}

TEST_CASE("binning uses the pooled sample") {
    std::vector<LabeledFit> lf;
    for (int i = 0; i < 12; ++i)
        lf.push_back({fit_with(0.0, 0.1 + 0.05 * i), i < 6 ? FitClass::class_I : FitClass::class_II, 0.0});
    const auto b = build_binning(lf, 3);
    std::vector<double> pooled;
    for (const auto& x : lf) pooled.push_back(x.fit.params.m);
    CHECK(b.edges[TraitBinning::index(TraitParameter::m)] == quantile_edges(pooled, 3));
    // per-class terciles would put edges inside each half instead
    std::vector<double> first(pooled.begin(), pooled.begin() + 6);
    CHECK(b.edges[TraitBinning::index(TraitParameter::m)] != quantile_edges(first, 3));
    // omega is constant: one bin
    CHECK(b.bin_count(TraitParameter::omega) == 1);
    CHECK_THROWS_AS(build_binning(std::span(lf).first(9), 3), DataError);
}

TEST_CASE("trait values") {
    FitResult f = fit_with(day_number(parse_date("1961-01-12")), 0.3, 11.0, 0.2);
    f.params.C = 0.05;
    CHECK(trait_value(f, TraitParameter::m) == 0.3);
    CHECK(trait_value(f, TraitParameter::omega) == 11.0);
    CHECK(trait_value(f, TraitParameter::C_over_B) == doctest::Approx(0.25));
    CHECK(trait_value(f, TraitParameter::dt) == 364.0);
    CHECK(trait_value(f, TraitParameter::tc_gap) == 10.0);
    CHECK(parse_trait_parameter("C_over_B") == TraitParameter::C_over_B);
    CHECK_THROWS_AS(parse_trait_parameter("sigma"), DataError);
}

TEST_CASE("feature rule") {
    // build frequencies directly: 10 Class I fits and 10 Class II fits split on m
    auto make = [](int lowI, int lowII) {
        std::vector<LabeledFit> lf;
        for (int i = 0; i < 10; ++i) lf.push_back({fit_with(0.0, i < lowI ? 0.2 : 0.8), FitClass::class_I, 0.0});
        for (int i = 0; i < 10; ++i) lf.push_back({fit_with(0.0, i < lowII ? 0.2 : 0.8), FitClass::class_II, 0.0});
        return lf;
    };
    TraitBinning b;
    b.edges[TraitBinning::index(TraitParameter::m)] = {0.5};
    const Trait low{TraitParameter::m, 0};

    const auto fs = qualify_features(make(9, 1), b, 0.5, 0.3);  // freq_I 0.9, freq_II 0.1
    CHECK(fs.is_feature_I(low));
    CHECK_FALSE(fs.is_feature_II(low));

    const auto half = make(5, 5);  // 0.5 / 0.5
    CHECK_FALSE(qualify_features(half, b, 0.4, 0.3).is_feature_I(low));
    CHECK_FALSE(qualify_features(half, b, 0.4, 0.3).is_feature_II(low));
    CHECK(qualify_features(half, b, 0.4, 0.6).is_feature_I(low));
    CHECK(qualify_features(half, b, 0.4, 0.6).is_feature_II(low));
    CHECK_FALSE(qualify_features(half, b, 0.5, 0.6).is_feature_I(low));  // strict ">"

    std::vector<LabeledFit> only_I(10, {fit_with(0.0), FitClass::class_I, 0.0});
    CHECK_THROWS_AS(qualify_features(only_I, b, 0.5, 0.3), DataError);
    CHECK_THROWS_AS(qualify_features(half, b, 1.5, 0.3), ConfigError);
}

TEST_CASE("twenty scripted fits truth table") {
    // Class I: 8 fits, m low in 6, omega low in 4. Class II: 12 fits, m low in 2, omega low in 3.
    std::vector<LabeledFit> lf;
    for (int i = 0; i < 8; ++i)
        lf.push_back({fit_with(0.0, i < 6 ? 0.2 : 0.8, i < 4 ? 5.0 : 15.0), FitClass::class_I, 0.0});
    for (int i = 0; i < 12; ++i)
        lf.push_back({fit_with(0.0, i < 2 ? 0.2 : 0.8, i < 3 ? 5.0 : 15.0), FitClass::class_II, 0.0});
    TraitBinning b;
    b.edges[TraitBinning::index(TraitParameter::m)] = {0.5};
    b.edges[TraitBinning::index(TraitParameter::omega)] = {10.0};
    const auto fs = qualify_features(lf, b, 0.5, 0.3);
    // m low: 6/8 vs 2/12 -> I.  m high: 2/8 vs 10/12 -> II.
    // omega low: 4/8 vs 3/12 -> neither.  omega high: 4/8 vs 9/12 -> neither (0.5 not < 0.3).
    // single-bin parameters: 1 vs 1 -> neither.
    CHECK(fs.features_I == std::vector<Trait>{{TraitParameter::m, 0}});
    CHECK(fs.features_II == std::vector<Trait>{{TraitParameter::m, 1}});
    CHECK(fs.n_class_I == 8);
    CHECK(fs.n_class_II == 12);
    const auto& f_m_low = fs.frequencies[0];
    CHECK(f_m_low.freq_I == doctest::Approx(0.75));
    CHECK(f_m_low.freq_II == doctest::Approx(2.0 / 12.0));
}

TEST_CASE("alarm ratio") {
    CHECK(alarm_ratio({0, 0}) == 0.0);
    CHECK(alarm_ratio({3, 1}) == 0.75);
    CHECK(alarm_ratio({5, 0}) == 1.0);
    CHECK(alarm_ratio({0, 4}) == 0.0);

    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> u(0, 1000);
    for (int i = 0; i < 20000; ++i) {
        const FeatureCounts c{u(rng), u(rng)};
        const double r = alarm_ratio(c);
        CHECK((r >= 0.0 && r <= 1.0));
        if (c.class_I + c.class_II > 0)
            CHECK(r == doctest::Approx(static_cast<double>(c.class_I) / (c.class_I + c.class_II)));
    }
}

TEST_CASE("alarm index on a day") {
    const auto fs = all_class_I_features();
    const TradingDay day{parse_date("1965-05-05"), 0};
    const double d = day_number(day.date);
    CHECK(alarm_index(day, {}, fs) == 0.0);
    CHECK(alarm_index(day, std::vector{fit_with(d + 3)}, fs) == 1.0);
    CHECK(alarm_index(day, std::vector{fit_with(d + 25)}, fs) == 0.0);
    CHECK(count_features(d, std::vector{fit_with(d), fit_with(d - 20)}, fs, 20.0).class_I == 14);
}

TEST_CASE("alarm series locality") {
    const auto series = daily(parse_date("1965-01-01"), 120);
    const auto fs = all_class_I_features();
    const double tc = day_number(series.date(60));
    AlarmConfig cfg;

    const auto empty = alarm_series(series, {}, fs, cfg);
    CHECK(empty.size() == series.size());
    for (const auto& a : empty) CHECK(a.ri == 0.0);

    const auto ri = alarm_series(series, std::vector{fit_with(tc)}, fs, cfg);
    for (std::size_t i = 0; i < ri.size(); ++i) {
        CAPTURE(i);
        CHECK(ri[i].day == series.day(i));
        CHECK(ri[i].ri == (i >= 40 && i <= 80 ? 1.0 : 0.0));
    }
}

TEST_CASE("alarm series filters") {
    const auto series = daily(parse_date("1965-01-01"), 120);
    const double tc = day_number(series.date(60));
    auto fs = all_class_I_features();
    fs.features_II.push_back({TraitParameter::m, 0});  // every fit also carries one Class II feature
    AlarmConfig cfg;

    SUBCASE("positive bubbles are dropped by default") {
        const auto ri = alarm_series(series, std::vector{fit_with(tc, 0.5, 8.0, -0.1)}, fs, cfg);
        CHECK(ri[60].ri == 0.0);
        cfg.negative_bubbles_only = false;
        CHECK(alarm_series(series, std::vector{fit_with(tc, 0.5, 8.0, -0.1)}, fs, cfg)[60].ri ==
              doctest::Approx(7.0 / 8.0));
    }
    SUBCASE("boundary and unconverged fits are dropped") {
        auto f = fit_with(tc);
        f.at_bound = true;
        CHECK(alarm_series(series, std::vector{f}, fs, cfg)[60].ri == 0.0);
        cfg.exclude_boundary_fits = false;
        CHECK(alarm_series(series, std::vector{f}, fs, cfg)[60].ri > 0.0);
        f.converged = false;
        CHECK(alarm_series(series, std::vector{f}, fs, cfg)[60].ri == 0.0);
    }
    SUBCASE("causal scoring ignores windows ending after the day") {
        auto f = fit_with(tc);
        f.window.t2 = series.date(70);
        const auto ri = alarm_series(series, std::vector{f}, fs, cfg);
        CHECK(ri[60].ri == 0.0);
        CHECK(ri[75].ri > 0.0);
        cfg.causal = false;
        CHECK(alarm_series(series, std::vector{f}, fs, cfg)[60].ri > 0.0);
    }
    SUBCASE("span and out-of-sample guard") {
        cfg.from = series.date(10);
        cfg.to = series.date(19);
        CHECK(alarm_series(series, {}, fs, cfg).size() == 10);
        cfg.from = series.last_date() + days{5};
        cfg.to = std::nullopt;
        CHECK_THROWS_AS(alarm_series(series, {}, fs, cfg), DataError);
        cfg.from = series.date(10);
        cfg.out_of_sample = true;
        fs.learned_through = day_number(series.date(10));
        CHECK_THROWS_AS(alarm_series(series, {}, fs, cfg), DataError);
        fs.learned_through = day_number(series.date(9));
        CHECK_NOTHROW(alarm_series(series, {}, fs, cfg));
    }
}

TEST_CASE("adding a Class-I-only fit never lowers the index") {
    const auto series = daily(parse_date("1965-01-01"), 200);
    FeatureSet fs;
    fs.binning.edges[TraitBinning::index(TraitParameter::m)] = {0.5};
    fs.features_I = {{TraitParameter::m, 0}};
    fs.features_II = {{TraitParameter::m, 1}};
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<FitResult> fits;
    for (int i = 0; i < 40; ++i) fits.push_back(fit_with(day_number(series.date(0)) + 200 * u(rng), u(rng)));
    const auto before = alarm_series(series, fits, fs, {});
    fits.push_back(fit_with(day_number(series.date(100)), 0.1));
    const auto after = alarm_series(series, fits, fs, {});
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i].ri >= before[i].ri);
}

TEST_CASE("learning set") {
    // V-shaped series with its trough on 1968-06-01, well inside the pre-split data
    std::vector<Date> d;
    std::vector<double> p;
    const Date trough = parse_date("1968-06-01");
    for (int i = -400; i <= 400; ++i) {
        d.push_back(trough + days{i});
        p.push_back(100.0 + std::abs(i));
    }
    const PriceSeries s(d, p);
    TrainConfig cfg;
    cfg.split = trough + days{300};
    const double r = day_number(trough);

    auto late = fit_with(r);
    late.window.t2 = cfg.split;  // ends on the split: excluded
    auto pos = fit_with(r, 0.5, 8.0, -0.2);
    auto edge = fit_with(r);
    edge.at_bound = true;
    const std::vector<FitResult> fits{fit_with(r + 5), fit_with(r + 50), late, pos, edge};
    const auto ls = learning_set(s, fits, cfg);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0].label == FitClass::class_I);
    CHECK(ls[1].label == FitClass::class_II);

    cfg.negative_bubbles_only = false;
    cfg.exclude_boundary_fits = false;
    CHECK(learning_set(s, fits, cfg).size() == 4);

    cfg.split = s.first_date();
    CHECK_THROWS_AS(learning_set(s, fits, cfg), ConfigError);
}

TEST_CASE("feature set JSON and alarm CSV round trip") {
    std::vector<LabeledFit> lf;
    for (int i = 0; i < 8; ++i) lf.push_back({fit_with(0.0, i < 6 ? 0.2 : 0.8), FitClass::class_I, 0.0});
    for (int i = 0; i < 12; ++i) lf.push_back({fit_with(0.0, i < 2 ? 0.2 : 0.8), FitClass::class_II, 0.0});
    auto fs = qualify_features(lf, build_binning(lf, 3), 0.5, 0.3);
    std::stringstream io;
    write_feature_set_json(io, fs);
    const auto back = read_feature_set_json(io);
    CHECK(back.features_I == fs.features_I);
    CHECK(back.features_II == fs.features_II);
    CHECK(back.binning.edges == fs.binning.edges);
    CHECK(back.learned_through == fs.learned_through);
    CHECK(back.alpha == fs.alpha);
    CHECK(back.n_class_I == 8);

    const auto series = daily(parse_date("1965-01-01"), 5);
    std::vector<AlarmPoint> a;
    for (std::size_t i = 0; i < 5; ++i) a.push_back({series.day(i), 0.1 * static_cast<double>(i) / 3.0});
    std::stringstream ac;
    write_alarm_csv(ac, a);
    const auto ab = read_alarm_csv(ac);
    REQUIRE(ab.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(ab[i].day.date == a[i].day.date);
        CHECK(ab[i].ri == a[i].ri);
    }
}
