#include "rebound/pattern.hpp"

#include "rebound/errors.hpp"
#include "rebound/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace rebound {

std::vector<LabeledFit> label_fits(std::span<const FitResult> fits, const EventSet& rebounds, double delta) {
    if (delta < 0.0) throw ConfigError("proximity delta must be non-negative");
    if (rebounds.days.empty()) warn("no rebounds available: every fit is labeled Class II");
    std::vector<double> dates;
    dates.reserve(rebounds.days.size());
    for (const auto& d : rebounds.days) dates.push_back(day_number(d.date));
    std::sort(dates.begin(), dates.end());

    std::vector<LabeledFit> out;
    out.reserve(fits.size());
    for (const auto& f : fits) {
        double dist = std::numeric_limits<double>::infinity();
        const auto it = std::lower_bound(dates.begin(), dates.end(), f.params.tc);
        if (it != dates.end()) dist = std::min(dist, *it - f.params.tc);
        if (it != dates.begin()) dist = std::min(dist, f.params.tc - *(it - 1));
        out.push_back({f, dist <= delta ? FitClass::class_I : FitClass::class_II, dist});
    }
    return out;
}

const char* to_string(TraitParameter p) {
    switch (p) {
    case TraitParameter::m: return "m";
    case TraitParameter::omega: return "omega";
    case TraitParameter::B: return "B";
    case TraitParameter::C_over_B: return "C_over_B";
    case TraitParameter::rmse: return "rmse";
    case TraitParameter::dt: return "dt";
    case TraitParameter::tc_gap: return "tc_gap";
    }
    return "?";
}

TraitParameter parse_trait_parameter(std::string_view text) {
    for (auto p : kTraitParameters)
        if (text == to_string(p)) return p;
    throw DataError("unknown trait parameter '" + std::string(text) + "'");
}

double trait_value(const FitResult& fit, TraitParameter p) {
    const auto& q = fit.params;
    switch (p) {
    case TraitParameter::m: return q.m;
    case TraitParameter::omega: return q.omega;
    case TraitParameter::B: return q.B;
    case TraitParameter::C_over_B: return q.B != 0.0 ? q.C / q.B : 0.0;
    case TraitParameter::rmse: return fit.rmse;
    case TraitParameter::dt: return static_cast<double>(fit.window.length_days());
    case TraitParameter::tc_gap: return q.tc - day_number(fit.window.t2);
    }
    return 0.0;
}

std::size_t TraitBinning::bin(TraitParameter p, double value) const {
    const auto& e = edges[index(p)];
    return static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), value) - e.begin());
}

std::vector<double> quantile_edges(std::vector<double> values, int bins) {
    if (bins < 1) throw ConfigError("bins per parameter must be at least 1");
    std::vector<double> edges;
    for (int k = 1; k < bins; ++k) {
        const double e = quantile(values, static_cast<double>(k) / bins);
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    // An edge at the sample minimum would leave the lowest bin empty.
    const double lowest = *std::min_element(values.begin(), values.end());
    while (!edges.empty() && edges.front() <= lowest) edges.erase(edges.begin());
    return edges;
}

TraitBinning build_binning(std::span<const LabeledFit> learning_fits, int bins_per_parameter) {
    if (learning_fits.size() < 10) throw DataError("at least 10 learning fits are needed to build trait bins");
    TraitBinning b;
    for (auto p : kTraitParameters) {
        std::vector<double> v;
        v.reserve(learning_fits.size());
        for (const auto& lf : learning_fits) v.push_back(trait_value(lf.fit, p));
        b.edges[TraitBinning::index(p)] = quantile_edges(std::move(v), bins_per_parameter);
        if (bins_per_parameter > 1 && b.edges[TraitBinning::index(p)].empty())
            warn(std::string("trait parameter ") + to_string(p) + " is constant over the learning set");
    }
    return b;
}

std::array<Trait, kTraitParameterCount> traits_of(const FitResult& fit, const TraitBinning& binning) {
    std::array<Trait, kTraitParameterCount> out;
    for (std::size_t i = 0; i < kTraitParameterCount; ++i) {
        const auto p = kTraitParameters[i];
        out[i] = {p, binning.bin(p, trait_value(fit, p))};
    }
    return out;
}

bool FeatureSet::is_feature_I(const Trait& t) const {
    return std::binary_search(features_I.begin(), features_I.end(), t);
}

bool FeatureSet::is_feature_II(const Trait& t) const {
    return std::binary_search(features_II.begin(), features_II.end(), t);
}

FeatureSet qualify_features(std::span<const LabeledFit> labeled, const TraitBinning& binning, double alpha,
                            double beta) {
    if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
        throw ConfigError("alpha and beta must lie in [0, 1]");
    FeatureSet fs;
    fs.alpha = alpha;
    fs.beta = beta;
    fs.binning = binning;

    std::array<std::vector<std::array<std::size_t, 2>>, kTraitParameterCount> counts;
    for (auto p : kTraitParameters) counts[TraitBinning::index(p)].assign(binning.bin_count(p), {0, 0});
    double latest = -std::numeric_limits<double>::infinity();
    for (const auto& lf : labeled) {
        const std::size_t cls = lf.label == FitClass::class_I ? 0 : 1;
        (cls == 0 ? fs.n_class_I : fs.n_class_II)++;
        for (const auto& t : traits_of(lf.fit, binning)) counts[TraitBinning::index(t.parameter)][t.bin][cls]++;
        latest = std::max(latest, day_number(lf.fit.window.t2));
    }
    if (fs.n_class_I == 0 || fs.n_class_II == 0)
        throw DataError("feature qualification needs both classes (Class I: " + std::to_string(fs.n_class_I) +
                        ", Class II: " + std::to_string(fs.n_class_II) + ")");
    fs.learned_through = latest;

    for (auto p : kTraitParameters) {
        const auto& c = counts[TraitBinning::index(p)];
        for (std::size_t b = 0; b < c.size(); ++b) {
            TraitFrequency tf;
            tf.trait = {p, b};
            tf.freq_I = static_cast<double>(c[b][0]) / static_cast<double>(fs.n_class_I);
            tf.freq_II = static_cast<double>(c[b][1]) / static_cast<double>(fs.n_class_II);
            tf.feature_I = tf.freq_I > alpha && tf.freq_II < beta;
            tf.feature_II = tf.freq_II > alpha && tf.freq_I < beta;
            if (tf.feature_I) fs.features_I.push_back(tf.trait);
            if (tf.feature_II) fs.features_II.push_back(tf.trait);
            fs.frequencies.push_back(tf);
        }
    }
    return fs;
}

namespace {

// Adds the feature occurrences of one fit.
void accumulate(const FitResult& fit, const FeatureSet& features, FeatureCounts& counts) {
    for (const auto& t : traits_of(fit, features.binning)) {
        if (features.is_feature_I(t)) ++counts.class_I;
        if (features.is_feature_II(t)) ++counts.class_II;
    }
}

} // namespace

FeatureCounts count_features(double day, std::span<const FitResult> fits, const FeatureSet& features,
                             double proximity) {
    FeatureCounts counts;
    for (const auto& f : fits)
        if (std::abs(f.params.tc - day) <= proximity) accumulate(f, features, counts);
    return counts;
}

double alarm_ratio(FeatureCounts counts) {
    const std::size_t total = counts.class_I + counts.class_II;
    return total > 0 ? static_cast<double>(counts.class_I) / static_cast<double>(total) : 0.0;
}

double alarm_index(const TradingDay& day, std::span<const FitResult> fits_near_day, const FeatureSet& features,
                   double proximity) {
    return alarm_ratio(count_features(day_number(day.date), fits_near_day, features, proximity));
}

std::vector<AlarmPoint> alarm_series(const PriceSeries& series, std::span<const FitResult> fits,
                                     const FeatureSet& features, const AlarmConfig& config) {
    if (config.proximity < 0.0) throw ConfigError("alarm proximity must be non-negative");
    const Date from = config.from.value_or(series.first_date());
    const Date to = config.to.value_or(series.last_date());
    if (to < from || from > series.last_date() || to < series.first_date())
        throw DataError("alarm span " + format_date(from) + ".." + format_date(to) + " outside the series");
    if (config.out_of_sample && features.learned_through >= day_number(from))
        throw DataError("features learned from windows ending " + format_date(date_from_day_number(features.learned_through)) +
                        " cannot score an out-of-sample span starting " + format_date(from));

    // Per-fit feature counts, ordered by tc for the interval lookup.
    struct Entry {
        double tc;
        double t2;
        FeatureCounts counts;
    };
    std::vector<Entry> entries;
    for (const auto& f : fits) {
        if (!f.converged) continue;
        if (config.negative_bubbles_only && !(f.params.B > 0.0)) continue;
        if (config.exclude_boundary_fits && f.at_bound) continue;
        FeatureCounts c;
        accumulate(f, features, c);
        if (c.class_I + c.class_II == 0) continue;
        entries.push_back({f.params.tc, day_number(f.window.t2), c});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.tc < b.tc; });

    std::vector<AlarmPoint> out;
    for (std::size_t i = series.lower_index(from); i < series.upper_index(to); ++i) {
        const double day = day_number(series.date(i));
        auto it = std::lower_bound(entries.begin(), entries.end(), day - config.proximity,
                                   [](const Entry& e, double v) { return e.tc < v; });
        FeatureCounts total;
        for (; it != entries.end() && it->tc <= day + config.proximity; ++it) {
            if (config.causal && it->t2 > day) continue;
            total.class_I += it->counts.class_I;
            total.class_II += it->counts.class_II;
        }
        out.push_back({series.day(i), alarm_ratio(total)});
    }
    return out;
}

std::vector<LabeledFit> learning_set(const PriceSeries& series, std::span<const FitResult> fits,
                                     const TrainConfig& config) {
    if (config.split <= series.first_date()) throw ConfigError("split date precedes the data");
    std::vector<FitResult> learning;
    for (const auto& f : fits) {
        if (!f.converged || !(f.window.t2 < config.split)) continue;
        if (config.negative_bubbles_only && classify_bubble_sign(f) != BubbleSign::negative_bubble) continue;
        if (config.exclude_boundary_fits && f.at_bound) continue;
        learning.push_back(f);
    }
    const Date last_learning_day = config.split - std::chrono::days{1};
    const std::size_t n_before = series.upper_index(last_learning_day);
    EventSet rebounds{EventKind::rebound, {}, {}};
    if (n_before >= 2) rebounds = detect_rebounds(slice(series, series.first_date(), last_learning_day), config.radius);
    return label_fits(learning, rebounds, config.delta);
}

FeatureSet train_features(const PriceSeries& series, std::span<const FitResult> fits, const TrainConfig& config) {
    const auto labeled = learning_set(series, fits, config);
    const auto binning = build_binning(labeled, config.bins);
    return qualify_features(labeled, binning, config.alpha, config.beta);
}

void write_feature_set_json(std::ostream& out, const FeatureSet& fs) {
    nlohmann::ordered_json j;
    j["alpha"] = fs.alpha;
    j["beta"] = fs.beta;
    j["n_class_I"] = fs.n_class_I;
    j["n_class_II"] = fs.n_class_II;
    j["learned_through"] = format_date(date_from_day_number(fs.learned_through));
    j["learned_through_day"] = fs.learned_through;
    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    for (auto p : kTraitParameters) {
        nlohmann::ordered_json entry;
        entry["parameter"] = to_string(p);
        entry["bin_edges"] = fs.binning.edges[TraitBinning::index(p)];
        nlohmann::ordered_json bins = nlohmann::ordered_json::array();
        for (const auto& tf : fs.frequencies) {
            if (tf.trait.parameter != p) continue;
            bins.push_back({{"bin", tf.trait.bin},
                            {"freq_I", tf.freq_I},
                            {"freq_II", tf.freq_II},
                            {"feature_I", tf.feature_I},
                            {"feature_II", tf.feature_II}});
        }
        entry["bins"] = std::move(bins);
        params.push_back(std::move(entry));
    }
    j["parameters"] = std::move(params);
    out << j.dump(2) << '\n';
}

FeatureSet read_feature_set_json(std::istream& in) {
    FeatureSet fs;
    try {
        const auto j = nlohmann::json::parse(in);
        fs.alpha = j.at("alpha").get<double>();
        fs.beta = j.at("beta").get<double>();
        fs.n_class_I = j.at("n_class_I").get<std::size_t>();
        fs.n_class_II = j.at("n_class_II").get<std::size_t>();
        fs.learned_through = j.at("learned_through_day").get<double>();
        for (const auto& entry : j.at("parameters")) {
            const auto p = parse_trait_parameter(entry.at("parameter").get<std::string>());
            auto& edges = fs.binning.edges[TraitBinning::index(p)];
            edges = entry.at("bin_edges").get<std::vector<double>>();
            if (!std::is_sorted(edges.begin(), edges.end()) ||
                std::adjacent_find(edges.begin(), edges.end()) != edges.end())
                throw DataError(std::string("bin edges of ") + to_string(p) + " not strictly increasing");
            for (const auto& b : entry.at("bins")) {
                TraitFrequency tf;
                tf.trait = {p, b.at("bin").get<std::size_t>()};
                if (tf.trait.bin >= edges.size() + 1) throw DataError("bin index out of range");
                tf.freq_I = b.at("freq_I").get<double>();
                tf.freq_II = b.at("freq_II").get<double>();
                tf.feature_I = b.at("feature_I").get<bool>();
                tf.feature_II = b.at("feature_II").get<bool>();
                if (tf.feature_I) fs.features_I.push_back(tf.trait);
                if (tf.feature_II) fs.features_II.push_back(tf.trait);
                fs.frequencies.push_back(tf);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed feature set: ") + e.what());
    }
    std::sort(fs.features_I.begin(), fs.features_I.end());
    std::sort(fs.features_II.begin(), fs.features_II.end());
    return fs;
}

void write_alarm_csv(std::ostream& out, std::span<const AlarmPoint> series) {
    out << "date,ri\n";
    char buf[32];
    for (const auto& a : series) {
        std::snprintf(buf, sizeof buf, "%.17g", a.ri);
        out << format_date(a.day.date) << ',' << buf << '\n';
    }
}

std::vector<AlarmPoint> read_alarm_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty alarm file");
    std::vector<AlarmPoint> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError("malformed alarm row: " + line);
        try {
            out.push_back({{parse_date(line.substr(0, comma)), out.size()}, std::stod(line.substr(comma + 1))});
        } catch (const std::logic_error&) {
            throw DataError("malformed alarm value: " + line);
        }
    }
    return out;
}

void write_labels_csv(std::ostream& out, std::span<const LabeledFit> labeled) {
    out << "t1,t2,tc,tc_date,B,label,nearest_rebound_distance\n";
    char buf[64];
    for (const auto& lf : labeled) {
        std::snprintf(buf, sizeof buf, "%.17g", lf.fit.params.tc);
        out << format_date(lf.fit.window.t1) << ',' << format_date(lf.fit.window.t2) << ',' << buf << ','
            << format_date(date_from_day_number(lf.fit.params.tc)) << ',';
        std::snprintf(buf, sizeof buf, "%.17g", lf.fit.params.B);
        out << buf << ',' << (lf.label == FitClass::class_I ? "I" : "II") << ',';
        std::snprintf(buf, sizeof buf, "%.6f", lf.nearest_rebound_distance);
        out << buf << '\n';
    }
}

} // namespace rebound
