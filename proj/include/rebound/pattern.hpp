/*
 * Class I / Class II pattern recognition and the rebound alarm index.
 *
 * Learning fits whose critical time lies within `delta` days of a realized
 * rebound form Class I, the rest Class II. Every fit is reduced to seven
 * traits (one bin per fit quantity); a trait whose occurrence rate exceeds
 * alpha in one class while staying below beta in the other becomes a
 * feature of that class. The alarm index of a day is the share of Class I
 * feature occurrences among all feature occurrences in fits whose critical
 * time falls near that day.
 */
#pragma once

#include "rebound/extrema.hpp"
#include "rebound/lppl.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rebound {

enum class FitClass { class_I, class_II };

struct LabeledFit {
    FitResult fit;
    FitClass label = FitClass::class_II;
    double nearest_rebound_distance = 0.0;  ///< days; +inf without rebounds
};

/// |tc - rebound date| minimized over `rebounds`; ClassI iff <= delta.
std::vector<LabeledFit> label_fits(std::span<const FitResult> fits, const EventSet& rebounds,
                                   double delta = 20.0);

enum class TraitParameter { m, omega, B, C_over_B, rmse, dt, tc_gap };

inline constexpr std::size_t kTraitParameterCount = 7;
inline constexpr std::array<TraitParameter, kTraitParameterCount> kTraitParameters{
    TraitParameter::m,    TraitParameter::omega, TraitParameter::B,     TraitParameter::C_over_B,
    TraitParameter::rmse, TraitParameter::dt,    TraitParameter::tc_gap};

const char* to_string(TraitParameter p);
TraitParameter parse_trait_parameter(std::string_view text);

/// The fit quantity a trait parameter bins.
double trait_value(const FitResult& fit, TraitParameter p);

struct TraitBinning {
    /// Interior edges per parameter, strictly increasing. k edges give k + 1
    /// bins: (-inf, e0), [e0, e1), ..., [e_{k-1}, +inf).
    std::array<std::vector<double>, kTraitParameterCount> edges;

    std::size_t bin_count(TraitParameter p) const { return edges[index(p)].size() + 1; }
    std::size_t bin(TraitParameter p, double value) const;

    static std::size_t index(TraitParameter p) { return static_cast<std::size_t>(p); }
};

/// Edges at the k/bins pooled-sample quantiles of each fit quantity.
/// Requires at least 10 fits.
TraitBinning build_binning(std::span<const LabeledFit> learning_fits, int bins_per_parameter = 3);
/// Single-column variant used by build_binning.
std::vector<double> quantile_edges(std::vector<double> values, int bins);

struct Trait {
    TraitParameter parameter = TraitParameter::m;
    std::size_t bin = 0;

    friend bool operator==(const Trait&, const Trait&) = default;
    friend auto operator<=>(const Trait&, const Trait&) = default;
};

struct TraitFrequency {
    Trait trait;
    double freq_I = 0.0;
    double freq_II = 0.0;
    bool feature_I = false;
    bool feature_II = false;
};

struct FeatureSet {
    double alpha = 0.0;
    double beta = 0.0;
    TraitBinning binning;
    std::vector<TraitFrequency> frequencies;  ///< every trait, parameter-major order
    std::vector<Trait> features_I;
    std::vector<Trait> features_II;
    std::size_t n_class_I = 0;
    std::size_t n_class_II = 0;
    /// Latest window end among the learning fits (day number).
    double learned_through = 0.0;

    bool is_feature_I(const Trait& t) const;
    bool is_feature_II(const Trait& t) const;
};

/// Traits of one fit under a binning, in kTraitParameters order.
std::array<Trait, kTraitParameterCount> traits_of(const FitResult& fit, const TraitBinning& binning);

/// Throws DataError when either class is empty.
FeatureSet qualify_features(std::span<const LabeledFit> labeled, const TraitBinning& binning,
                            double alpha, double beta);

struct FeatureCounts {
    std::size_t class_I = 0;
    std::size_t class_II = 0;
};

/// Feature occurrences over the fits whose tc lies within `proximity` of `day`.
FeatureCounts count_features(double day, std::span<const FitResult> fits, const FeatureSet& features,
                             double proximity);

/// nu_I / (nu_I + nu_II), or 0 when no feature occurs.
double alarm_ratio(FeatureCounts counts);

double alarm_index(const TradingDay& day, std::span<const FitResult> fits_near_day,
                   const FeatureSet& features, double proximity = 20.0);

struct AlarmConfig {
    std::optional<Date> from;  ///< default: first day of the series
    std::optional<Date> to;    ///< default: last day of the series
    double proximity = 20.0;
    /// Only fits whose window ended on or before the scored day contribute.
    bool causal = true;
    /// Only negative-bubble fits (B > 0) contribute.
    bool negative_bubbles_only = true;
    /// Fits with a parameter pinned at its search bound do not contribute.
    bool exclude_boundary_fits = true;
    /// Reject features learned from windows ending on or after `from`.
    bool out_of_sample = false;
};

struct AlarmPoint {
    TradingDay day;
    double ri = 0.0;
};

std::vector<AlarmPoint> alarm_series(const PriceSeries& series, std::span<const FitResult> fits,
                                     const FeatureSet& features, const AlarmConfig& config);

struct TrainConfig {
    Date split = std::chrono::year{1975} / 1 / 1;
    double delta = 20.0;
    int bins = 3;
    double alpha = 0.5;
    double beta = 0.3;
    int radius = 200;
    bool negative_bubbles_only = true;
    bool exclude_boundary_fits = true;
};

/**
 * Full learning pass: keeps converged fits whose window ends before the
 * split (optionally only negative bubbles and only fits off the search
 * bounds), labels them against rebounds
 * detected on the pre-split data alone, bins, and qualifies features.
 */
FeatureSet train_features(const PriceSeries& series, std::span<const FitResult> fits,
                          const TrainConfig& config);

/// Learning-set selection and labels used by train_features.
std::vector<LabeledFit> learning_set(const PriceSeries& series, std::span<const FitResult> fits,
                                     const TrainConfig& config);

void write_feature_set_json(std::ostream& out, const FeatureSet& features);
FeatureSet read_feature_set_json(std::istream& in);
void write_alarm_csv(std::ostream& out, std::span<const AlarmPoint> series);
std::vector<AlarmPoint> read_alarm_csv(std::istream& in);
void write_labels_csv(std::ostream& out, std::span<const LabeledFit> labeled);

} // namespace rebound
