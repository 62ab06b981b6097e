// pybind11 module `_core`. Dates cross the boundary as ISO strings.
#include "rebound/errors.hpp"
#include "rebound/evaluation.hpp"
#include "rebound/extrema.hpp"
#include "rebound/fit.hpp"
#include "rebound/lppl.hpp"
#include "rebound/pattern.hpp"
#include "rebound/pipeline.hpp"
#include "rebound/synth.hpp"
#include "rebound/timeseries.hpp"
#include "rebound/windows.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

namespace py = pybind11;
using namespace rebound;

namespace {

using DateList = std::vector<std::string>;

PriceSeries make_series(const DateList& dates, const std::vector<double>& prices) {
    std::vector<Date> ds;
    ds.reserve(dates.size());
    for (const auto& d : dates) ds.push_back(parse_date(d));
    return PriceSeries(std::move(ds), prices);
}

DateList iso(const std::vector<Date>& ds) {
    DateList out;
    out.reserve(ds.size());
    for (auto d : ds) out.push_back(format_date(d));
    return out;
}

DateList event_dates(const EventSet& ev) {
    DateList out;
    for (const auto& d : ev.days) out.push_back(format_date(d.date));
    return out;
}

py::dict fit_dict(const FitResult& f) {
    py::dict d;
    d["t1"] = format_date(f.window.t1);
    d["t2"] = format_date(f.window.t2);
    d["A"] = f.params.A;
    d["B"] = f.params.B;
    d["C"] = f.params.C;
    d["m"] = f.params.m;
    d["tc"] = f.params.tc;
    d["tc_date"] = format_date(date_from_day_number(f.params.tc));
    d["omega"] = f.params.omega;
    d["phi"] = f.params.phi;
    d["rmse"] = f.rmse;
    d["n_points"] = f.n_points;
    d["converged"] = f.converged;
    d["n_restarts_used"] = f.n_restarts_used;
    d["at_bound"] = f.at_bound;
    d["bubble"] = std::string(to_string(classify_bubble_sign(f)));
    return d;
}

SearchConfig search_config(const std::string& model, std::uint64_t seed, int n_candidates, int n_starts,
                           int max_evals) {
    SearchConfig s;
    s.model = parse_model_kind(model);
    s.seed = seed;
    s.n_candidates = n_candidates;
    s.n_starts = n_starts;
    s.max_evals = max_evals;
    s.validate();
    return s;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "LPPL negative-bubble detection core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    m.def("day_number", [](const std::string& d) { return day_number(parse_date(d)); });
    m.def("date_from_day_number", [](double t) { return format_date(date_from_day_number(t)); });

    m.def(
        "generate_windows",
        [](const std::string& t10, const std::string& t20, int dt1, int dt2, int dt_min, int dt_max) {
            GridConfig g{parse_date(t10), parse_date(t20), dt1, dt2, dt_min, dt_max};
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& w : generate_windows(g)) out.emplace_back(format_date(w.t1), format_date(w.t2));
            return out;
        },
        py::arg("t10") = "1950-01-03", py::arg("t20") = "2009-06-03", py::arg("dt1") = 50, py::arg("dt2") = 50,
        py::arg("dt_min") = 110, py::arg("dt_max") = 1500);

    m.def(
        "count_windows",
        [](const std::string& t10, const std::string& t20, int dt1, int dt2, int dt_min, int dt_max) {
            return count_windows(GridConfig{parse_date(t10), parse_date(t20), dt1, dt2, dt_min, dt_max});
        },
        py::arg("t10") = "1950-01-03", py::arg("t20") = "2009-06-03", py::arg("dt1") = 50, py::arg("dt2") = 50,
        py::arg("dt_min") = 110, py::arg("dt_max") = 1500);

    m.def(
        "eval_power_law", [](double A, double B, double mm, double tc, double t) {
            return eval_power_law(PowerLawParams{A, B, mm, tc}, t);
        },
        py::arg("A"), py::arg("B"), py::arg("m"), py::arg("tc"), py::arg("t"));

    m.def(
        "eval_lppl",
        [](double A, double B, double C, double mm, double tc, double omega, double phi, double t) {
            return eval_lppl(LpplParams{A, B, C, mm, tc, omega, phi}, t);
        },
        py::arg("A"), py::arg("B"), py::arg("C"), py::arg("m"), py::arg("tc"), py::arg("omega"), py::arg("phi"),
        py::arg("t"));

    m.def(
        "fit_window",
        [](const DateList& dates, const std::vector<double>& prices, const std::string& t1, const std::string& t2,
           const std::string& model, std::uint64_t seed, int n_candidates, int n_starts, int max_evals) {
            const auto series = make_series(dates, prices);
            const Window w{parse_date(t1), parse_date(t2)};
            const auto cfg = search_config(model, seed, n_candidates, n_starts, max_evals);
            FitResult f;
            {
                py::gil_scoped_release release;
                f = fit_window(series, w, cfg);
            }
            return fit_dict(f);
        },
        py::arg("dates"), py::arg("prices"), py::arg("t1"), py::arg("t2"), py::arg("model") = "lppl",
        py::arg("seed") = SearchConfig{}.seed, py::arg("n_candidates") = SearchConfig{}.n_candidates,
        py::arg("n_starts") = SearchConfig{}.n_starts, py::arg("max_evals") = SearchConfig{}.max_evals);

    m.def(
        "detect_rebounds",
        [](const DateList& dates, const std::vector<double>& prices, int radius) {
            return event_dates(detect_rebounds(make_series(dates, prices), radius));
        },
        py::arg("dates"), py::arg("prices"), py::arg("radius") = 200);

    m.def(
        "detect_peaks",
        [](const DateList& dates, const std::vector<double>& prices, int radius) {
            return event_dates(detect_peaks(make_series(dates, prices), radius));
        },
        py::arg("dates"), py::arg("prices"), py::arg("radius") = 200);

    m.def(
        "detect_crashes",
        [](const DateList& dates, const std::vector<double>& prices, double drop, int horizon) {
            return event_dates(detect_crashes(make_series(dates, prices), drop, horizon));
        },
        py::arg("dates"), py::arg("prices"), py::arg("drop") = 0.15, py::arg("horizon") = 21);

    m.def(
        "alarm_ratio",
        [](std::size_t nu_I, std::size_t nu_II) { return alarm_ratio(FeatureCounts{nu_I, nu_II}); },
        py::arg("nu_I"), py::arg("nu_II"));

    m.def(
        "error_diagram",
        [](const DateList& dates, const std::vector<double>& ri, const DateList& rebound_dates, int duration) {
            if (dates.size() != ri.size()) throw ConfigError("dates and ri differ in length");
            std::vector<AlarmPoint> pts;
            pts.reserve(dates.size());
            for (std::size_t i = 0; i < dates.size(); ++i) pts.push_back({{parse_date(dates[i]), i}, ri[i]});
            EventSet rebounds;
            for (const auto& r : rebound_dates) {
                const Date d = parse_date(r);
                auto it = std::find_if(pts.begin(), pts.end(), [&](const AlarmPoint& p) { return p.day.date == d; });
                if (it != pts.end()) rebounds.days.push_back(it->day);
            }
            std::vector<std::tuple<double, double, double>> out;
            for (const auto& p : error_diagram(pts, rebounds, duration))
                out.emplace_back(p.threshold, p.alarm_fraction, p.miss_fraction);
            return out;
        },
        py::arg("dates"), py::arg("ri"), py::arg("rebound_dates"), py::arg("duration") = 40);

    m.def(
        "skill_summary",
        [](const std::vector<std::tuple<double, double, double>>& curve) {
            std::vector<ErrorDiagramPoint> pts;
            for (const auto& [t, x, y] : curve) pts.push_back({t, x, y});
            return skill_summary(pts);
        },
        py::arg("curve"));

    m.def("quantile", &quantile, py::arg("values"), py::arg("q"));

    m.def(
        "singularity_trajectory",
        [](double x0, double k, double mm, const std::vector<double>& t) {
            return singularity_trajectory(SingularityParams::from_rate(x0, k, mm), t);
        },
        py::arg("x0"), py::arg("k"), py::arg("m"), py::arg("t"));

    m.def(
        "synth_lppl",
        [](double A, double B, double C, double mm, const std::string& tc, double omega, double phi,
           const std::string& start, const std::string& end, double noise_sigma, std::uint64_t seed) {
            SynthSpec spec;
            spec.model = C == 0.0 ? SynthModel::power_law : SynthModel::lppl;
            spec.lppl = {A, B, C, mm, day_number(parse_date(tc)), omega, phi};
            spec.start = parse_date(start);
            spec.end = parse_date(end);
            spec.noise_sigma = noise_sigma;
            spec.seed = seed;
            const auto s = synth_lppl_series(spec);
            return std::make_pair(iso(s.series.dates()), s.series.prices());
        },
        py::arg("A"), py::arg("B"), py::arg("C"), py::arg("m"), py::arg("tc"), py::arg("omega"), py::arg("phi"),
        py::arg("start") = "2000-01-03", py::arg("end") = "2002-12-31", py::arg("noise_sigma") = 0.0,
        py::arg("seed") = 1);

    m.def(
        "plant_rebound_course",
        [](int n_bubbles, int spacing, double noise_sigma, std::uint64_t seed, int radius) {
            CourseConfig cc;
            cc.n_bubbles = n_bubbles;
            cc.spacing = spacing;
            cc.noise_sigma = noise_sigma;
            cc.seed = seed;
            cc.radius = radius;
            const auto c = plant_rebound_course(cc);
            DateList troughs;
            for (const auto& t : c.troughs) troughs.push_back(format_date(t.date));
            return std::make_tuple(iso(c.series.dates()), c.series.prices(), troughs);
        },
        py::arg("n_bubbles") = 6, py::arg("spacing") = 450, py::arg("noise_sigma") = 0.005, py::arg("seed") = 7,
        py::arg("radius") = 200);

    m.def(
        "run_pipeline",
        [](const DateList& dates, const std::vector<double>& prices, const std::string& config_text,
           const std::string& output_dir) {
            RunConfig cfg;
            cfg.apply(parse_config_text(config_text));
            cfg.output_dir = output_dir;
            const auto series = make_series(dates, prices);
            PipelineResult r;
            {
                py::gil_scoped_release release;
                r = run_pipeline(cfg, series);
            }
            py::dict d;
            d["n_windows"] = r.n_windows;
            d["n_fits"] = r.n_fits;
            d["skipped_windows"] = r.skipped_windows;
            d["n_learning_fits"] = r.n_learning_fits;
            d["n_rebounds_in_sample"] = r.n_rebounds_in_sample;
            d["n_rebounds_out_of_sample"] = r.n_rebounds_out_of_sample;
            py::list diagrams;
            for (const auto& s : r.diagrams) {
                py::dict e;
                e["alpha"] = s.alpha;
                e["beta"] = s.beta;
                e["n_features_I"] = s.n_features_I;
                e["n_features_II"] = s.n_features_II;
                e["in_sample_skill"] = s.in_sample_skill;
                e["out_of_sample_skill"] = s.out_of_sample_skill;
                diagrams.append(e);
            }
            d["diagrams"] = diagrams;
            d["config_hash"] = cfg.hash();
            return d;
        },
        py::arg("dates"), py::arg("prices"), py::arg("config_text") = "", py::arg("output_dir") = "rebound_run");
}
