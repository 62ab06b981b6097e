// Command-line front end: one subcommand per pipeline stage plus `run`.
#include "rebound/errors.hpp"
#include "rebound/evaluation.hpp"
#include "rebound/extrema.hpp"
#include "rebound/fit.hpp"
#include "rebound/pattern.hpp"
#include "rebound/pipeline.hpp"
#include "rebound/synth.hpp"
#include "rebound/timeseries.hpp"
#include "rebound/windows.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

using namespace rebound;

namespace {

struct InputOpts {
    std::string path;
    std::string date_col = "Date";
    std::string price_col = "Adj Close";

    void add(CLI::App* cmd) {
        cmd->add_option("--input,-i", path, "price CSV")->required();
        cmd->add_option("--date-col", date_col, "date column name")->capture_default_str();
        cmd->add_option("--price-col", price_col, "price column name")->capture_default_str();
    }

    PriceSeries load() const {
        auto r = load_csv(path, date_col, price_col);
        if (r.rejected_rows > 0)
            std::cerr << "warning: " << r.rejected_rows << " rows rejected from " << path << '\n';
        return std::move(r.series);
    }
};

struct GridOpts {
    std::string t10, t20;
    GridConfig grid;

    void add(CLI::App* cmd) {
        cmd->add_option("--t10", t10, "first window start (YYYY-MM-DD)");
        cmd->add_option("--t20", t20, "last window end (YYYY-MM-DD)");
        cmd->add_option("--dt1", grid.dt1, "start step, days")->capture_default_str();
        cmd->add_option("--dt2", grid.dt2, "end step, days")->capture_default_str();
        cmd->add_option("--dt-min", grid.dt_min, "shortest window, days")->capture_default_str();
        cmd->add_option("--dt-max", grid.dt_max, "longest window, days")->capture_default_str();
    }

    GridConfig resolve() const {
        GridConfig g = grid;
        if (!t10.empty()) g.t10 = parse_date(t10);
        if (!t20.empty()) g.t20 = parse_date(t20);
        g.validate();
        return g;
    }
};

struct SearchOpts {
    SearchConfig search;
    std::string model = "lppl";
    unsigned workers = 1;

    void add(CLI::App* cmd) {
        cmd->add_option("--model", model, "lppl or power_law")->capture_default_str();
        cmd->add_option("--seed", search.seed, "root seed")->capture_default_str();
        cmd->add_option("--n-candidates", search.n_candidates)->capture_default_str();
        cmd->add_option("--n-starts", search.n_starts)->capture_default_str();
        cmd->add_option("--max-evals", search.max_evals)->capture_default_str();
        cmd->add_option("--min-points", search.min_points)->capture_default_str();
        cmd->add_option("--workers,-j", workers, "worker threads")->capture_default_str();
    }

    SearchConfig resolve() const {
        SearchConfig s = search;
        s.model = parse_model_kind(model);
        s.validate();
        return s;
    }
};

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::function<void(std::ostream&)>& body) {
    if (path.empty() || path == "-") {
        body(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    body(out);
}

std::vector<FitResult> load_fits(const std::string& path) { return load_fits_csv(path); }

FeatureSet load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    return read_feature_set_json(in);
}

std::vector<AlarmPoint> load_alarm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    return read_alarm_csv(in);
}

Window parse_window(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigError("--window expects t1,t2");
    Window w{parse_date(text.substr(0, comma)), parse_date(text.substr(comma + 1))};
    if (w.t2 <= w.t1) throw ConfigError("--window: t2 must follow t1");
    return w;
}

std::vector<double> parse_thresholds(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("--thresholds: bad value '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("--thresholds: empty list");
    return out;
}

nlohmann::json fit_json(const FitResult& f) {
    const auto& p = f.params;
    return {{"t1", format_date(f.window.t1)},
            {"t2", format_date(f.window.t2)},
            {"A", p.A}, {"B", p.B}, {"C", p.C}, {"m", p.m}, {"tc", p.tc},
            {"tc_date", format_date(date_from_day_number(p.tc))},
            {"omega", p.omega}, {"phi", p.phi},
            {"rmse", f.rmse},
            {"n_points", f.n_points},
            {"converged", f.converged},
            {"n_restarts_used", f.n_restarts_used},
            {"at_bound", f.at_bound},
            {"bubble", to_string(classify_bubble_sign(f))}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Negative-bubble (rebound) detection with LPPL fits"};
    app.require_subcommand(1);
    std::function<void()> action;

    // windows
    GridOpts win_grid;
    std::string win_out;
    bool win_count_only = false;
    auto* c_windows = app.add_subcommand("windows", "generate the (t1, t2) window grid");
    win_grid.add(c_windows);
    c_windows->add_option("--out,-o", win_out, "CSV destination (default stdout)");
    c_windows->add_flag("--count", win_count_only, "print only the window count");
    c_windows->callback([&] {
        action = [&] {
            const auto g = win_grid.resolve();
            if (win_count_only) {
                std::cout << count_windows(g) << '\n';
                return;
            }
            const auto ws = generate_windows(g);
            emit(win_out, [&](std::ostream& o) { write_windows_csv(o, ws); });
            std::cerr << ws.size() << " windows\n";
        };
    });

    // scan
    InputOpts scan_in;
    GridOpts scan_grid;
    SearchOpts scan_search;
    std::string scan_out;
    bool scan_jsonl = false;
    auto* c_scan = app.add_subcommand("scan", "fit every window of the grid");
    scan_in.add(c_scan);
    scan_grid.add(c_scan);
    scan_search.add(c_scan);
    c_scan->add_option("--out,-o", scan_out, "fits destination (default stdout)");
    c_scan->add_flag("--jsonl", scan_jsonl, "JSON lines instead of CSV");
    c_scan->callback([&] {
        action = [&] {
            const auto series = scan_in.load();
            const auto ws = generate_windows(scan_grid.resolve());
            const auto report = scan_windows(series, ws, scan_search.resolve(), scan_search.workers);
            emit(scan_out, [&](std::ostream& o) {
                if (scan_jsonl) write_fits_jsonl(o, report.fits);
                else write_fits_csv(o, report.fits);
            });
            std::cerr << report.fits.size() << " fits, " << report.skipped_windows << " windows skipped\n";
        };
    });

    // fit
    InputOpts fit_in;
    SearchOpts fit_search;
    std::string fit_window_text;
    auto* c_fit = app.add_subcommand("fit", "fit a single window and print JSON");
    fit_in.add(c_fit);
    fit_search.add(c_fit);
    c_fit->add_option("--window,-w", fit_window_text, "t1,t2")->required();
    c_fit->callback([&] {
        action = [&] {
            const auto series = fit_in.load();
            const auto f = fit_window(series, parse_window(fit_window_text), fit_search.resolve());
            std::cout << fit_json(f).dump(2) << '\n';
        };
    });

    // rebounds / peaks
    InputOpts ext_in;
    int ext_radius = 200;
    bool ext_peaks = false;
    std::string ext_out;
    auto* c_reb = app.add_subcommand("rebounds", "days that are the minimum of their +-radius neighbourhood");
    ext_in.add(c_reb);
    c_reb->add_option("--radius", ext_radius, "trading days")->capture_default_str();
    c_reb->add_flag("--peaks", ext_peaks, "report maxima instead");
    c_reb->add_option("--out,-o", ext_out);
    c_reb->callback([&] {
        action = [&] {
            const auto series = ext_in.load();
            const auto ev = ext_peaks ? detect_peaks(series, ext_radius) : detect_rebounds(series, ext_radius);
            emit(ext_out, [&](std::ostream& o) { write_events_csv(o, ev); });
        };
    });

    // crashes
    InputOpts cr_in;
    double cr_drop = 0.15;
    int cr_horizon = 21;
    std::string cr_out;
    auto* c_cr = app.add_subcommand("crashes", "local maxima followed by a fast drop");
    cr_in.add(c_cr);
    c_cr->add_option("--drop", cr_drop, "fractional fall")->capture_default_str();
    c_cr->add_option("--horizon", cr_horizon, "calendar days")->capture_default_str();
    c_cr->add_option("--out,-o", cr_out);
    c_cr->callback([&] {
        action = [&] {
            const auto series = cr_in.load();
            emit(cr_out, [&](std::ostream& o) { write_events_csv(o, detect_crashes(series, cr_drop, cr_horizon)); });
        };
    });

    // train
    InputOpts tr_in;
    std::string tr_fits, tr_split = "1975-01-01", tr_out, tr_labels;
    TrainConfig tr;
    bool tr_all_signs = false, tr_keep_boundary = false;
    auto* c_tr = app.add_subcommand("train", "learn Class I / Class II features from fits");
    tr_in.add(c_tr);
    c_tr->add_option("--fits", tr_fits, "fits CSV from `scan`")->required();
    c_tr->add_option("--split", tr_split, "learning cutoff date")->capture_default_str();
    c_tr->add_option("--alpha", tr.alpha)->capture_default_str();
    c_tr->add_option("--beta", tr.beta)->capture_default_str();
    c_tr->add_option("--delta", tr.delta, "Class I tolerance, days")->capture_default_str();
    c_tr->add_option("--bins", tr.bins, "bins per parameter")->capture_default_str();
    c_tr->add_option("--radius", tr.radius)->capture_default_str();
    c_tr->add_flag("--all-signs", tr_all_signs, "keep positive-bubble fits");
    c_tr->add_flag("--keep-boundary", tr_keep_boundary, "keep fits pinned at a search bound");
    c_tr->add_option("--labels", tr_labels, "also write the labeled learning set");
    c_tr->add_option("--out,-o", tr_out, "feature JSON destination");
    c_tr->callback([&] {
        action = [&] {
            const auto series = tr_in.load();
            const auto fits = load_fits(tr_fits);
            TrainConfig cfg = tr;
            cfg.split = parse_date(tr_split);
            cfg.negative_bubbles_only = !tr_all_signs;
            cfg.exclude_boundary_fits = !tr_keep_boundary;
            if (!tr_labels.empty()) {
                const auto labeled = learning_set(series, fits, cfg);
                emit(tr_labels, [&](std::ostream& o) { write_labels_csv(o, labeled); });
            }
            const auto features = train_features(series, fits, cfg);
            emit(tr_out, [&](std::ostream& o) { write_feature_set_json(o, features); });
            std::cerr << features.features_I.size() << " Class I features, " << features.features_II.size()
                      << " Class II features\n";
        };
    });

    // alarm
    InputOpts al_in;
    std::string al_fits, al_features, al_from, al_to, al_out;
    AlarmConfig al;
    bool al_oos = false, al_all_signs = false, al_keep_boundary = false, al_noncausal = false;
    auto* c_al = app.add_subcommand("alarm", "daily alarm index");
    al_in.add(c_al);
    c_al->add_option("--fits", al_fits)->required();
    c_al->add_option("--features", al_features, "feature JSON from `train`")->required();
    c_al->add_option("--from", al_from);
    c_al->add_option("--to", al_to);
    c_al->add_option("--proximity", al.proximity, "days")->capture_default_str();
    c_al->add_flag("--out-of-sample", al_oos, "refuse features learned on or after --from");
    c_al->add_flag("--all-signs", al_all_signs);
    c_al->add_flag("--keep-boundary", al_keep_boundary);
    c_al->add_flag("--non-causal", al_noncausal, "let fits from later windows score a day");
    c_al->add_option("--out,-o", al_out);
    c_al->callback([&] {
        action = [&] {
            const auto series = al_in.load();
            AlarmConfig cfg = al;
            if (!al_from.empty()) cfg.from = parse_date(al_from);
            if (!al_to.empty()) cfg.to = parse_date(al_to);
            cfg.out_of_sample = al_oos;
            cfg.negative_bubbles_only = !al_all_signs;
            cfg.exclude_boundary_fits = !al_keep_boundary;
            cfg.causal = !al_noncausal;
            const auto ri = alarm_series(series, load_fits(al_fits), load_features(al_features), cfg);
            emit(al_out, [&](std::ostream& o) { write_alarm_csv(o, ri); });
        };
    });

    // error-diagram
    InputOpts ed_in;
    std::string ed_alarm, ed_thresholds = "auto", ed_out, ed_plot;
    int ed_duration = 40, ed_radius = 200;
    auto* c_ed = app.add_subcommand("error-diagram", "alarm fraction vs failure to predict");
    ed_in.add(c_ed);
    c_ed->add_option("--alarm", ed_alarm, "alarm CSV from `alarm`")->required();
    c_ed->add_option("--duration", ed_duration, "trading days per alarm")->capture_default_str();
    c_ed->add_option("--thresholds", ed_thresholds, "auto or comma list")->capture_default_str();
    c_ed->add_option("--radius", ed_radius, "rebound radius")->capture_default_str();
    c_ed->add_option("--out,-o", ed_out);
    c_ed->add_option("--plot", ed_plot, "gnuplot-ready data file");
    c_ed->callback([&] {
        action = [&] {
            const auto series = ed_in.load();
            const auto ri = load_alarm(ed_alarm);
            if (ri.empty()) throw DataError("alarm file is empty");
            const auto rebounds = detect_rebounds(series, ed_radius);
            std::vector<AlarmPoint> aligned;
            aligned.reserve(ri.size());
            for (const auto& p : ri) {
                const auto i = series.lower_index(p.day.date);
                if (i == series.size() || series.date(i) != p.day.date)
                    throw DataError("alarm date " + format_date(p.day.date) + " not in series");
                aligned.push_back({series.day(i), p.ri});
            }
            const auto pts = ed_thresholds == "auto"
                                 ? error_diagram(aligned, rebounds, ed_duration)
                                 : error_diagram(aligned, rebounds, parse_thresholds(ed_thresholds), ed_duration);
            emit(ed_out, [&](std::ostream& o) { write_error_diagram_csv(o, pts); });
            if (!ed_plot.empty()) emit(ed_plot, [&](std::ostream& o) { write_error_diagram_plot(o, pts); });
            std::cerr << "skill " << skill_summary(pts) << '\n';
        };
    });

    // synth
    SynthSpec sy;
    std::string sy_model = "lppl", sy_start = "2000-01-03", sy_end = "2002-12-31", sy_out, sy_tc;
    int sy_course = 0;
    CourseConfig course;
    double sy_k = 0.0;
    sy.lppl = {.A = 7.0, .B = -0.01, .C = 0.001, .m = 0.5, .tc = 0.0, .omega = 8.0, .phi = 1.0};
    auto* c_sy = app.add_subcommand("synth", "synthetic series with known parameters");
    c_sy->add_option("--model", sy_model, "lppl, power_law or singularity_ode")->capture_default_str();
    c_sy->add_option("--A", sy.lppl.A)->capture_default_str();
    c_sy->add_option("--B", sy.lppl.B)->capture_default_str();
    c_sy->add_option("--C", sy.lppl.C)->capture_default_str();
    c_sy->add_option("--m", sy.lppl.m)->capture_default_str();
    c_sy->add_option("--omega", sy.lppl.omega)->capture_default_str();
    c_sy->add_option("--phi", sy.lppl.phi)->capture_default_str();
    c_sy->add_option("--tc", sy_tc, "critical date (default: 30 days after --end)");
    c_sy->add_option("--x0", sy.singularity.x0, "singularity start value")->capture_default_str();
    c_sy->add_option("--exponent", sy.singularity.m, "singularity exponent > 1")->capture_default_str();
    c_sy->add_option("--k", sy_k, "singularity rate (sets tc)");
    c_sy->add_option("--start", sy_start)->capture_default_str();
    c_sy->add_option("--end", sy_end)->capture_default_str();
    c_sy->add_option("--noise", sy.noise_sigma, "log-price noise sigma")->capture_default_str();
    c_sy->add_option("--seed", sy.seed)->capture_default_str();
    c_sy->add_option("--course", sy_course, "plant N negative bubbles instead");
    c_sy->add_option("--spacing", course.spacing, "trading days between planted troughs")->capture_default_str();
    c_sy->add_option("--out,-o", sy_out, "CSV path; truth goes to <path>.truth.json")->required();
    c_sy->callback([&] {
        action = [&] {
            nlohmann::json truth;
            std::optional<PriceSeries> series;
            if (sy_course > 0) {
                CourseConfig cc = course;
                cc.n_bubbles = sy_course;
                cc.noise_sigma = sy.noise_sigma;
                cc.seed = sy.seed;
                cc.start = parse_date(sy_start);
                auto c = plant_rebound_course(cc);
                series.emplace(std::move(c.series));
                truth["model"] = "rebound_course";
                truth["troughs"] = nlohmann::json::array();
                for (const auto& t : c.troughs) truth["troughs"].push_back(format_date(t.date));
                truth["noise_sigma"] = cc.noise_sigma;
                truth["seed"] = cc.seed;
            } else {
                SynthSpec spec = sy;
                spec.model = parse_synth_model(sy_model);
                spec.start = parse_date(sy_start);
                spec.end = parse_date(sy_end);
                spec.lppl.tc = sy_tc.empty() ? day_number(spec.end) + 30.0 : day_number(parse_date(sy_tc));
                if (sy_k > 0.0) {
                    const double m = spec.singularity.m;
                    spec.singularity = SingularityParams::from_rate(spec.singularity.x0, sy_k, m);
                }
                auto s = synth_lppl_series(spec);
                series.emplace(std::move(s.series));
                std::ostringstream t;
                write_truth_json(t, s.truth);
                truth = nlohmann::json::parse(t.str());
            }
            save_csv(sy_out, *series);
            emit(sy_out + ".truth.json", [&](std::ostream& o) { o << truth.dump(2) << '\n'; });
        };
    });

    // run
    std::string run_config, run_input, run_output;
    std::vector<std::string> run_sets;
    auto* c_run = app.add_subcommand("run", "full pipeline from a config file");
    c_run->add_option("--config,-c", run_config, "key = value file");
    c_run->add_option("--set", run_sets, "key=value override (repeatable)");
    c_run->add_option("--input,-i", run_input);
    c_run->add_option("--output,-o", run_output, "artifact directory");
    c_run->callback([&] {
        action = [&] {
            RunConfig cfg = run_config.empty() ? RunConfig{} : load_run_config(run_config);
            std::string overrides;
            for (const auto& s : run_sets) overrides += s + '\n';
            cfg.apply(parse_config_text(overrides));
            if (!run_input.empty()) cfg.input = run_input;
            if (!run_output.empty()) cfg.output_dir = run_output;
            if (cfg.input.empty()) throw ConfigError("no input series (--input or `input =` in the config)");
            const auto r = run_pipeline(cfg);
            std::printf("windows %zu  fits %zu  skipped %zu  learning fits %zu\n", r.n_windows, r.n_fits,
                        r.skipped_windows, r.n_learning_fits);
            std::printf("rebounds in-sample %zu  out-of-sample %zu\n", r.n_rebounds_in_sample,
                        r.n_rebounds_out_of_sample);
            for (const auto& d : r.diagrams)
                std::printf("alpha %.2f beta %.2f  features I/II %zu/%zu  skill in %.3f out %.3f\n", d.alpha,
                            d.beta, d.n_features_I, d.n_features_II, d.in_sample_skill, d.out_of_sample_skill);
            std::printf("artifacts in %s\n", cfg.output_dir.string().c_str());
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        action();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
