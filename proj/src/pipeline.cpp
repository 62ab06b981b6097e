#include "rebound/pipeline.hpp"

#include "rebound/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rebound {

namespace {

// Shortest text that reads back to the same double.
std::string fmt(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string short_fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::logic_error&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != static_cast<double>(static_cast<long>(d)))
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    return static_cast<long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

Date to_date(const std::string& key, const std::string& v) {
    try {
        return parse_date(v);
    } catch (const DataError& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

std::vector<std::pair<double, double>> to_alpha_beta(const std::string& key, const std::string& v) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("config key '" + key + "': expected alpha:beta pairs, got '" + item + "'");
        out.emplace_back(to_double(key, item.substr(0, colon)), to_double(key, item.substr(colon + 1)));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
    return out;
}

std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Runs one stage, prefixing any library error with the stage name.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        rethrow_in_stage(name, e);
    } catch (const DataError& e) {
        rethrow_in_stage(name, e);
    } catch (const NumericalError& e) {
        rethrow_in_stage(name, e);
    }
}

// Config listing without output_dir and workers, so runs into different
// directories or on different thread counts produce identical artifacts.
std::string portable_config_text(const RunConfig& config) {
    std::istringstream in(config.to_text());
    std::string out;
    for (std::string line; std::getline(in, line);)
        if (line.rfind("output_dir =", 0) != 0 && line.rfind("workers =", 0) != 0) out += line + '\n';
    return out;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& w) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    w(out);
}

} // namespace

void RunConfig::validate() const {
    grid.validate();
    search.validate();
    if (delta < 0.0) throw ConfigError("delta must be non-negative");
    if (bins < 1) throw ConfigError("bins must be at least 1");
    if (alpha_beta.empty()) throw ConfigError("at least one alpha:beta pair is required");
    for (const auto& [a, b] : alpha_beta)
        if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0)) throw ConfigError("alpha and beta must lie in [0, 1]");
    if (radius < 1) throw ConfigError("radius must be at least 1");
    if (duration < 0) throw ConfigError("duration must be non-negative");
}

std::string RunConfig::to_text() const {
    std::ostringstream o;
    o << "t10 = " << format_date(grid.t10) << '\n'
      << "t20 = " << format_date(grid.t20) << '\n'
      << "dt1 = " << grid.dt1 << '\n'
      << "dt2 = " << grid.dt2 << '\n'
      << "dt_min = " << grid.dt_min << '\n'
      << "dt_max = " << grid.dt_max << '\n'
      << "model = " << to_string(search.model) << '\n'
      << "m_min = " << fmt(search.m_min) << '\n'
      << "m_max = " << fmt(search.m_max) << '\n'
      << "omega_min = " << fmt(search.omega_min) << '\n'
      << "omega_max = " << fmt(search.omega_max) << '\n'
      << "tc_horizon = " << fmt(search.tc_horizon) << '\n'
      << "n_candidates = " << search.n_candidates << '\n'
      << "n_starts = " << search.n_starts << '\n'
      << "max_evals = " << search.max_evals << '\n'
      << "min_points = " << search.min_points << '\n'
      << "seed = " << search.seed << '\n'
      << "delta = " << fmt(delta) << '\n'
      << "bins = " << bins << '\n'
      << "alpha_beta = ";
    for (std::size_t i = 0; i < alpha_beta.size(); ++i)
        o << (i ? "," : "") << fmt(alpha_beta[i].first) << ':' << fmt(alpha_beta[i].second);
    o << '\n'
      << "split = " << format_date(split) << '\n'
      << "radius = " << radius << '\n'
      << "negative_bubbles_only = " << (negative_bubbles_only ? "true" : "false") << '\n'
      << "exclude_boundary_fits = " << (exclude_boundary_fits ? "true" : "false") << '\n'
      << "causal = " << (causal ? "true" : "false") << '\n'
      << "duration = " << duration << '\n'
      << "# io\n"
      << "input = " << input.string() << '\n'
      << "date_column = " << date_column << '\n'
      << "price_column = " << price_column << '\n'
      << "output_dir = " << output_dir.string() << '\n'
      << "workers = " << workers << '\n';
    return o.str();
}

void RunConfig::apply(const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) {
        if (k == "t10") grid.t10 = to_date(k, v);
        else if (k == "t20") grid.t20 = to_date(k, v);
        else if (k == "dt1") grid.dt1 = static_cast<int>(to_long(k, v));
        else if (k == "dt2") grid.dt2 = static_cast<int>(to_long(k, v));
        else if (k == "dt_min") grid.dt_min = static_cast<int>(to_long(k, v));
        else if (k == "dt_max") grid.dt_max = static_cast<int>(to_long(k, v));
        else if (k == "model") search.model = parse_model_kind(v);
        else if (k == "m_min") search.m_min = to_double(k, v);
        else if (k == "m_max") search.m_max = to_double(k, v);
        else if (k == "omega_min") search.omega_min = to_double(k, v);
        else if (k == "omega_max") search.omega_max = to_double(k, v);
        else if (k == "tc_horizon") search.tc_horizon = to_double(k, v);
        else if (k == "n_candidates") search.n_candidates = static_cast<int>(to_long(k, v));
        else if (k == "n_starts") search.n_starts = static_cast<int>(to_long(k, v));
        else if (k == "max_evals") search.max_evals = static_cast<int>(to_long(k, v));
        else if (k == "min_points") search.min_points = static_cast<std::size_t>(to_long(k, v));
        else if (k == "seed") {
            try {
                std::size_t used = 0;
                search.seed = std::stoull(v, &used);
                if (used != v.size()) throw std::invalid_argument(v);
            } catch (const std::logic_error&) {
                throw ConfigError("config key 'seed': expected an unsigned integer, got '" + v + "'");
            }
        }
        else if (k == "delta") delta = to_double(k, v);
        else if (k == "bins") bins = static_cast<int>(to_long(k, v));
        else if (k == "alpha_beta") alpha_beta = to_alpha_beta(k, v);
        else if (k == "split") split = to_date(k, v);
        else if (k == "radius") radius = static_cast<int>(to_long(k, v));
        else if (k == "negative_bubbles_only") negative_bubbles_only = to_bool(k, v);
        else if (k == "exclude_boundary_fits") exclude_boundary_fits = to_bool(k, v);
        else if (k == "causal") causal = to_bool(k, v);
        else if (k == "duration") duration = static_cast<int>(to_long(k, v));
        else if (k == "input") input = v;
        else if (k == "date_column") date_column = v;
        else if (k == "price_column") price_column = v;
        else if (k == "output_dir") output_dir = v;
        else if (k == "workers") workers = static_cast<unsigned>(to_long(k, v));
        else throw ConfigError("unknown config key '" + k + "'");
    }
}

std::string RunConfig::hash() const {
    const std::string text = to_text();
    const std::string scientific = text.substr(0, text.find("# io\n"));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : scientific) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
    std::map<std::string, std::string> out;
    std::istringstream in{std::string(text)};
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg;
    cfg.apply(parse_config_text(ss.str()));
    return cfg;
}

TrainConfig train_config(const RunConfig& config, double alpha, double beta) {
    TrainConfig t;
    t.split = config.split;
    t.delta = config.delta;
    t.bins = config.bins;
    t.alpha = alpha;
    t.beta = beta;
    t.radius = config.radius;
    t.negative_bubbles_only = config.negative_bubbles_only;
    t.exclude_boundary_fits = config.exclude_boundary_fits;
    return t;
}

PipelineResult run_pipeline(const RunConfig& config, const PriceSeries& series) {
    stage("config", [&] { config.validate(); });
    if (!(config.split > series.first_date() && config.split <= series.last_date()))
        throw ConfigError("config: split " + format_date(config.split) + " must fall inside the data range " +
                          format_date(series.first_date()) + ".." + format_date(series.last_date()));
    const auto& dir = config.output_dir;
    std::filesystem::create_directories(dir);

    PipelineResult result;
    const auto windows = stage("windows", [&] { return generate_windows(config.grid); });
    result.n_windows = windows.size();
    const auto scan = stage("scan", [&] { return scan_windows(series, windows, config.search, config.workers); });
    result.n_fits = scan.fits.size();
    result.skipped_windows = scan.skipped_windows;
    write_file(dir / "fits.csv", [&](std::ostream& o) { write_fits_csv(o, scan.fits); });

    const auto rebounds = stage("rebounds", [&] { return detect_rebounds(series, config.radius); });
    write_file(dir / "rebounds.csv", [&](std::ostream& o) { write_events_csv(o, rebounds); });

    const Date last_in_sample = config.split - std::chrono::days{1};
    const auto in_span = [&](Date lo, Date hi) {
        EventSet s{EventKind::rebound, {}, rebounds.rule};
        for (const auto& d : rebounds.days)
            if (d.date >= lo && d.date <= hi) s.days.push_back(d);
        return s;
    };
    const EventSet rebounds_in = in_span(series.first_date(), last_in_sample);
    const EventSet rebounds_out = in_span(config.split, series.last_date());
    result.n_rebounds_in_sample = rebounds_in.days.size();
    result.n_rebounds_out_of_sample = rebounds_out.days.size();

    const auto labeled = stage("label", [&] {
        return learning_set(series, scan.fits, train_config(config, config.alpha_beta.front().first,
                                                             config.alpha_beta.front().second));
    });
    result.n_learning_fits = labeled.size();
    write_file(dir / "labels.csv", [&](std::ostream& o) { write_labels_csv(o, labeled); });
    const auto binning = stage("train", [&] { return build_binning(labeled, config.bins); });

    for (const auto& [alpha, beta] : config.alpha_beta) {
        const std::string tag = "a" + short_fmt(alpha) + "_b" + short_fmt(beta);
        DiagramSummary summary;
        summary.alpha = alpha;
        summary.beta = beta;
        const auto features = stage("train", [&] { return qualify_features(labeled, binning, alpha, beta); });
        summary.n_features_I = features.features_I.size();
        summary.n_features_II = features.features_II.size();
        write_file(dir / ("features_" + tag + ".json"), [&](std::ostream& o) { write_feature_set_json(o, features); });

        AlarmConfig in_cfg;
        in_cfg.to = last_in_sample;
        in_cfg.proximity = config.delta;
        in_cfg.causal = config.causal;
        in_cfg.negative_bubbles_only = config.negative_bubbles_only;
        in_cfg.exclude_boundary_fits = config.exclude_boundary_fits;
        AlarmConfig out_cfg = in_cfg;
        out_cfg.from = config.split;
        out_cfg.to = std::nullopt;
        out_cfg.out_of_sample = true;

        const auto ri_in = stage("alarm (in-sample)", [&] { return alarm_series(series, scan.fits, features, in_cfg); });
        const auto ri_out =
            stage("alarm (out-of-sample)", [&] { return alarm_series(series, scan.fits, features, out_cfg); });
        write_file(dir / ("alarm_in_sample_" + tag + ".csv"), [&](std::ostream& o) { write_alarm_csv(o, ri_in); });
        write_file(dir / ("alarm_out_of_sample_" + tag + ".csv"), [&](std::ostream& o) { write_alarm_csv(o, ri_out); });

        summary.in_sample =
            stage("error diagram (in-sample)", [&] { return error_diagram(ri_in, rebounds_in, config.duration); });
        summary.out_of_sample =
            stage("error diagram (out-of-sample)", [&] { return error_diagram(ri_out, rebounds_out, config.duration); });
        summary.in_sample_skill = skill_summary(summary.in_sample);
        summary.out_of_sample_skill = skill_summary(summary.out_of_sample);
        for (const auto& [name, pts] : {std::pair{"in_sample", &summary.in_sample},
                                        std::pair{"out_of_sample", &summary.out_of_sample}}) {
            const std::string base = std::string("error_diagram_") + name + "_" + tag;
            write_file(dir / (base + ".csv"), [&](std::ostream& o) { write_error_diagram_csv(o, *pts); });
            write_file(dir / (base + ".plot.dat"), [&](std::ostream& o) { write_error_diagram_plot(o, *pts); });
        }
        result.diagrams.push_back(std::move(summary));
    }

    nlohmann::ordered_json m;
    m["config_hash"] = config.hash();
    m["seed"] = config.search.seed;
    m["config"] = portable_config_text(config);
    m["window_grid"] = {{"count", result.n_windows},
                        {"convention",
                         "t1 = t10 + i*dt1 ascending, t2 = t20 - j*dt2 descending, "
                         "dt_min <= t2 - t1 <= dt_max inclusive"},
                        {"t10", format_date(config.grid.t10)},
                        {"t20", format_date(config.grid.t20)}};
    m["series"] = {{"first", format_date(series.first_date())},
                   {"last", format_date(series.last_date())},
                   {"n_days", series.size()}};
    m["fits"] = {{"count", result.n_fits}, {"skipped_windows", result.skipped_windows},
                 {"learning_fits", result.n_learning_fits}};
    m["rebounds"] = {{"in_sample", result.n_rebounds_in_sample}, {"out_of_sample", result.n_rebounds_out_of_sample}};
    nlohmann::ordered_json diagrams = nlohmann::ordered_json::array();
    for (const auto& d : result.diagrams) {
        diagrams.push_back({{"alpha", d.alpha},
                            {"beta", d.beta},
                            {"features_I", d.n_features_I},
                            {"features_II", d.n_features_II},
                            {"in_sample_skill", d.in_sample_skill},
                            {"out_of_sample_skill", d.out_of_sample_skill}});
    }
    m["error_diagrams"] = std::move(diagrams);
    write_file(dir / "manifest.json", [&](std::ostream& o) { o << m.dump(2) << '\n'; });
    write_file(dir / "config.txt", [&](std::ostream& o) { o << portable_config_text(config); });
    return result;
}

PipelineResult run_pipeline(const RunConfig& config) {
    const auto loaded =
        stage("ingest", [&] { return load_csv(config.input, config.date_column, config.price_column); });
    return run_pipeline(config, loaded.series);
}

} // namespace rebound
