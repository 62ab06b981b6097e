#include "rebound/fit.hpp"

#include "rebound/errors.hpp"
#include "linear_lsq.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace rebound {

const char* to_string(ModelKind kind) { return kind == ModelKind::lppl ? "lppl" : "power_law"; }

ModelKind parse_model_kind(std::string_view text) {
    if (text == "lppl") return ModelKind::lppl;
    if (text == "power_law" || text == "power-law") return ModelKind::power_law;
    throw ConfigError("unknown model '" + std::string(text) + "' (expected lppl or power_law)");
}

void SearchConfig::validate() const {
    if (!(m_min > 0.0 && m_min < m_max && m_max < 1.0)) throw ConfigError("search requires 0 < m_min < m_max < 1");
    if (!(omega_min > 0.0 && omega_min < omega_max)) throw ConfigError("search requires 0 < omega_min < omega_max");
    if (!(tc_horizon > 0.0)) throw ConfigError("tc_horizon must be positive");
    if (n_candidates < 1 || n_starts < 1 || n_starts > n_candidates)
        throw ConfigError("search requires 1 <= n_starts <= n_candidates");
    if (max_evals < 10) throw ConfigError("max_evals must be at least 10");
    if (min_points < 8) throw ConfigError("min_points must be at least 8");
}

std::uint64_t window_seed(std::uint64_t root_seed, const Window& window) {
    // splitmix64 finalizer over the mixed inputs
    std::uint64_t z = root_seed ^ (static_cast<std::uint64_t>(window.t1.time_since_epoch().count()) * 0x9E3779B97F4A7C15ULL) ^
                      (static_cast<std::uint64_t>(window.t2.time_since_epoch().count()) * 0xC2B2AE3D27D4EB4FULL);
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

constexpr int kMaxDim = 3;
using Point = std::array<double, kMaxDim>;

// Profiled sum of squares over the unit box. Coordinates map linearly onto
// (m, tc, omega) bounds; omega is absent for the power law.
class ProfiledObjective {
public:
    ProfiledObjective(std::span<const double> times, std::span<const double> y, const SearchConfig& cfg,
                      double tc_lo, double tc_hi)
        : times_(times), y_(y), cfg_(cfg), tc_lo_(tc_lo), tc_hi_(tc_hi),
          x_(static_cast<Eigen::Index>(times.size()), columns()),
          qr_(static_cast<Eigen::Index>(times.size()), columns()),
          rhs_(Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()))) {
        qr_.setThreshold(1e-12);
    }

    int dim() const { return cfg_.model == ModelKind::lppl ? 3 : 2; }
    Eigen::Index columns() const { return cfg_.model == ModelKind::lppl ? 4 : 2; }

    double m(const Point& u) const { return cfg_.m_min + u[0] * (cfg_.m_max - cfg_.m_min); }
    double tc(const Point& u) const { return tc_lo_ + u[1] * (tc_hi_ - tc_lo_); }
    double omega(const Point& u) const { return cfg_.omega_min + u[2] * (cfg_.omega_max - cfg_.omega_min); }

    double operator()(const Point& u) { return solve(u).sse; }

    struct Solution {
        std::array<double, 4> coef{};
        double sse = 0.0;
        bool degenerate = false;
    };

    Solution solve(const Point& u) {
        ++evals_;
        const double mm = m(u), t_c = tc(u);
        const bool osc = cfg_.model == ModelKind::lppl;
        const double w = osc ? omega(u) : 0.0;
        for (Eigen::Index i = 0; i < x_.rows(); ++i) {
            const double ln_dt = std::log(t_c - times_[static_cast<std::size_t>(i)]);
            const double f = std::exp(mm * ln_dt);
            x_(i, 0) = 1.0;
            x_(i, 1) = f;
            if (osc) {
                x_(i, 2) = f * std::cos(w * ln_dt);
                x_(i, 3) = f * std::sin(w * ln_dt);
            }
        }
        qr_.compute(x_);
        const Eigen::VectorXd beta = qr_.solve(rhs_);
        Solution s;
        for (Eigen::Index j = 0; j < beta.size(); ++j) s.coef[static_cast<std::size_t>(j)] = beta[j];
        s.sse = (x_ * beta - rhs_).squaredNorm();
        s.degenerate = qr_.rank() < x_.cols() || !std::isfinite(s.sse);
        if (!std::isfinite(s.sse)) s.sse = std::numeric_limits<double>::infinity();
        return s;
    }

    long evals() const { return evals_; }

private:
    std::span<const double> times_;
    std::span<const double> y_;
    const SearchConfig& cfg_;
    double tc_lo_, tc_hi_;
    detail::DesignMatrix x_;
    Eigen::ColPivHouseholderQR<detail::DesignMatrix> qr_;
    Eigen::VectorXd rhs_;
    long evals_ = 0;
};

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

// Halton points with a random Cranley-Patterson shift.
std::vector<Point> scrambled_halton(int n, int dim, std::mt19937_64& rng) {
    constexpr std::array<std::uint64_t, kMaxDim> bases{2, 3, 5};
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Point shift{};
    for (int d = 0; d < dim; ++d) shift[static_cast<std::size_t>(d)] = uni(rng);
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < dim; ++d) {
            const auto k = static_cast<std::size_t>(d);
            double v = radical_inverse(static_cast<std::uint64_t>(i) + 1, bases[k]) + shift[k];
            pts[static_cast<std::size_t>(i)][k] = v - std::floor(v);
        }
    }
    return pts;
}

Point clamp_unit(Point p, int dim) {
    for (int d = 0; d < dim; ++d) p[static_cast<std::size_t>(d)] = std::clamp(p[static_cast<std::size_t>(d)], 0.0, 1.0);
    return p;
}

struct Descent {
    Point best{};
    double value = std::numeric_limits<double>::infinity();
    bool converged = false;
};

// Nelder-Mead on the unit box; trial points are projected onto the box.
Descent nelder_mead(ProfiledObjective& f, Point start, int dim, double step, int budget, double xtol,
                    double ftol) {
    const auto n = static_cast<std::size_t>(dim);
    std::vector<Point> simplex(n + 1, clamp_unit(start, dim));
    std::vector<double> values(n + 1);
    for (std::size_t j = 0; j < n; ++j) {
        Point& v = simplex[j + 1];
        v[j] += (v[j] + step <= 1.0) ? step : -step;
    }
    const long start_evals = f.evals();
    for (std::size_t j = 0; j <= n; ++j) values[j] = f(simplex[j]);

    std::vector<std::size_t> order(n + 1);
    Descent out;
    while (true) {
        for (std::size_t j = 0; j <= n; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t lo = order.front(), hi = order.back(), next_hi = order[n - 1];

        double diam = 0.0;
        for (std::size_t j = 0; j <= n; ++j)
            for (std::size_t d = 0; d < n; ++d) diam = std::max(diam, std::abs(simplex[j][d] - simplex[lo][d]));
        const double spread = values[hi] - values[lo];
        if (diam <= xtol || spread <= ftol * std::abs(values[lo]) + 1e-300) {
            out.converged = true;
            break;
        }
        if (f.evals() - start_evals >= budget) break;

        Point centroid{};
        for (std::size_t j = 0; j <= n; ++j) {
            if (j == hi) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[j][d] / static_cast<double>(n);
        }
        const auto along = [&](double t) {
            Point p{};
            for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + t * (simplex[hi][d] - centroid[d]);
            return clamp_unit(p, dim);
        };

        const Point reflected = along(-1.0);
        const double fr = f(reflected);
        if (fr < values[lo]) {
            const Point expanded = along(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[hi] = expanded;
                values[hi] = fe;
            } else {
                simplex[hi] = reflected;
                values[hi] = fr;
            }
            continue;
        }
        if (fr < values[next_hi]) {
            simplex[hi] = reflected;
            values[hi] = fr;
            continue;
        }
        const bool outside = fr < values[hi];
        const Point contracted = along(outside ? -0.5 : 0.5);
        const double fc = f(contracted);
        if (fc < (outside ? fr : values[hi])) {
            simplex[hi] = contracted;
            values[hi] = fc;
            continue;
        }
        for (std::size_t j = 0; j <= n; ++j) {
            if (j == lo) continue;
            for (std::size_t d = 0; d < n; ++d) simplex[j][d] = simplex[lo][d] + 0.5 * (simplex[j][d] - simplex[lo][d]);
            values[j] = f(simplex[j]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    out.best = simplex[best];
    out.value = values[best];
    return out;
}

// Picks up to `count` candidates by value, skipping ones that crowd an
// earlier pick; falls back to the plain ranking when the set is too small.
std::vector<Point> choose_starts(const std::vector<Point>& pts, const std::vector<double>& vals, int count,
                                 int dim) {
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::vector<Point> chosen;
    std::vector<bool> used(idx.size(), false);
    constexpr double min_sep = 0.08;
    for (std::size_t r = 0; r < idx.size() && static_cast<int>(chosen.size()) < count; ++r) {
        const Point& p = pts[idx[r]];
        const bool crowded = std::any_of(chosen.begin(), chosen.end(), [&](const Point& q) {
            double dist = 0.0;
            for (int d = 0; d < dim; ++d)
                dist = std::max(dist, std::abs(p[static_cast<std::size_t>(d)] - q[static_cast<std::size_t>(d)]));
            return dist < min_sep;
        });
        if (!crowded) {
            chosen.push_back(p);
            used[r] = true;
        }
    }
    for (std::size_t r = 0; r < idx.size() && static_cast<int>(chosen.size()) < count; ++r)
        if (!used[r]) chosen.push_back(pts[idx[r]]);
    return chosen;
}

} // namespace

FitResult fit_points(std::span<const double> times, std::span<const double> log_prices, const Window& window,
                     const SearchConfig& config) {
    config.validate();
    if (times.size() != log_prices.size()) throw DataError("times and log prices differ in length");
    if (times.size() < config.min_points) {
        throw DataError("window " + format_date(window.t1) + ".." + format_date(window.t2) + " has " +
                        std::to_string(times.size()) + " points, need " + std::to_string(config.min_points));
    }
    const double t2 = day_number(window.t2);
    const double t_last = *std::max_element(times.begin(), times.end());
    const double tc_lo = std::max(t2, t_last) + 1e-3;
    const double tc_hi = t2 + config.tc_horizon * static_cast<double>(window.length_days());
    if (!(tc_hi > tc_lo)) throw DataError("empty critical-time range for window");

    ProfiledObjective objective(times, log_prices, config, tc_lo, tc_hi);
    const int dim = objective.dim();

    std::mt19937_64 rng(window_seed(config.seed, window));
    const auto candidates = scrambled_halton(config.n_candidates, dim, rng);
    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) scores[i] = objective(candidates[i]);
    const auto starts = choose_starts(candidates, scores, config.n_starts, dim);

    struct Candidate {
        Descent descent;
        ProfiledObjective::Solution solution;
    };
    std::vector<Candidate> results;
    for (const Point& s : starts) {
        Descent d = nelder_mead(objective, s, dim, 0.1, config.max_evals, config.xtol, config.ftol);
        if (d.converged) {
            // One restart from the converged point guards against a collapsed simplex.
            Descent again = nelder_mead(objective, d.best, dim, 0.02, config.max_evals / 2, config.xtol, config.ftol);
            if (again.value <= d.value) d = again;
        }
        results.push_back({d, objective.solve(d.best)});
    }

    const Candidate* best = nullptr;
    for (bool need_converged : {true, false}) {
        for (const auto& c : results) {
            if (c.solution.degenerate || (need_converged && !c.descent.converged)) continue;
            if (!best || c.solution.sse < best->solution.sse) best = &c;
        }
        if (best) break;
    }
    if (!best) throw NumericalError("all restarts degenerate for window " + format_date(window.t1) + ".." +
                                    format_date(window.t2));

    FitResult out;
    out.window = window;
    out.n_points = times.size();
    out.converged = best->descent.converged;
    out.n_restarts_used = static_cast<int>(results.size());
    constexpr double edge = 0.01;
    for (int d = 0; d < dim; ++d) {
        const double u = best->descent.best[static_cast<std::size_t>(d)];
        if (u < edge || u > 1.0 - edge) out.at_bound = true;
    }
    LpplParams& p = out.params;
    p.m = objective.m(best->descent.best);
    p.tc = objective.tc(best->descent.best);
    if (config.model == ModelKind::lppl) {
        p.omega = objective.omega(best->descent.best);
        const double c1 = best->solution.coef[2], c2 = best->solution.coef[3];
        p.phi = wrap_phase(std::atan2(c2, c1));
        const auto lin = solve_linear_params({p.m, p.tc, p.omega, p.phi}, times, log_prices);
        if (lin.degenerate) throw NumericalError("degenerate amplitude solve for best fit");
        p.A = lin.A;
        p.B = lin.B;
        p.C = lin.C;
        out.rmse = std::sqrt(lin.sse / static_cast<double>(times.size()));
    } else {
        const auto lin = solve_power_law_linear(p.m, p.tc, times, log_prices);
        p.A = lin.A;
        p.B = lin.B;
        p.C = 0.0;
        p.omega = 0.0;
        p.phi = 0.0;
        out.rmse = std::sqrt(lin.sse / static_cast<double>(times.size()));
    }
    return out;
}

FitResult fit_window(const PriceSeries& series, const Window& window, const SearchConfig& config) {
    const std::size_t lo = series.lower_index(window.t1);
    const std::size_t hi = series.upper_index(window.t2);
    const std::size_t n = hi > lo ? hi - lo : 0;
    std::vector<double> t(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = day_number(series.date(lo + i));
        y[i] = std::log(series.price(lo + i));
    }
    return fit_points(t, y, window, config);
}

ScanReport scan_windows(const PriceSeries& series, std::span<const Window> windows, const SearchConfig& config,
                        unsigned workers) {
    config.validate();
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, windows.size())));
    const std::vector<double> t = day_numbers(series);
    const std::vector<double> y = log_prices(series);

    std::vector<std::optional<FitResult>> slots(windows.size());
    const auto work = [&](unsigned worker) {
        for (std::size_t i = worker; i < windows.size(); i += workers) {
            const std::size_t lo = series.lower_index(windows[i].t1);
            const std::size_t hi = series.upper_index(windows[i].t2);
            if (hi <= lo || hi - lo < config.min_points) continue;
            try {
                slots[i] = fit_points(std::span(t).subspan(lo, hi - lo), std::span(y).subspan(lo, hi - lo),
                                      windows[i], config);
            } catch (const NumericalError&) {
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    ScanReport report;
    for (auto& s : slots) {
        if (s) report.fits.push_back(std::move(*s));
        else ++report.skipped_windows;
    }
    return report;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr const char* kFitHeader = "t1,t2,A,B,C,m,tc,omega,phi,rmse,n_points,converged,n_restarts_used,at_bound,tc_date";

} // namespace

void write_fits_csv(std::ostream& out, std::span<const FitResult> fits) {
    out << kFitHeader << '\n';
    for (const auto& f : fits) {
        const auto& p = f.params;
        out << format_date(f.window.t1) << ',' << format_date(f.window.t2) << ',' << fmt(p.A) << ',' << fmt(p.B)
            << ',' << fmt(p.C) << ',' << fmt(p.m) << ',' << fmt(p.tc) << ',' << fmt(p.omega) << ',' << fmt(p.phi)
            << ',' << fmt(f.rmse) << ',' << f.n_points << ',' << (f.converged ? 1 : 0) << ',' << f.n_restarts_used
            << ',' << (f.at_bound ? 1 : 0) << ',' << format_date(date_from_day_number(p.tc)) << '\n';
    }
}

std::vector<FitResult> read_fits_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty fits file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("t1,t2,A,B,C,m,tc,omega,phi,rmse,n_points,converged,n_restarts_used,at_bound", 0) != 0)
        throw DataError("unexpected fits header: " + line);
    std::vector<FitResult> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() < 14) throw DataError("fits line " + std::to_string(line_no) + ": too few fields");
        try {
            FitResult r;
            r.window = {parse_date(f[0]), parse_date(f[1])};
            r.params = {std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                        std::stod(f[6]), std::stod(f[7]), std::stod(f[8])};
            r.rmse = std::stod(f[9]);
            r.n_points = std::stoul(f[10]);
            r.converged = f[11] == "1";
            r.n_restarts_used = std::stoi(f[12]);
            r.at_bound = f[13] == "1";
            out.push_back(r);
        } catch (const std::logic_error&) {
            throw DataError("fits line " + std::to_string(line_no) + ": malformed number");
        }
    }
    return out;
}

void save_fits_csv(const std::filesystem::path& path, std::span<const FitResult> fits) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_fits_csv(out, fits);
}

std::vector<FitResult> load_fits_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    return read_fits_csv(in);
}

void write_fits_jsonl(std::ostream& out, std::span<const FitResult> fits) {
    for (const auto& f : fits) {
        const auto& p = f.params;
        nlohmann::ordered_json j{{"t1", format_date(f.window.t1)},
                                 {"t2", format_date(f.window.t2)},
                                 {"A", p.A},
                                 {"B", p.B},
                                 {"C", p.C},
                                 {"m", p.m},
                                 {"tc", p.tc},
                                 {"omega", p.omega},
                                 {"phi", p.phi},
                                 {"rmse", f.rmse},
                                 {"n_points", f.n_points},
                                 {"converged", f.converged},
                                 {"n_restarts_used", f.n_restarts_used},
                                 {"at_bound", f.at_bound}};
        out << j.dump() << '\n';
    }
}

} // namespace rebound
