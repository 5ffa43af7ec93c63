#include "topictrace/series.hpp"

#include "topictrace/errors.hpp"
#include "topictrace/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace topictrace::series {

using nlohmann::json;

namespace {

double parse_double(const std::string& s, const char* what) {
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError(std::string("invalid ") + what + ": \"" + s + "\"");
    return x;
}

long parse_long(const std::string& s, const char* what) {
    long x = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError(std::string("invalid ") + what + ": \"" + s + "\"");
    return x;
}

Date parse_date_or_throw(const std::string& s) {
    auto d = parse_date(s);
    if (!d) throw DataError("invalid date \"" + s + "\"");
    return *d;
}

bool holiday_contains(const Holiday& h, const Date& d) {
    return std::binary_search(h.dates.begin(), h.dates.end(), d);
}

} // namespace

DailySeries build_daily_series(const std::vector<std::pair<Date, double>>& scored) {
    if (scored.empty()) throw DataError("build_daily_series: no scored documents");
    Date lo = scored.front().first, hi = scored.front().first;
    for (const auto& [date, p] : scored) {
        if (p < 0.0 || p > 1.0)
            throw DataError("probability outside [0,1]: " + io::format_double(p));
        lo = std::min(lo, date);
        hi = std::max(hi, date);
    }
    const int n = int(days_between(lo, hi)) + 1;
    DailySeries s;
    s.start = lo;
    s.values.assign(std::size_t(n), 0.0);
    s.counts.assign(std::size_t(n), 0);
    std::vector<double> sums(std::size_t(n), 0.0);
    for (const auto& [date, p] : scored) {
        const auto i = std::size_t(days_between(lo, date));
        sums[i] += p;
        ++s.counts[i];
    }
    for (std::size_t i = 0; i < sums.size(); ++i)
        if (s.counts[i] > 0) s.values[i] = sums[i] / s.counts[i];
    return s;
}

std::vector<double> moving_average(const DailySeries& s, int window) {
    if (window < 1 || window % 2 == 0)
        throw ConfigError("moving_average window must be odd and >= 1");
    if (window > s.length())
        throw ConfigError("moving_average window longer than series");
    const int half = window / 2;
    std::vector<double> out(std::size_t(s.length()), 0.0);
    for (int i = 0; i < s.length(); ++i) {
        double sum = 0.0;
        int n = 0;
        for (int j = std::max(0, i - half); j <= std::min(s.length() - 1, i + half); ++j) {
            if (s.counts[std::size_t(j)] > 0) {
                sum += s.values[std::size_t(j)];
                ++n;
            }
        }
        out[std::size_t(i)] = n > 0 ? sum / n : 0.0;
    }
    return out;
}

std::vector<double> fourier_features(double t, double period, int order) {
    if (period <= 0.0) throw ConfigError("fourier period must be positive");
    std::vector<double> out;
    out.reserve(std::size_t(order) * 2);
    for (int n = 1; n <= order; ++n) {
        const double arg = 2.0 * std::numbers::pi * n * t / period;
        out.push_back(std::sin(arg));
        out.push_back(std::cos(arg));
    }
    return out;
}

namespace {

struct PopulatedSpan {
    std::vector<int> days; // day indices with count > 0
    double t0 = 0.0;       // first populated day
    double span = 1.0;     // last - first, floored at 1 for scaling
};

PopulatedSpan populated_span(const DailySeries& s) {
    PopulatedSpan ps;
    for (int i = 0; i < s.length(); ++i)
        if (s.counts[std::size_t(i)] > 0) ps.days.push_back(i);
    if (ps.days.empty()) throw NumericError("series has no populated days");
    ps.t0 = ps.days.front();
    ps.span = std::max(1.0, double(ps.days.back()) - ps.t0);
    return ps;
}

} // namespace

std::vector<double> changepoint_grid(const DailySeries& s, const DecompositionConfig& cfg) {
    const PopulatedSpan ps = populated_span(s);
    std::vector<double> grid;
    grid.reserve(std::size_t(std::max(0, cfg.n_changepoints)));
    const double window = cfg.changepoint_range * (double(ps.days.back()) - ps.t0);
    for (int j = 0; j < cfg.n_changepoints; ++j)
        grid.push_back(ps.t0 + window * double(j + 1) / double(cfg.n_changepoints + 1));
    return grid;
}

namespace {

int column_count(const DecompositionConfig& cfg) {
    return 2 + cfg.n_changepoints + 2 * cfg.weekly_order + 2 * cfg.yearly_order +
           int(cfg.holidays.size());
}

// Trend columns are expressed in normalized time (t - t0)/span so every
// column is O(1) and the block ridge penalties act on comparable scales;
// coefficients are mapped back to day units after the solve.
void fill_row(Eigen::MatrixXd& X, int row, double t, const Date& date,
              const DecompositionConfig& cfg, const std::vector<double>& changepoints,
              double t0, double span) {
    int c = 0;
    const double tau = (t - t0) / span;
    X(row, c++) = 1.0;
    X(row, c++) = tau;
    for (double s_j : changepoints) {
        const double tau_j = (s_j - t0) / span;
        X(row, c++) = std::max(0.0, tau - tau_j);
    }
    for (double f : fourier_features(t, kWeeklyPeriod, cfg.weekly_order)) X(row, c++) = f;
    for (double f : fourier_features(t, kYearlyPeriod, cfg.yearly_order)) X(row, c++) = f;
    for (const auto& h : cfg.holidays) X(row, c++) = holiday_contains(h, date) ? 1.0 : 0.0;
}

} // namespace

Eigen::MatrixXd design_matrix(const DailySeries& s, const DecompositionConfig& cfg) {
    const PopulatedSpan ps = populated_span(s);
    const auto changepoints = changepoint_grid(s, cfg);
    if (int(ps.days.size()) < column_count(cfg))
        std::fprintf(stderr, "warning: %zu populated days for %d design columns\n",
                     ps.days.size(), column_count(cfg));
    Eigen::MatrixXd X(int(ps.days.size()), column_count(cfg));
    for (std::size_t r = 0; r < ps.days.size(); ++r) {
        const int t = ps.days[r];
        fill_row(X, int(r), double(t), s.date_at(t), cfg, changepoints, ps.t0, ps.span);
    }
    return X;
}

DecompositionFit fit_decomposition(const DailySeries& s, const DecompositionConfig& cfg) {
    if (cfg.n_changepoints < 0) throw ConfigError("n_changepoints must be >= 0");
    if (cfg.weekly_order < 1 || cfg.yearly_order < 1)
        throw ConfigError("seasonal orders must be >= 1");
    if (cfg.lambda_trend < 0 || cfg.lambda_seasonal < 0 || cfg.lambda_holiday < 0)
        throw ConfigError("ridge penalties must be >= 0");
    if (!(cfg.interval_level > 0.0 && cfg.interval_level < 1.0))
        throw ConfigError("interval_level must lie in (0,1)");

    const PopulatedSpan ps = populated_span(s);
    const auto changepoints = changepoint_grid(s, cfg);
    const int n_cols = column_count(cfg);
    const int n_rows = int(ps.days.size());

    Eigen::MatrixXd X(n_rows, n_cols);
    Eigen::VectorXd y(n_rows);
    for (int r = 0; r < n_rows; ++r) {
        const int t = ps.days[std::size_t(r)];
        fill_row(X, r, double(t), s.date_at(t), cfg, changepoints, ps.t0, ps.span);
        y(r) = s.values[std::size_t(t)];
    }

    Eigen::VectorXd penalties = Eigen::VectorXd::Zero(n_cols);
    {
        int c = 2;
        for (int j = 0; j < cfg.n_changepoints; ++j) penalties(c++) = cfg.lambda_trend;
        for (int j = 0; j < 2 * (cfg.weekly_order + cfg.yearly_order); ++j)
            penalties(c++) = cfg.lambda_seasonal;
        for (std::size_t j = 0; j < cfg.holidays.size(); ++j) penalties(c++) = cfg.lambda_holiday;
    }

    Eigen::MatrixXd A = X.transpose() * X;
    A.diagonal() += penalties;
    const Eigen::VectorXd b = X.transpose() * y;

    if (n_rows < n_cols / 2)
        std::fprintf(stderr, "warning: fitting %d populated days against %d columns\n", n_rows,
                     n_cols);

    Eigen::LDLT<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success)
        throw NumericError("fit_decomposition: normal equations factorization failed");
    const double d_max = solver.vectorD().cwiseAbs().maxCoeff();
    const double d_min = solver.vectorD().cwiseAbs().minCoeff();
    if (!(d_max > 0.0) || d_min <= 1e-13 * d_max)
        throw NumericError("fit_decomposition: singular normal equations (add ridge penalty)");
    const Eigen::VectorXd beta = solver.solve(b);
    const double resid_norm = (A * beta - b).norm();
    const double scale = A.norm() * beta.norm() + b.norm() + 1e-30;
    if (!beta.allFinite() || resid_norm > 1e-8 * scale)
        throw NumericError("fit_decomposition: singular normal equations (add ridge penalty)");

    DecompositionFit fit;
    fit.start = s.start;
    fit.weekly_order = cfg.weekly_order;
    fit.yearly_order = cfg.yearly_order;
    fit.interval_level = cfg.interval_level;
    fit.holidays = cfg.holidays;
    for (auto& h : fit.holidays) std::sort(h.dates.begin(), h.dates.end());
    fit.changepoints = changepoints;

    // map normalized-time trend coefficients back to day units
    int c = 0;
    const double m_tau = beta(c++);
    const double k_tau = beta(c++);
    fit.k = k_tau / ps.span;
    fit.m = m_tau - fit.k * ps.t0;
    fit.delta.resize(std::size_t(cfg.n_changepoints));
    for (int j = 0; j < cfg.n_changepoints; ++j) fit.delta[std::size_t(j)] = beta(c++) / ps.span;
    fit.beta_weekly.resize(std::size_t(2 * cfg.weekly_order));
    for (auto& v : fit.beta_weekly) v = beta(c++);
    fit.beta_yearly.resize(std::size_t(2 * cfg.yearly_order));
    for (auto& v : fit.beta_yearly) v = beta(c++);
    fit.kappa.resize(cfg.holidays.size());
    for (auto& v : fit.kappa) v = beta(c++);

    // sample standard deviation of the in-sample residuals
    double mean_r = 0.0;
    std::vector<double> residuals(static_cast<std::size_t>(n_rows));
    for (int r = 0; r < n_rows; ++r) {
        const int t = ps.days[std::size_t(r)];
        residuals[std::size_t(r)] = y(r) - predict_at(fit, s.date_at(t)).mean;
        mean_r += residuals[std::size_t(r)];
    }
    mean_r /= n_rows;
    if (n_rows > 1) {
        double ss = 0.0;
        for (double r : residuals) ss += (r - mean_r) * (r - mean_r);
        fit.sigma = std::sqrt(ss / double(n_rows - 1));
    }
    return fit;
}

double trend_at(const DecompositionFit& fit, const Date& d) {
    const double t = double(days_between(fit.start, d));
    double v = fit.k * t + fit.m;
    for (std::size_t j = 0; j < fit.changepoints.size(); ++j)
        v += fit.delta[j] * std::max(0.0, t - fit.changepoints[j]);
    return v;
}

double weekly_at(const DecompositionFit& fit, const Date& d) {
    const double t = double(days_between(fit.start, d));
    const auto f = fourier_features(t, kWeeklyPeriod, fit.weekly_order);
    double v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) v += fit.beta_weekly[i] * f[i];
    return v;
}

double yearly_at(const DecompositionFit& fit, const Date& d) {
    const double t = double(days_between(fit.start, d));
    const auto f = fourier_features(t, kYearlyPeriod, fit.yearly_order);
    double v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) v += fit.beta_yearly[i] * f[i];
    return v;
}

double holiday_at(const DecompositionFit& fit, const Date& d) {
    double v = 0.0;
    for (std::size_t h = 0; h < fit.holidays.size(); ++h)
        if (holiday_contains(fit.holidays[h], d)) v += fit.kappa[h];
    return v;
}

Prediction predict_at(const DecompositionFit& fit, const Date& d) {
    const double mean = trend_at(fit, d) + weekly_at(fit, d) + yearly_at(fit, d) + holiday_at(fit, d);
    const double z = normal_quantile(0.5 + fit.interval_level / 2.0);
    Prediction p;
    p.mean = mean;
    p.lower = mean - z * fit.sigma;
    p.upper = mean + z * fit.sigma;
    return p;
}

std::vector<Prediction> predict(const DecompositionFit& fit, const std::vector<Date>& dates) {
    std::vector<Prediction> out;
    out.reserve(dates.size());
    for (const auto& d : dates) out.push_back(predict_at(fit, d));
    return out;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p must lie in (0,1)");
    // Acklam's rational approximation, then one Halley refinement via erfc.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double err = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = err * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

AnomalyReport detect_anomalies(const DailySeries& s, const DecompositionFit& fit) {
    AnomalyReport report;
    for (int t = 0; t < s.length(); ++t) {
        if (s.counts[std::size_t(t)] == 0) continue;
        const Date d = s.date_at(t);
        const Prediction p = predict_at(fit, d);
        const double obs = s.values[std::size_t(t)];
        if (obs > p.upper) {
            report.anomalies.push_back({d, obs, p.mean, p.lower, p.upper, Side::High});
        } else if (obs < p.lower) {
            report.anomalies.push_back({d, obs, p.mean, p.lower, p.upper, Side::Low});
        }
    }
    return report;
}

double anomaly_severity(const Anomaly& a) {
    const double band = a.upper - a.lower;
    if (band <= 0.0) return std::numeric_limits<double>::infinity();
    return a.side == Side::High ? (a.observed - a.upper) / band : (a.lower - a.observed) / band;
}

std::array<double, 7> weekly_profile(const DecompositionFit& fit) {
    std::array<double, 7> profile{};
    const int start_wd = iso_weekday(fit.start);
    for (int wd = 0; wd < 7; ++wd) {
        const int t = (wd - start_wd + 7) % 7;
        const auto f = fourier_features(double(t), kWeeklyPeriod, fit.weekly_order);
        double v = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) v += fit.beta_weekly[i] * f[i];
        profile[std::size_t(wd)] = v;
    }
    return profile;
}

std::array<double, 12> yearly_profile(const DecompositionFit& fit) {
    std::array<double, 12> sums{};
    std::array<int, 12> counts{};
    for (int t = 0; t < 365; ++t) {
        const Date d = add_days(fit.start, t);
        const auto f = fourier_features(double(t), kYearlyPeriod, fit.yearly_order);
        double v = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) v += fit.beta_yearly[i] * f[i];
        sums[std::size_t(d.month - 1)] += v;
        ++counts[std::size_t(d.month - 1)];
    }
    std::array<double, 12> profile{};
    for (int m = 0; m < 12; ++m)
        profile[std::size_t(m)] = counts[std::size_t(m)] > 0
                                      ? sums[std::size_t(m)] / counts[std::size_t(m)]
                                      : 0.0;
    return profile;
}

namespace {

std::string ramp_color(double t) {
    // light yellow -> dark red
    const int r0 = 0xFF, g0 = 0xFF, b0 = 0xE0;
    const int r1 = 0x8B, g1 = 0x00, b1 = 0x00;
    const auto lerp = [t](int lo, int hi) { return int(std::lround(lo + t * (hi - lo))); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", lerp(r0, r1), lerp(g0, g1), lerp(b0, b1));
    return buf;
}

} // namespace

std::string heatmap_svg(const DailySeries& s, int year_from, int year_to) {
    if (year_from > year_to) std::swap(year_from, year_to);
    const Date series_end = s.date_at(s.length() - 1);
    const Date range_start = std::max(s.start, Date{year_from, 1, 1});
    const Date range_end = std::min(series_end, Date{year_to, 12, 31});
    if (range_end < range_start)
        throw ConfigError("heatmap: year range does not overlap the series");

    double vmin = 0.0, vmax = 0.0;
    bool any = false;
    for (int t = 0; t < s.length(); ++t) {
        const Date d = s.date_at(t);
        if (d < range_start || d > range_end || s.counts[std::size_t(t)] == 0) continue;
        const double v = s.values[std::size_t(t)];
        if (!any) {
            vmin = vmax = v;
            any = true;
        } else {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }

    const int cell = 12, gap = 2, left = 40, top = 24, year_h = 7 * (cell + gap) + 36;
    const int n_years = range_end.year - range_start.year + 1;
    const int width = left + 54 * (cell + gap) + 20;
    const int height = top + n_years * year_h;

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";

    for (int year = range_start.year; year <= range_end.year; ++year) {
        const int y_off = top + (year - range_start.year) * year_h;
        svg += "<text x=\"4\" y=\"" + std::to_string(y_off - 6) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + std::to_string(year) +
               "</text>\n";
        const Date jan1{year, 1, 1};
        const int jan1_wd = iso_weekday(jan1);
        Date d = std::max(range_start, jan1);
        const Date year_end = std::min(range_end, Date{year, 12, 31});
        for (; d <= year_end; d = add_days(d, 1)) {
            const int doy = int(days_between(jan1, d));
            const int col = (doy + jan1_wd) / 7;
            const int row = iso_weekday(d);
            std::string fill = "#e0e0e0"; // neutral for unpopulated days
            const std::int64_t idx = days_between(s.start, d);
            if (idx >= 0 && idx < s.length() && s.counts[std::size_t(idx)] > 0) {
                const double v = s.values[std::size_t(idx)];
                const double t = vmax > vmin ? (v - vmin) / (vmax - vmin) : 1.0;
                fill = ramp_color(t);
            }
            svg += "<rect id=\"d" + format_date(d) + "\" x=\"" +
                   std::to_string(left + col * (cell + gap)) + "\" y=\"" +
                   std::to_string(y_off + row * (cell + gap)) + "\" width=\"" +
                   std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" +
                   fill + "\"/>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::string series_to_csv(const DailySeries& s) {
    std::string out = "date,value,count\n";
    for (int t = 0; t < s.length(); ++t) {
        out += format_date(s.date_at(t));
        out += ',';
        out += io::format_double(s.values[std::size_t(t)]);
        out += ',';
        out += std::to_string(s.counts[std::size_t(t)]);
        out += '\n';
    }
    return out;
}

DailySeries series_from_csv(const std::string& content) {
    const auto lines = io::split_lines(content);
    if (lines.empty() || lines[0] != "date,value,count")
        throw DataError("series CSV must start with header \"date,value,count\"");
    DailySeries s;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = io::split_csv_line(lines[i]);
        if (fields.size() != 3)
            throw DataError("series CSV line " + std::to_string(i + 1) + ": expected 3 fields");
        const Date d = parse_date_or_throw(fields[0]);
        if (s.values.empty()) {
            s.start = d;
        } else if (days_between(s.start, d) != std::int64_t(s.values.size())) {
            throw DataError("series CSV line " + std::to_string(i + 1) +
                            ": days must be contiguous");
        }
        s.values.push_back(parse_double(fields[1], "value"));
        s.counts.push_back(int(parse_long(fields[2], "count")));
    }
    if (s.values.empty()) throw DataError("series CSV has no rows");
    return s;
}

std::string fit_to_json(const DecompositionFit& fit) {
    json j;
    j["start"] = format_date(fit.start);
    j["k"] = fit.k;
    j["m"] = fit.m;
    j["changepoints"] = fit.changepoints;
    j["delta"] = fit.delta;
    j["beta_weekly"] = fit.beta_weekly;
    j["beta_yearly"] = fit.beta_yearly;
    json holidays = json::array();
    for (const auto& h : fit.holidays) {
        json dates = json::array();
        for (const auto& d : h.dates) dates.push_back(format_date(d));
        holidays.push_back({{"name", h.name}, {"dates", dates}});
    }
    j["holidays"] = std::move(holidays);
    j["kappa"] = fit.kappa;
    j["weekly_order"] = fit.weekly_order;
    j["yearly_order"] = fit.yearly_order;
    j["sigma"] = fit.sigma;
    j["interval_level"] = fit.interval_level;
    return j.dump(2) + "\n";
}

DecompositionFit fit_from_json(const std::string& content) {
    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid fit JSON: ") + e.what());
    }
    try {
        DecompositionFit fit;
        fit.start = parse_date_or_throw(j.at("start").get<std::string>());
        fit.k = j.at("k").get<double>();
        fit.m = j.at("m").get<double>();
        fit.changepoints = j.at("changepoints").get<std::vector<double>>();
        fit.delta = j.at("delta").get<std::vector<double>>();
        fit.beta_weekly = j.at("beta_weekly").get<std::vector<double>>();
        fit.beta_yearly = j.at("beta_yearly").get<std::vector<double>>();
        for (const auto& hj : j.at("holidays")) {
            Holiday h;
            h.name = hj.at("name").get<std::string>();
            for (const auto& dj : hj.at("dates")) h.dates.push_back(parse_date_or_throw(dj));
            fit.holidays.push_back(std::move(h));
        }
        fit.kappa = j.at("kappa").get<std::vector<double>>();
        fit.weekly_order = j.at("weekly_order").get<int>();
        fit.yearly_order = j.at("yearly_order").get<int>();
        fit.sigma = j.at("sigma").get<double>();
        fit.interval_level = j.at("interval_level").get<double>();
        return fit;
    } catch (const json::exception& e) {
        throw DataError(std::string("fit JSON: ") + e.what());
    }
}

std::string anomalies_to_csv(const AnomalyReport& report, bool high_only) {
    std::string out = "date,observed,predicted,lower,upper,side\n";
    for (const auto& a : report.anomalies) {
        if (high_only && a.side != Side::High) continue;
        out += format_date(a.date);
        out += ',';
        out += io::format_double(a.observed);
        out += ',';
        out += io::format_double(a.predicted);
        out += ',';
        out += io::format_double(a.lower);
        out += ',';
        out += io::format_double(a.upper);
        out += ',';
        out += a.side == Side::High ? "high" : "low";
        out += '\n';
    }
    return out;
}

std::vector<Holiday> holidays_from_csv(const std::string& content) {
    const auto lines = io::split_lines(content);
    if (lines.empty() || lines[0] != "name,date")
        throw DataError("holiday CSV must start with header \"name,date\"");
    std::vector<Holiday> holidays;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = io::split_csv_line(lines[i]);
        if (fields.size() != 2)
            throw DataError("holiday CSV line " + std::to_string(i + 1) + ": expected 2 fields");
        const Date d = parse_date_or_throw(fields[1]);
        auto it = std::find_if(holidays.begin(), holidays.end(),
                               [&](const Holiday& h) { return h.name == fields[0]; });
        if (it == holidays.end()) {
            holidays.push_back({fields[0], {d}});
        } else {
            it->dates.push_back(d);
        }
    }
    for (auto& h : holidays) {
        std::sort(h.dates.begin(), h.dates.end());
        h.dates.erase(std::unique(h.dates.begin(), h.dates.end()), h.dates.end());
    }
    return holidays;
}

} // namespace topictrace::series
