#pragma once

#include "topictrace/date.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace topictrace::series {

// Contiguous calendar of daily mean topic probabilities. Days with no
// documents carry value 0 and count 0 and are excluded from fitting.
struct DailySeries {
    Date start;
    std::vector<double> values;
    std::vector<int> counts;

    int length() const { return int(values.size()); }
    Date date_at(int i) const { return add_days(start, i); }
};

DailySeries build_daily_series(const std::vector<std::pair<Date, double>>& scored);

// Centered moving mean over populated days; truncated windows at the edges.
std::vector<double> moving_average(const DailySeries& s, int window);

// [sin(2*pi*1*t/period), cos(2*pi*1*t/period), ..., sin(2*pi*N*t/period), cos(...)]
std::vector<double> fourier_features(double t, double period, int order);

struct Holiday {
    std::string name;
    std::vector<Date> dates;
};

struct DecompositionConfig {
    int n_changepoints = 25;
    double changepoint_range = 0.8; // fraction of populated history carrying changepoints
    int weekly_order = 3;
    int yearly_order = 10;
    std::vector<Holiday> holidays;
    double lambda_trend = 0.5;
    double lambda_seasonal = 0.1;
    double lambda_holiday = 0.1;
    double interval_level = 0.99;
};

// Additive decomposition: observed = trend + weekly + yearly + holidays + error.
// Trend is piecewise linear, k*t + m + sum_j delta_j * (t - s_j)_+ in day units.
struct DecompositionFit {
    Date start; // day index anchor
    double k = 0.0;
    double m = 0.0;
    std::vector<double> changepoints; // day indices s_j
    std::vector<double> delta;
    std::vector<double> beta_weekly;
    std::vector<double> beta_yearly;
    std::vector<Holiday> holidays;
    std::vector<double> kappa; // one per holiday
    int weekly_order = 3;
    int yearly_order = 10;
    double sigma = 0.0; // sample std of in-sample residuals
    double interval_level = 0.99;
};

constexpr double kWeeklyPeriod = 7.0;
constexpr double kYearlyPeriod = 365.25;

// Uniformly spaced over the first changepoint_range of the populated history.
std::vector<double> changepoint_grid(const DailySeries& s, const DecompositionConfig& cfg);

// Rows are populated days in calendar order; columns are
// [1, t, hinge(t - s_j)_+ ..., weekly Fourier, yearly Fourier, holiday indicators].
Eigen::MatrixXd design_matrix(const DailySeries& s, const DecompositionConfig& cfg);

// Ridge least squares on populated days via normal equations (per-block
// penalties; intercept and slope unpenalized).
DecompositionFit fit_decomposition(const DailySeries& s, const DecompositionConfig& cfg);

struct Prediction {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

double trend_at(const DecompositionFit& fit, const Date& d);
double weekly_at(const DecompositionFit& fit, const Date& d);
double yearly_at(const DecompositionFit& fit, const Date& d);
double holiday_at(const DecompositionFit& fit, const Date& d);
Prediction predict_at(const DecompositionFit& fit, const Date& d);
std::vector<Prediction> predict(const DecompositionFit& fit, const std::vector<Date>& dates);

// Two-sided standard normal quantile; z ~ 2.576 at level 0.99.
double normal_quantile(double p);

enum class Side { High, Low };

struct Anomaly {
    Date date;
    double observed = 0.0;
    double predicted = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    Side side = Side::High;
};

struct AnomalyReport {
    std::vector<Anomaly> anomalies; // sorted by date
};

AnomalyReport detect_anomalies(const DailySeries& s, const DecompositionFit& fit);
double anomaly_severity(const Anomaly& a); // (excess beyond the band) / band width

// Weekly seasonal component by weekday, 0 = Monday .. 6 = Sunday.
std::array<double, 7> weekly_profile(const DecompositionFit& fit);
// Yearly seasonal component averaged per calendar month over the year from
// the fit anchor.
std::array<double, 12> yearly_profile(const DecompositionFit& fit);

// Calendar heatmap, one rect per day, linear ramp from min to max value;
// unpopulated days get a neutral fill.
std::string heatmap_svg(const DailySeries& s, int year_from, int year_to);

// File formats (CSV with '.' decimals and ISO dates, JSON for the fit).
std::string series_to_csv(const DailySeries& s);
DailySeries series_from_csv(const std::string& content);
std::string fit_to_json(const DecompositionFit& fit);
DecompositionFit fit_from_json(const std::string& content);
std::string anomalies_to_csv(const AnomalyReport& report, bool high_only);
std::vector<Holiday> holidays_from_csv(const std::string& content);

} // namespace topictrace::series
