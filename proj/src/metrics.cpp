#include "tsrag/metrics.hpp"

#include <cmath>

#include "tsrag/error.hpp"

namespace tsrag {

namespace {

double population_var(const Vec& x, double mean) {
    double v = 0.0;
    for (double xi : x) {
        const double d = xi - mean;
        v += d * d;
    }
    return v / static_cast<double>(x.size());
}

double mean_of(const Vec& x) {
    double s = 0.0;
    for (double xi : x) s += xi;
    return s / static_cast<double>(x.size());
}

} // namespace

double mse(const Vec& y, const Vec& yhat) {
    if (y.empty()) throw TsragError(ErrorCategory::DIM_MISMATCH, "mse: empty input");
    require_len(yhat, y.size(), "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - yhat[i];
        s += d * d;
    }
    return s / static_cast<double>(y.size());
}

double mae(const Vec& y, const Vec& yhat) {
    if (y.empty()) throw TsragError(ErrorCategory::DIM_MISMATCH, "mae: empty input");
    require_len(yhat, y.size(), "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
    return s / static_cast<double>(y.size());
}

double pearson_corr(const Vec& xs, const Vec& ys) {
    if (xs.size() < 2) throw TsragError(ErrorCategory::DIM_MISMATCH, "pearson: need >= 2 points");
    require_len(ys, xs.size(), "pearson");
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw TsragError(ErrorCategory::NUMERIC, "pearson: zero variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

Characteristics characteristics(const Vec& series) {
    if (series.size() < 3) {
        throw TsragError(ErrorCategory::DIM_MISMATCH, "characteristics: need >= 3 points");
    }
    constexpr double kEps = 1e-8;
    Characteristics c;

    const double mean = mean_of(series);
    const double var = population_var(series, mean);
    const double sd = std::sqrt(var);

    Vec diffs(series.size() - 1);
    for (std::size_t i = 0; i + 1 < series.size(); ++i) diffs[i] = series[i + 1] - series[i];
    const double dvar = population_var(diffs, mean_of(diffs));

    c.stationarity = dvar;
    c.noise_ratio = dvar / std::max(var, kEps);

    if (sd < kEps) {
        c.degenerate = true;
        c.autocorr_lag1 = 0.0;
        c.volatility = 0.0;
        return c;
    }

    const double denom = std::abs(mean) < kEps ? (mean < 0.0 ? -kEps : kEps) : mean;
    c.volatility = sd / denom;

    Vec head(series.begin(), series.end() - 1);
    Vec tail(series.begin() + 1, series.end());
    c.autocorr_lag1 = pearson_corr(head, tail);
    return c;
}

} // namespace tsrag
