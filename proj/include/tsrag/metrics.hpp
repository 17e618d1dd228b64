#ifndef TSRAG_METRICS_HPP
#define TSRAG_METRICS_HPP

#include "tsrag/linalg.hpp"

namespace tsrag {

// Plain per-horizon means; inputs are expected to be globally standardized
// already when used for reported results.
double mse(const Vec& y, const Vec& yhat);
double mae(const Vec& y, const Vec& yhat);

// Sample Pearson r; throws (NUMERIC) when either side has zero variance.
double pearson_corr(const Vec& xs, const Vec& ys);

struct Characteristics {
    double autocorr_lag1 = 0.0;
    double noise_ratio = 0.0;
    double volatility = 0.0;
    double stationarity = 0.0;
    bool degenerate = false; // constant input: autocorr undefined, reported 0
};

// autocorr_lag1  Pearson correlation of (x_t, x_{t+1})
// noise_ratio    var(diff(x)) / var(x)          (white noise -> 2)
// volatility     std(x) / mean(x), sign kept    (|mean| floored at 1e-8)
// stationarity   var(diff(x))
Characteristics characteristics(const Vec& series);

} // namespace tsrag

#endif
