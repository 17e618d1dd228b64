#include "tsrag/distance.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "tsrag/error.hpp"

namespace tsrag {

DistanceMetric DistanceMetric::parse(const std::string& name, int band) {
    DistanceMetric m;
    if (name == "euclidean") {
        m.kind = MetricKind::Euclidean;
    } else if (name == "cosine") {
        m.kind = MetricKind::Cosine;
    } else if (name == "dtw") {
        m.kind = MetricKind::Dtw;
        if (band > 0) m.band = band;
    } else {
        throw TsragError(ErrorCategory::FORMAT, "unknown distance metric: " + name);
    }
    if (band < 0) throw TsragError(ErrorCategory::FORMAT, "dtw band must be >= 1");
    return m;
}

std::string DistanceMetric::name() const {
    switch (kind) {
        case MetricKind::Euclidean: return "euclidean";
        case MetricKind::Cosine: return "cosine";
        case MetricKind::Dtw:
            return band ? "dtw(band=" + std::to_string(*band) + ")" : "dtw";
    }
    return "?";
}

double euclidean_distance(const Vec& a, const Vec& b) {
    require_len(b, a.size(), "euclidean");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double cosine_distance(const Vec& a, const Vec& b) {
    require_len(b, a.size(), "cosine");
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na == 0.0 && nb == 0.0) return 0.0;
    if (na == 0.0 || nb == 0.0) return 1.0;
    return 1.0 - dot(a, b) / (na * nb);
}

double dtw_distance(const Vec& a, const Vec& b, std::optional<int> band) {
    if (a.empty() || b.empty()) {
        throw TsragError(ErrorCategory::DIM_MISMATCH, "dtw: empty input");
    }
    if (band && *band < 1) throw TsragError(ErrorCategory::FORMAT, "dtw band must be >= 1");

    const std::size_t n = a.size();
    const std::size_t m = b.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Two-row DP over squared costs.
    Vec prev(m, kInf), cur(m, kInf);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j_lo = 0, j_hi = m - 1;
        if (band) {
            const long w = *band;
            const long lo = static_cast<long>(i) - w;
            const long hi = static_cast<long>(i) + w;
            j_lo = lo > 0 ? static_cast<std::size_t>(lo) : 0;
            j_hi = hi < static_cast<long>(m - 1) ? static_cast<std::size_t>(hi) : m - 1;
        }
        std::fill(cur.begin(), cur.end(), kInf);
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const double d = a[i] - b[j];
            const double cost = d * d;
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = kInf;
                if (i > 0) best = std::min(best, prev[j]);
                if (j > 0) best = std::min(best, cur[j - 1]);
                if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
            }
            cur[j] = cost + best;
        }
        std::swap(prev, cur);
    }
    return std::sqrt(prev[m - 1]);
}

double distance(const Vec& a, const Vec& b, const DistanceMetric& metric) {
    switch (metric.kind) {
        case MetricKind::Euclidean: return euclidean_distance(a, b);
        case MetricKind::Cosine: return cosine_distance(a, b);
        case MetricKind::Dtw: return dtw_distance(a, b, metric.band);
    }
    std::abort();
}

} // namespace tsrag
