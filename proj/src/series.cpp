#include "tsrag/series.hpp"

#include <cmath>

#include "tsrag/error.hpp"

namespace tsrag {

namespace {
constexpr double kStdFloor = 1e-8;
}

WindowStats compute_window_stats(const Vec& window) {
    WindowStats s;
    if (window.empty()) {
        s.degenerate = true;
        s.std = kStdFloor;
        return s;
    }
    // Exactly-constant windows take mean = the constant so zscore maps them
    // to exact zeros rather than rounding residue divided by the std floor.
    bool constant = true;
    for (double x : window) constant = constant && x == window.front();
    if (constant) {
        s.mean = window.front();
        s.std = kStdFloor;
        s.degenerate = true;
        return s;
    }
    double sum = 0.0;
    for (double x : window) sum += x;
    s.mean = sum / static_cast<double>(window.size());
    double var = 0.0;
    for (double x : window) {
        const double d = x - s.mean;
        var += d * d;
    }
    var /= static_cast<double>(window.size());
    s.std = std::sqrt(var);
    if (s.std < kStdFloor) {
        s.std = kStdFloor;
        s.degenerate = true;
    }
    return s;
}

Vec zscore(const Vec& window, const WindowStats& stats) {
    Vec out(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) out[i] = (window[i] - stats.mean) / stats.std;
    return out;
}

Vec denormalize(const Vec& window, const WindowStats& stats) {
    Vec out(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) out[i] = window[i] * stats.std + stats.mean;
    return out;
}

GlobalScaler fit_global_scaler(const std::vector<Series>& split, const std::string& split_name) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : split) {
        for (double x : s.values) sum += x;
        n += s.values.size();
    }
    if (n == 0) throw TsragError(ErrorCategory::FORMAT, "global scaler: no data in split");
    GlobalScaler g;
    g.mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (const auto& s : split) {
        for (double x : s.values) {
            const double d = x - g.mean;
            var += d * d;
        }
    }
    g.std = std::sqrt(var / static_cast<double>(n));
    if (g.std < kStdFloor) g.std = kStdFloor;
    g.fitted_on = split_name;
    return g;
}

double standardize(double x, const GlobalScaler& s) { return (x - s.mean) / s.std; }

SplitResult split_series(const Series& series, const SplitSpec& spec) {
    const double sum = spec.train_frac + spec.val_frac + spec.test_frac;
    if (std::abs(sum - 1.0) > 1e-9 || spec.train_frac < 0 || spec.val_frac < 0 ||
        spec.test_frac < 0) {
        throw TsragError(ErrorCategory::FORMAT, "split fractions must be >= 0 and sum to 1");
    }
    const std::size_t len = series.values.size();
    // +1e-9 absorbs binary representation error in e.g. 0.7 * 10.
    const auto n_train =
        static_cast<std::size_t>(std::floor(spec.train_frac * static_cast<double>(len) + 1e-9));
    const auto n_val =
        static_cast<std::size_t>(std::floor(spec.val_frac * static_cast<double>(len) + 1e-9));

    auto cut = [&](std::size_t begin, std::size_t count) {
        Series seg;
        seg.id = series.id;
        seg.source_tag = series.source_tag;
        seg.offset = series.offset + begin;
        seg.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(begin),
                          series.values.begin() + static_cast<std::ptrdiff_t>(begin + count));
        return seg;
    };

    SplitResult r;
    r.train = cut(0, n_train);
    r.val = cut(n_train, n_val);
    r.test = cut(n_train + n_val, len - n_train - n_val);
    return r;
}

std::vector<TimeSeriesPair> make_pairs(const Series& series, std::size_t context_len,
                                       std::size_t horizon_len, std::size_t stride) {
    if (stride == 0) throw TsragError(ErrorCategory::FORMAT, "stride must be positive");
    std::vector<TimeSeriesPair> pairs;
    const std::size_t window = context_len + horizon_len;
    if (series.values.size() < window) return pairs;

    const std::size_t last_start = series.values.size() - window;
    pairs.reserve(last_start / stride + 1);
    for (std::size_t start = 0; start <= last_start; start += stride) {
        TimeSeriesPair p;
        p.context.assign(series.values.begin() + static_cast<std::ptrdiff_t>(start),
                         series.values.begin() + static_cast<std::ptrdiff_t>(start + context_len));
        p.horizon.assign(
            series.values.begin() + static_cast<std::ptrdiff_t>(start + context_len),
            series.values.begin() + static_cast<std::ptrdiff_t>(start + window));
        p.origin.series_id = series.id;
        p.origin.start = series.offset + start;
        p.norm_stats = compute_window_stats(p.context);
        p.source_tag = series.source_tag;
        pairs.push_back(std::move(p));
    }
    return pairs;
}

} // namespace tsrag
