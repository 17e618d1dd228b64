#ifndef TSRAG_SERIES_HPP
#define TSRAG_SERIES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tsrag/linalg.hpp"

namespace tsrag {

// One univariate channel. `offset` is the position of values[0] within the
// parent series, so windows cut from split segments keep absolute origins.
struct Series {
    std::string id;
    Vec values;
    std::string source_tag;
    std::uint64_t offset = 0;
};

struct WindowStats {
    double mean = 0.0;
    double std = 1.0;
    // Set when the raw window was (near-)constant and std got clamped.
    bool degenerate = false;
};

// Identifies the source window of a pair or KB entry.
struct WindowOrigin {
    std::string series_id;
    std::uint64_t start = 0;

    bool operator==(const WindowOrigin& o) const {
        return start == o.start && series_id == o.series_id;
    }
};

// Context window plus the horizon that immediately follows it, both in raw
// units; norm_stats are the context's own mean/std.
struct TimeSeriesPair {
    Vec context;
    Vec horizon;
    WindowOrigin origin;
    WindowStats norm_stats;
    std::string source_tag;
};

struct GlobalScaler {
    double mean = 0.0;
    double std = 1.0;
    std::string fitted_on; // split identifier, e.g. "train"
};

struct SplitSpec {
    double train_frac = 0.6;
    double val_frac = 0.2;
    double test_frac = 0.2;
};

struct SplitResult {
    Series train;
    Series val;
    Series test;
};

// Population mean/std with the degenerate-window guard (std clamped to 1e-8).
WindowStats compute_window_stats(const Vec& window);

Vec zscore(const Vec& window, const WindowStats& stats);
Vec denormalize(const Vec& window, const WindowStats& stats);

// Global standardization fitted on one split only (used for reported metrics).
GlobalScaler fit_global_scaler(const std::vector<Series>& split, const std::string& split_name);
double standardize(double x, const GlobalScaler& s);

// Contiguous chronological segments; fractions must sum to 1 within 1e-9.
SplitResult split_series(const Series& series, const SplitSpec& spec);

// Sliding windows at starts 0, stride, 2*stride, ... while start <= len-(T+L).
// A series shorter than T+L yields an empty list.
std::vector<TimeSeriesPair> make_pairs(const Series& series, std::size_t context_len,
                                       std::size_t horizon_len, std::size_t stride);

} // namespace tsrag

#endif
