#ifndef TSRAG_INFER_HPP
#define TSRAG_INFER_HPP

#include <cstdint>
#include <vector>

#include "tsrag/arm.hpp"
#include "tsrag/backbone.hpp"
#include "tsrag/kb.hpp"

namespace tsrag {

// All inference-time state: a frozen backbone and trained mixer weights.
struct Engine {
    BackboneParams backbone;
    ArmParams arm;
};

struct ForecastOptions {
    std::size_t k = 10;
    DistanceMetric metric;
    std::size_t lookback = 0; // 0 or >= T means the full context
    bool bypass_arm = false;  // pure backbone path, no retrieval
};

// Retrieval trace of one L-step round, for interpretability.
struct RoundTrace {
    std::vector<std::size_t> indices;
    Vec distances;
    Vec alpha;
};

struct ForecastResult {
    Vec values; // raw space, length H
    std::vector<RoundTrace> rounds;
    double retrieval_ms = 0.0;
    double forward_ms = 0.0;
    bool fallback = false; // empty KB or k = 0: nothing was retrieved
    bool bypassed = false;
};

// Zero-shot single-shot forecast (H = L): normalize by the window's own
// stats, embed, retrieve, mix in eval mode, project, denormalize by the same
// stats. Empty KB or k = 0 degenerates to the single-query-row mixer path
// with the fallback flag set; bypass_arm skips the mixer entirely.
ForecastResult forecast(const Vec& context_raw, const Engine& engine, const KnowledgeBase& kb,
                        const ForecastOptions& opts);

// ceil(H/L) rounds; each round appends its forecast and drops the oldest L
// points so the window stays length T, then re-retrieves. Output truncated
// to H. H = L is bitwise identical to forecast().
ForecastResult rolling_forecast(const Vec& context_raw, std::size_t total_horizon,
                                const Engine& engine, const KnowledgeBase& kb,
                                const ForecastOptions& opts);

struct LatencyReport {
    double retrieval_ms_per_iter = 0.0;
    double forward_ms_per_iter = 0.0;
    double total_ms_per_iter = 0.0;
    std::size_t iterations = 0;
};

// Wall-clock means over repetitions x queries with warm-up excluded.
// Reported only; never asserted against any particular hardware.
LatencyReport measure_latency(const Engine& engine, const KnowledgeBase& kb,
                              const std::vector<Vec>& query_contexts, std::size_t k,
                              const DistanceMetric& metric, std::size_t repetitions = 3,
                              std::size_t warmup = 1);

} // namespace tsrag

#endif
