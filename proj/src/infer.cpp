#include "tsrag/infer.hpp"

#include <chrono>
#include <cmath>

#include "tsrag/error.hpp"

namespace tsrag {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_compat(const Engine& engine, const KnowledgeBase& kb) {
    const auto& cfg = engine.backbone.config;
    if (engine.arm.config.d != cfg.embed_dim || engine.arm.config.horizon_len != cfg.horizon_len) {
        throw TsragError(ErrorCategory::DIM_MISMATCH,
                         "engine: mixer dims do not match the backbone");
    }
    if (kb.size() > 0 &&
        (kb.meta.context_len != cfg.context_len || kb.meta.horizon_len != cfg.horizon_len ||
         kb.meta.embed_dim != cfg.embed_dim)) {
        throw TsragError(ErrorCategory::DIM_MISMATCH, "knowledge base dims do not match engine");
    }
    if (kb.size() > 0 && kb.meta.encoder_hash != backbone_hash(engine.backbone)) {
        throw TsragError(ErrorCategory::HASH_MISMATCH,
                         "knowledge base encoder does not match the engine backbone");
    }
}

} // namespace

ForecastResult forecast(const Vec& context_raw, const Engine& engine, const KnowledgeBase& kb,
                        const ForecastOptions& opts) {
    const auto& cfg = engine.backbone.config;
    require_len(context_raw, cfg.context_len, "forecast context");
    check_compat(engine, kb);

    ForecastResult res;
    const auto t0 = Clock::now();

    // Query stats drive both normalization and the final denormalization.
    QueryKey key = embed_query(context_raw, engine.backbone, 0);
    // Retrieval may look at a masked suffix of the window; the mixer always
    // consumes the full-context embedding.
    QueryKey retrieval_key;
    const bool masked = opts.lookback > 0 && opts.lookback < cfg.context_len;
    if (masked) retrieval_key = embed_query(context_raw, engine.backbone, opts.lookback);
    const QueryKey& search_key = masked ? retrieval_key : key;

    RetrievedSet retrieved;
    double retrieval_ms = 0.0;
    if (!opts.bypass_arm && opts.k > 0 && kb.size() > 0) {
        const auto ts = Clock::now();
        retrieved = top_k(kb, search_key, opts.k, opts.metric);
        retrieval_ms = ms_since(ts);
    }
    res.retrieval_ms = retrieval_ms;
    res.fallback = !opts.bypass_arm && retrieved.items.empty();
    res.bypassed = opts.bypass_arm;

    Vec e_final;
    RoundTrace trace;
    if (opts.bypass_arm) {
        e_final = key.embedding;
    } else {
        std::vector<Vec> horizons;
        horizons.reserve(retrieved.items.size());
        for (auto& item : retrieved.items) {
            trace.indices.push_back(item.index);
            trace.distances.push_back(item.dist);
            horizons.push_back(std::move(item.horizon));
        }
        ArmTrace mixer = arm_forward(key.embedding, horizons, engine.arm, ArmMode::Eval);
        trace.alpha = mixer.alpha;
        e_final = mixer.e_final;
    }

    const Vec y_norm = project(e_final, engine.backbone);
    res.values = denormalize(y_norm, key.stats);
    for (double v : res.values) {
        if (!std::isfinite(v)) {
            throw TsragError(ErrorCategory::NUMERIC, "forecast produced a non-finite value");
        }
    }
    res.rounds.push_back(std::move(trace));
    res.forward_ms = ms_since(t0) - retrieval_ms;
    return res;
}

ForecastResult rolling_forecast(const Vec& context_raw, std::size_t total_horizon,
                                const Engine& engine, const KnowledgeBase& kb,
                                const ForecastOptions& opts) {
    if (total_horizon < 1) {
        throw TsragError(ErrorCategory::FORMAT, "rolling_forecast: horizon must be >= 1");
    }
    const std::size_t L = engine.backbone.config.horizon_len;
    ForecastResult res;
    Vec window = context_raw;
    while (res.values.size() < total_horizon) {
        ForecastResult round = forecast(window, engine, kb, opts);
        res.retrieval_ms += round.retrieval_ms;
        res.forward_ms += round.forward_ms;
        res.fallback = res.fallback || round.fallback;
        res.bypassed = round.bypassed;
        res.rounds.push_back(std::move(round.rounds.front()));
        for (double v : round.values) res.values.push_back(v);
        // Slide: drop the oldest L points, append the L-step forecast.
        window.erase(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(L));
        window.insert(window.end(), round.values.begin(), round.values.end());
    }
    res.values.resize(total_horizon);
    return res;
}

LatencyReport measure_latency(const Engine& engine, const KnowledgeBase& kb,
                              const std::vector<Vec>& query_contexts, std::size_t k,
                              const DistanceMetric& metric, std::size_t repetitions,
                              std::size_t warmup) {
    if (query_contexts.empty()) {
        throw TsragError(ErrorCategory::FORMAT, "measure_latency: need at least one query");
    }
    check_compat(engine, kb);

    LatencyReport rep;
    double retrieval_total = 0.0;
    double forward_total = 0.0;
    std::size_t counted = 0;

    for (std::size_t r = 0; r < warmup + repetitions; ++r) {
        for (const Vec& ctx : query_contexts) {
            const auto t0 = Clock::now();
            QueryKey key = embed_query(ctx, engine.backbone, 0);
            const double embed_ms = ms_since(t0);

            const auto t1 = Clock::now();
            RetrievedSet retrieved = top_k(kb, key, k, metric);
            const double search_ms = ms_since(t1);

            const auto t2 = Clock::now();
            std::vector<Vec> horizons;
            horizons.reserve(retrieved.items.size());
            for (auto& item : retrieved.items) horizons.push_back(std::move(item.horizon));
            ArmTrace mixer = arm_forward(key.embedding, horizons, engine.arm, ArmMode::Eval);
            (void)project(mixer.e_final, engine.backbone);
            const double mix_ms = ms_since(t2);

            if (r >= warmup) {
                retrieval_total += search_ms;
                forward_total += embed_ms + mix_ms;
                ++counted;
            }
        }
    }
    rep.iterations = counted;
    if (counted > 0) {
        rep.retrieval_ms_per_iter = retrieval_total / static_cast<double>(counted);
        rep.forward_ms_per_iter = forward_total / static_cast<double>(counted);
        rep.total_ms_per_iter = rep.retrieval_ms_per_iter + rep.forward_ms_per_iter;
    }
    return rep;
}

} // namespace tsrag
