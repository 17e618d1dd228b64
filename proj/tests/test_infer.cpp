#include <doctest.h>

#include <cmath>

#include "tsrag/error.hpp"
#include "tsrag/harness.hpp"
#include "tsrag/infer.hpp"
#include "tsrag/rng.hpp"
#include "tsrag/train.hpp"

using namespace tsrag;

namespace {

RunConfig fixture_config() {
    RunConfig cfg;
    cfg.seed = 31;
    cfg.n_series = 6;
    cfg.series_len = 700;
    cfg.motif_bank_size = 4;
    cfg.motif_min_period = 8;
    cfg.motif_max_period = 24;
    cfg.noise_std = 0.1;
    cfg.context_len = 64;
    cfg.horizon_len = 16;
    cfg.kb_stride = 7;
    cfg.eval_stride = 8;
    cfg.patch_len = 16;
    cfg.embed_dim = 16;
    cfg.backbone_epochs = 20;
    cfg.backbone_lr = 2e-3;
    cfg.backbone_batch = 32;
    cfg.heads = 2;
    cfg.ffn_hidden = 32;
    cfg.proj_hidden = 16;
    cfg.dropout_p = 0.1;
    cfg.k = 5;
    cfg.train.steps = 40;
    cfg.train.batch_size = 8;
    return cfg;
}

struct Fixture {
    Pipeline pl;
    ForecastOptions opts;
};

Fixture& fixture() {
    static Fixture f = [] {
        Fixture fx;
        fx.pl = run_pipeline(fixture_config());
        fx.opts.k = 5;
        fx.opts.metric = DistanceMetric::parse("euclidean");
        return fx;
    }();
    return f;
}

} // namespace

TEST_CASE("forecast: bypass equals the raw backbone path") {
    auto& f = fixture();
    const Vec ctx = f.pl.eval_pairs.front().context;

    ForecastOptions bypass = f.opts;
    bypass.bypass_arm = true;
    const ForecastResult res = forecast(ctx, f.pl.engine, f.pl.kb, bypass);
    CHECK(res.bypassed);

    const QueryKey key = embed_query(ctx, f.pl.engine.backbone);
    const Vec expected = denormalize(project(key.embedding, f.pl.engine.backbone), key.stats);
    CHECK(res.values == expected);
}

TEST_CASE("forecast: k=0 takes the degenerate mixer path with the fallback flag") {
    auto& f = fixture();
    const Vec ctx = f.pl.eval_pairs.front().context;

    ForecastOptions zero = f.opts;
    zero.k = 0;
    const ForecastResult res = forecast(ctx, f.pl.engine, f.pl.kb, zero);
    CHECK(res.fallback);
    CHECK(!res.bypassed);
    REQUIRE(res.rounds.size() == 1);
    CHECK(res.rounds[0].alpha == Vec{1.0});
    CHECK(res.rounds[0].indices.empty());

    // equals the k=0 mixer path recomputed by hand
    const QueryKey key = embed_query(ctx, f.pl.engine.backbone);
    const ArmTrace tr = arm_forward(key.embedding, {}, f.pl.engine.arm, ArmMode::Eval);
    const Vec expected = denormalize(project(tr.e_final, f.pl.engine.backbone), key.stats);
    CHECK(res.values == expected);

    SUBCASE("empty KB behaves the same") {
        const KnowledgeBase empty = build_kb({}, f.pl.engine.backbone, "in-domain");
        const ForecastResult res2 = forecast(ctx, f.pl.engine, empty, f.opts);
        CHECK(res2.fallback);
        CHECK(res2.values == expected);
    }
}

TEST_CASE("forecast: verbatim KB context is retrieved at distance zero") {
    auto& f = fixture();
    const auto& pair = f.pl.kb_pairs.front();
    ForecastOptions one = f.opts;
    one.k = 1;
    const ForecastResult res = forecast(pair.context, f.pl.engine, f.pl.kb, one);
    REQUIRE(res.rounds.size() == 1);
    REQUIRE(res.rounds[0].indices.size() == 1);
    CHECK(res.rounds[0].indices[0] == 0);
    CHECK(res.rounds[0].distances[0] == 0.0);
}

TEST_CASE("forecast: trace is exactly what produced the output") {
    auto& f = fixture();
    const Vec ctx = f.pl.eval_pairs.back().context;
    const ForecastResult res = forecast(ctx, f.pl.engine, f.pl.kb, f.opts);

    const QueryKey key = embed_query(ctx, f.pl.engine.backbone);
    const RetrievedSet r = top_k(f.pl.kb, key, f.opts.k, f.opts.metric);
    std::vector<Vec> horizons;
    for (const auto& item : r.items) horizons.push_back(item.horizon);
    const ArmTrace tr = arm_forward(key.embedding, horizons, f.pl.engine.arm, ArmMode::Eval);

    REQUIRE(res.rounds.size() == 1);
    for (std::size_t i = 0; i < r.items.size(); ++i) {
        CHECK(res.rounds[0].indices[i] == r.items[i].index);
        CHECK(res.rounds[0].distances[i] == r.items[i].dist);
    }
    CHECK(res.rounds[0].alpha == tr.alpha);
    CHECK(res.values == denormalize(project(tr.e_final, f.pl.engine.backbone), key.stats));

    double sum = 0.0;
    for (double a : res.rounds[0].alpha) sum += a;
    CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("forecast: affine-rescaled query retrieves the same indices") {
    auto& f = fixture();
    const Vec ctx = f.pl.eval_pairs.front().context;
    Vec scaled(ctx.size());
    const double a = 2.5, b = -7.0;
    for (std::size_t i = 0; i < ctx.size(); ++i) scaled[i] = a * ctx[i] + b;

    const ForecastResult r1 = forecast(ctx, f.pl.engine, f.pl.kb, f.opts);
    const ForecastResult r2 = forecast(scaled, f.pl.engine, f.pl.kb, f.opts);

    CHECK(r1.rounds[0].indices == r2.rounds[0].indices);
    // inverse affine on the scaled-run forecast reproduces the base forecast
    for (std::size_t i = 0; i < r1.values.size(); ++i) {
        CHECK(std::abs((r2.values[i] - b) / a - r1.values[i]) < 1e-8);
    }
}

TEST_CASE("forecast is deterministic and read-only") {
    auto& f = fixture();
    const Vec ctx = f.pl.eval_pairs[1].context;
    const auto backbone_before = serialize_backbone(f.pl.engine.backbone);
    const auto kb_before = f.pl.kb.embedding_matrix.data;
    std::vector<Vec> arm_copy;
    for (const Vec* t : f.pl.engine.arm.tensors()) arm_copy.push_back(*t);

    const ForecastResult r1 = forecast(ctx, f.pl.engine, f.pl.kb, f.opts);
    const ForecastResult r2 = forecast(ctx, f.pl.engine, f.pl.kb, f.opts);
    CHECK(r1.values == r2.values);
    CHECK(r1.rounds[0].alpha == r2.rounds[0].alpha);

    CHECK(serialize_backbone(f.pl.engine.backbone) == backbone_before);
    CHECK(f.pl.kb.embedding_matrix.data == kb_before);
    auto arm_after = f.pl.engine.arm.tensors();
    for (std::size_t i = 0; i < arm_after.size(); ++i) CHECK(*arm_after[i] == arm_copy[i]);
}

TEST_CASE("rolling_forecast") {
    auto& f = fixture();
    const std::size_t L = 16;
    const Vec ctx = f.pl.eval_pairs.front().context;

    SUBCASE("H = L is bitwise identical to a single forecast") {
        const ForecastResult single = forecast(ctx, f.pl.engine, f.pl.kb, f.opts);
        const ForecastResult rolled = rolling_forecast(ctx, L, f.pl.engine, f.pl.kb, f.opts);
        CHECK(rolled.values == single.values);
        CHECK(rolled.rounds.size() == 1);
        CHECK(rolled.rounds[0].alpha == single.rounds[0].alpha);
    }

    SUBCASE("H = 2L: the second round sees the first round's forecast") {
        const ForecastResult rolled = rolling_forecast(ctx, 2 * L, f.pl.engine, f.pl.kb, f.opts);
        REQUIRE(rolled.rounds.size() == 2);
        REQUIRE(rolled.values.size() == 2 * L);

        const ForecastResult first = forecast(ctx, f.pl.engine, f.pl.kb, f.opts);
        Vec window(ctx.begin() + L, ctx.end());
        window.insert(window.end(), first.values.begin(), first.values.end());
        const ForecastResult second = forecast(window, f.pl.engine, f.pl.kb, f.opts);
        for (std::size_t i = 0; i < L; ++i) {
            CHECK(rolled.values[i] == first.values[i]);
            CHECK(rolled.values[L + i] == second.values[i]);
        }
    }

    SUBCASE("H = L + 1 truncates the second round") {
        const ForecastResult rolled = rolling_forecast(ctx, L + 1, f.pl.engine, f.pl.kb, f.opts);
        CHECK(rolled.values.size() == L + 1);
        CHECK(rolled.rounds.size() == 2);
    }

    SUBCASE("H = 0 is rejected") {
        CHECK_THROWS_AS(rolling_forecast(ctx, 0, f.pl.engine, f.pl.kb, f.opts), TsragError);
    }
}

TEST_CASE("measure_latency") {
    auto& f = fixture();
    std::vector<Vec> queries;
    for (std::size_t i = 0; i < 3; ++i) queries.push_back(f.pl.eval_pairs[i].context);

    SUBCASE("single repetition, no warmup") {
        const LatencyReport rep =
            measure_latency(f.pl.engine, f.pl.kb, queries, 5, f.opts.metric, 1, 0);
        CHECK(rep.iterations == 3);
        CHECK(rep.retrieval_ms_per_iter >= 0.0);
        CHECK(rep.forward_ms_per_iter > 0.0);
        CHECK(rep.total_ms_per_iter ==
              doctest::Approx(rep.retrieval_ms_per_iter + rep.forward_ms_per_iter)
                  .epsilon(1e-12));
    }

    SUBCASE("warmup iterations are excluded from the count") {
        const LatencyReport rep =
            measure_latency(f.pl.engine, f.pl.kb, queries, 5, f.opts.metric, 2, 1);
        CHECK(rep.iterations == 6);
    }

    SUBCASE("no queries is an error") {
        CHECK_THROWS_AS(measure_latency(f.pl.engine, f.pl.kb, {}, 5, f.opts.metric), TsragError);
    }

    SUBCASE("retrieval time trends upward with KB size (loose)") {
        // 10x the KB by replicating entries through build_kb
        std::vector<TimeSeriesPair> big;
        for (int rep = 0; rep < 10; ++rep) {
            for (const auto& p : f.pl.kb_pairs) big.push_back(p);
        }
        const auto big_kb = build_kb(big, f.pl.engine.backbone, "in-domain");
        const LatencyReport small =
            measure_latency(f.pl.engine, f.pl.kb, queries, 5, f.opts.metric, 5, 2);
        const LatencyReport large =
            measure_latency(f.pl.engine, big_kb, queries, 5, f.opts.metric, 5, 2);
        CHECK(large.retrieval_ms_per_iter >= 0.5 * small.retrieval_ms_per_iter);
    }
}

TEST_CASE("forecast rejects dimension and hash mismatches") {
    auto& f = fixture();
    CHECK_THROWS_AS(forecast(Vec(10, 0.0), f.pl.engine, f.pl.kb, f.opts), TsragError);

    BackboneConfig other_cfg = f.pl.engine.backbone.config;
    other_cfg.seed = 999;
    auto other = init_backbone(other_cfg);
    other.frozen = true;
    const auto other_kb = build_kb(f.pl.kb_pairs, other, "in-domain");
    try {
        forecast(f.pl.eval_pairs.front().context, f.pl.engine, other_kb, f.opts);
        FAIL("expected");
    } catch (const TsragError& e) {
        CHECK(e.category() == ErrorCategory::HASH_MISMATCH);
    }
}
