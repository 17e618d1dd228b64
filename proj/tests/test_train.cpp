#include <doctest.h>

#include <cmath>
#include <fstream>

#include "tsrag/adamw.hpp"
#include "tsrag/error.hpp"
#include "tsrag/harness.hpp"
#include "tsrag/train.hpp"

using namespace tsrag;

namespace {

// Small end-to-end fixture: short windows so training is fast.
RunConfig tiny_run_config() {
    RunConfig cfg;
    cfg.seed = 2024;
    cfg.n_series = 8;
    cfg.series_len = 700;
    cfg.motif_bank_size = 4;
    cfg.motif_min_period = 8;
    cfg.motif_max_period = 24;
    cfg.noise_std = 0.1;
    cfg.context_len = 64;
    cfg.horizon_len = 16;
    cfg.kb_stride = 7;
    cfg.eval_stride = 4;
    cfg.patch_len = 16;
    cfg.embed_dim = 16;
    cfg.backbone_epochs = 30;
    cfg.backbone_lr = 2e-3;
    cfg.backbone_batch = 32;
    cfg.heads = 2;
    cfg.ffn_hidden = 32;
    cfg.proj_hidden = 16;
    cfg.dropout_p = 0.1;
    cfg.k = 5;
    cfg.train.steps = 60;
    cfg.train.batch_size = 8;
    cfg.train.lr = 1e-3;
    return cfg;
}

struct Fixture {
    std::vector<TimeSeriesPair> pairs;
    BackboneParams backbone;
    KnowledgeBase kb;
    TrainConfig tc;
    ArmConfig arm_cfg;
};

Fixture make_fixture() {
    const RunConfig cfg = tiny_run_config();
    Fixture f;
    const auto corpus = regime_corpus(cfg, "in-domain");
    f.pairs = train_pairs(corpus, cfg);
    PretrainOptions popts;
    popts.epochs = cfg.backbone_epochs;
    popts.lr = cfg.backbone_lr;
    f.backbone = pretrain_backbone(f.pairs, cfg.backbone_config(), popts).params;
    f.kb = build_kb(f.pairs, f.backbone, "in-domain");
    f.tc = cfg.train;
    f.tc.k = cfg.k;
    f.tc.dropout_p = cfg.dropout_p;
    f.arm_cfg = cfg.arm_config();
    return f;
}

} // namespace

TEST_CASE("adamw: zero gradients") {
    Vec w{1.0, -2.0, 3.0};
    Vec g(3, 0.0);
    std::vector<Vec*> params{&w};
    std::vector<const Vec*> grads{&g};

    SUBCASE("no decay leaves weights untouched") {
        AdamWHyper h;
        h.weight_decay = 0.0;
        auto st = AdamWState::init(params, h);
        adamw_step(params, grads, st);
        CHECK(w == Vec{1.0, -2.0, 3.0});
    }

    SUBCASE("decoupled decay multiplies by (1 - lr*wd)") {
        AdamWHyper h;
        h.lr = 0.1;
        h.weight_decay = 0.01;
        auto st = AdamWState::init(params, h);
        adamw_step(params, grads, st);
        CHECK(w[0] == doctest::Approx(1.0 * (1.0 - 0.001)).epsilon(1e-15));
        CHECK(w[1] == doctest::Approx(-2.0 * (1.0 - 0.001)).epsilon(1e-15));
        CHECK(w[2] == doctest::Approx(3.0 * (1.0 - 0.001)).epsilon(1e-15));
    }
}

TEST_CASE("adamw: two steps of the hand-computed recurrence") {
    // Single scalar, constant gradient 1, no decay. Hand-rolled recurrence:
    //   m_t = b1 m + (1-b1); v_t = b2 v + (1-b2)
    //   w  -= lr * (m_t / (1-b1^t)) / (sqrt(v_t / (1-b2^t)) + eps)
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double w_ref = 0.5, m = 0.0, v = 0.0;
    for (int t = 1; t <= 2; ++t) {
        m = b1 * m + (1 - b1) * 1.0;
        v = b2 * v + (1 - b2) * 1.0;
        const double mhat = m / (1 - std::pow(b1, t));
        const double vhat = v / (1 - std::pow(b2, t));
        w_ref -= lr * mhat / (std::sqrt(vhat) + eps);
    }

    Vec w{0.5};
    Vec g{1.0};
    std::vector<Vec*> params{&w};
    std::vector<const Vec*> grads{&g};
    AdamWHyper h;
    h.lr = lr;
    h.weight_decay = 0.0;
    auto st = AdamWState::init(params, h);
    adamw_step(params, grads, st);
    adamw_step(params, grads, st);
    CHECK(w[0] == doctest::Approx(w_ref).epsilon(1e-15));
}

TEST_CASE("adamw rejects NaN gradients with a diagnostic") {
    Vec w{1.0};
    Vec g{std::nan("")};
    std::vector<Vec*> params{&w};
    std::vector<const Vec*> grads{&g};
    auto st = AdamWState::init(params, AdamWHyper{});
    try {
        adamw_step(params, grads, st);
        FAIL("expected");
    } catch (const TsragError& e) {
        CHECK(e.category() == ErrorCategory::NUMERIC);
        CHECK(std::string(e.what()).find("tensor 0") != std::string::npos);
    }
    CHECK(w[0] == 1.0); // step aborted before mutation
}

TEST_CASE("train_arm: freeze contract, determinism, loss decrease") {
    Fixture f = make_fixture();
    const auto backbone_before = serialize_backbone(f.backbone);

    TrainResult r1 = train_arm(f.pairs, f.kb, f.backbone, init_arm(f.arm_cfg), f.tc);
    CHECK(serialize_backbone(f.backbone) == backbone_before);

    REQUIRE(r1.loss_curve.size() == f.tc.steps);
    for (double l : r1.loss_curve) CHECK(std::isfinite(l));

    SUBCASE("same seed reproduces the loss curve and parameters") {
        TrainResult r2 = train_arm(f.pairs, f.kb, f.backbone, init_arm(f.arm_cfg), f.tc);
        CHECK(r1.loss_curve == r2.loss_curve);
        auto t1 = r1.params.tensors();
        auto t2 = r2.params.tensors();
        for (std::size_t i = 0; i < t1.size(); ++i) CHECK(*t1[i] == *t2[i]);
    }

    SUBCASE("longer run reduces the loss substantially") {
        TrainConfig longer = f.tc;
        longer.steps = 200;
        TrainResult r = train_arm(f.pairs, f.kb, f.backbone, init_arm(f.arm_cfg), longer);
        // average the first and last 10 steps to wash out batch noise
        double head = 0.0, tail = 0.0;
        for (std::size_t i = 0; i < 10; ++i) {
            head += r.loss_curve[i];
            tail += r.loss_curve[r.loss_curve.size() - 1 - i];
        }
        CHECK(tail < 0.7 * head); // >= 30% reduction
    }

    SUBCASE("only ARM tensors change") {
        // the KB must also stay bit-identical
        const auto kb_before = f.kb.embedding_matrix.data;
        TrainResult r = train_arm(f.pairs, f.kb, f.backbone, init_arm(f.arm_cfg), f.tc);
        CHECK(f.kb.embedding_matrix.data == kb_before);

        const ArmParams fresh = init_arm(f.arm_cfg);
        auto before = fresh.tensors();
        auto after = r.params.tensors();
        const auto names = ArmParams::tensor_names();
        for (std::size_t t = 0; t < before.size(); ++t) {
            // score_b is exempt: softmax shift invariance makes its gradient
            // analytically zero, so it only moves by float-noise drift
            if (names[t] == "score_b") continue;
            CHECK(*after[t] != *before[t]);
        }
    }
}

TEST_CASE("train_arm input validation") {
    Fixture f = make_fixture();

    SUBCASE("empty pairs") {
        CHECK_THROWS_AS(train_arm({}, f.kb, f.backbone, init_arm(f.arm_cfg), f.tc), TsragError);
    }

    SUBCASE("unfrozen backbone") {
        BackboneParams thawed = f.backbone;
        thawed.frozen = false;
        CHECK_THROWS_AS(train_arm(f.pairs, f.kb, thawed, init_arm(f.arm_cfg), f.tc), TsragError);
    }

    SUBCASE("encoder hash mismatch") {
        BackboneConfig other_cfg = f.backbone.config;
        other_cfg.seed = 777;
        auto other = init_backbone(other_cfg);
        other.frozen = true;
        try {
            train_arm(f.pairs, f.kb, other, init_arm(f.arm_cfg), f.tc);
            FAIL("expected");
        } catch (const TsragError& e) {
            CHECK(e.category() == ErrorCategory::HASH_MISMATCH);
        }
    }
}

TEST_CASE("training-time retrieval excludes the query's own origin") {
    Fixture f = make_fixture();
    // the KB is built from the same pairs used for training; for every pair,
    // the exclusion filter must drop exactly the self window
    for (std::size_t i = 0; i < std::min<std::size_t>(f.pairs.size(), 20); ++i) {
        const auto& pair = f.pairs[i];
        QueryKey q = embed_query(pair.context, f.backbone);
        const auto metric = DistanceMetric::parse("euclidean");
        const auto without = top_k(f.kb, q, f.kb.size(), metric, pair.origin);
        CHECK(without.items.size() == f.kb.size() - 1);
        for (const auto& item : without.items) {
            CHECK(!(f.kb.entries[item.index].origin == pair.origin));
        }
    }
}

TEST_CASE("train_gate runs and reduces loss") {
    Fixture f = make_fixture();
    TrainConfig tc = f.tc;
    tc.steps = 120;
    GateTrainResult r = train_gate(f.pairs, f.kb, f.backbone, init_gate(f.arm_cfg), tc);
    REQUIRE(r.loss_curve.size() == tc.steps);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        head += r.loss_curve[i];
        tail += r.loss_curve[r.loss_curve.size() - 1 - i];
    }
    CHECK(tail < head);
}

TEST_CASE("engine checkpoint round-trip and corruption") {
    Fixture f = make_fixture();
    TrainConfig tc = f.tc;
    tc.steps = 5;
    TrainResult r = train_arm(f.pairs, f.kb, f.backbone, init_arm(f.arm_cfg), tc);

    EngineCheckpoint e;
    e.backbone_hash = backbone_hash(f.backbone);
    e.arm = r.params;
    e.train_config = tc;
    const std::string path = "/tmp/tsrag_engine_test.ckpt";
    save_engine(e, path);

    const auto back = load_engine(path, e.backbone_hash);
    CHECK(back.backbone_hash == e.backbone_hash);
    CHECK(back.arm.config == e.arm.config);
    auto ta = e.arm.tensors();
    auto tb = back.arm.tensors();
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i] == *tb[i]);
    CHECK(back.train_config.lr == tc.lr);
    CHECK(back.train_config.steps == tc.steps);

    SUBCASE("wrong backbone hash is refused") {
        try {
            load_engine(path, 1234);
            FAIL("expected");
        } catch (const TsragError& e2) {
            CHECK(e2.category() == ErrorCategory::HASH_MISMATCH);
        }
    }

    SUBCASE("truncated file is FORMAT") {
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(path + ".t", std::ios::binary);
        out << bytes.substr(0, bytes.size() - 20);
        out.close();
        try {
            load_engine(path + ".t");
            FAIL("expected");
        } catch (const TsragError& e2) {
            CHECK(e2.category() == ErrorCategory::FORMAT);
        }
    }
}
