// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// asserted criterion fails. Soft checks print their numbers but only the
// documented assertions gate the result.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <vector>

#include "tsrag/binio.hpp"
#include "tsrag/error.hpp"
#include "tsrag/harness.hpp"
#include "tsrag/infer.hpp"
#include "tsrag/metrics.hpp"
#include "tsrag/rng.hpp"
#include "tsrag/train.hpp"

using namespace tsrag;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s  [%2d] %s — %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

// Benchmark config shared by criteria 4-7 and 10 (desk-scale defaults).
RunConfig benchmark_config() {
    RunConfig cfg;
    cfg.seed = 20250810;
    cfg.n_series = 60;
    cfg.series_len = 4000;
    cfg.motif_bank_size = 8;
    cfg.noise_std = 0.1;
    cfg.context_len = 512;
    cfg.horizon_len = 64;
    cfg.kb_stride = 64;
    cfg.eval_stride = 1;
    cfg.patch_len = 64;
    cfg.embed_dim = 64;
    cfg.backbone_epochs = 40;
    cfg.backbone_lr = 1e-3;
    cfg.backbone_batch = 64;
    cfg.heads = 4;
    cfg.ffn_hidden = 256;
    cfg.proj_hidden = 64;
    cfg.dropout_p = 0.2;
    cfg.k = 10;
    cfg.train.lr = 3e-4;
    cfg.train.weight_decay = 0.01;
    cfg.train.batch_size = 32;
    cfg.train.steps = 1000;
    cfg.train.seed = 7;
    return cfg;
}

// ---------------------------------------------------------------- criterion 1

std::vector<std::pair<double, std::size_t>> oracle_sort(const KnowledgeBase& kb,
                                                        const QueryKey& q, std::size_t k,
                                                        const DistanceMetric& metric) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(kb.size());
    for (std::size_t i = 0; i < kb.size(); ++i) {
        Vec row(kb.embedding_matrix.row(i), kb.embedding_matrix.row(i) + kb.meta.embed_dim);
        const double d = metric.uses_embeddings()
                             ? distance(q.embedding, row, metric)
                             : distance(q.context_norm, kb.entries[i].context, metric);
        scored.emplace_back(d, i);
    }
    std::sort(scored.begin(), scored.end());
    scored.resize(std::min(k, scored.size()));
    return scored;
}

void criterion_1_retrieval_oracle() {
    const auto t0 = Clock::now();
    BackboneConfig bc;
    bc.context_len = 64;
    bc.horizon_len = 16;
    bc.patch_len = 16;
    bc.embed_dim = 16;
    bc.seed = 1001;
    const auto encoder = init_backbone(bc);

    Rng rng(555);
    std::vector<TimeSeriesPair> pairs(1000);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto& p = pairs[i];
        p.context.resize(bc.context_len);
        p.horizon.resize(bc.horizon_len);
        for (auto& v : p.context) v = rng.gaussian();
        for (auto& v : p.horizon) v = rng.gaussian();
        p.origin = {"rand-" + std::to_string(i), 0};
        p.norm_stats = compute_window_stats(p.context);
    }
    // engineered ties: 50 exact duplicates scattered through the index
    for (std::size_t i = 0; i < 50; ++i) {
        pairs[900 + i].context = pairs[i * 7].context;
        pairs[900 + i].horizon = pairs[i * 7].horizon;
        pairs[900 + i].norm_stats = pairs[i * 7].norm_stats;
    }
    const auto kb = build_kb(pairs, encoder, "in-domain");

    std::size_t mismatches = 0;
    std::size_t comparisons = 0;
    for (std::size_t qi = 0; qi < 100; ++qi) {
        Vec raw(bc.context_len);
        for (auto& v : raw) v = rng.gaussian();
        // every 10th query duplicates a stored context to force 0-distance ties
        if (qi % 10 == 0) raw = denormalize(pairs[qi].context, pairs[qi].norm_stats);
        const QueryKey q = embed_query(raw, encoder);
        for (const char* name : {"euclidean", "cosine", "dtw"}) {
            const auto metric = DistanceMetric::parse(name);
            for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{10},
                                  std::size_t{1000}}) {
                const auto got = top_k(kb, q, k, metric);
                const auto want = oracle_sort(kb, q, k, metric);
                if (got.items.size() != want.size()) {
                    ++mismatches;
                    continue;
                }
                for (std::size_t i = 0; i < want.size(); ++i) {
                    ++comparisons;
                    if (got.items[i].index != want[i].second ||
                        got.items[i].dist != want[i].first) {
                        ++mismatches;
                    }
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%zu (index,distance) comparisons, %zu mismatches, %.1f s (< 60 s)", comparisons,
                  mismatches, secs);
    report(1, mismatches == 0 && secs < 60.0, "retrieval equals brute-force oracle", detail);
}

// ---------------------------------------------------------------- criterion 2

bool fd_matches(double fd, double analytic, double& worst) {
    const double scale = std::max(std::abs(fd), std::abs(analytic));
    if (scale < 1e-7) return true;
    const double rel = std::abs(fd - analytic) / scale;
    worst = std::max(worst, rel);
    return rel < 1e-4;
}

void criterion_2_gradient_suite() {
    const auto t0 = Clock::now();
    const double h = 1e-5;
    bool ok = true;
    double worst = 0.0;
    std::size_t checked = 0;

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ArmConfig cfg;
        cfg.k = 3;
        cfg.d = 8;
        cfg.heads = 2;
        cfg.ffn_hidden = 16;
        cfg.proj_hidden = 8;
        cfg.horizon_len = 8;
        cfg.dropout_p = 0.0;
        cfg.seed = seed;
        ArmParams params = init_arm(cfg);

        Rng rng(seed * 31 + 5);
        Vec e_q(cfg.d), r(cfg.d);
        for (auto& v : e_q) v = rng.gaussian();
        for (auto& v : r) v = rng.gaussian();
        std::vector<Vec> horizons(cfg.k, Vec(cfg.horizon_len));
        for (auto& hh : horizons) {
            for (auto& v : hh) v = rng.gaussian();
        }

        const ArmTrace tr = arm_forward(e_q, horizons, params, ArmMode::Eval);
        const ArmGrads grads = arm_backward(tr, r, params, e_q, horizons);

        auto loss = [&](const ArmParams& p) {
            return dot(r, arm_forward(e_q, horizons, p, ArmMode::Eval).e_final);
        };

        auto tensors = params.tensors();
        auto gtensors = grads.tensors();
        for (std::size_t t = 0; t < tensors.size() && ok; ++t) {
            Vec& w = *tensors[t];
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double keep = w[i];
                w[i] = keep + h;
                const double up = loss(params);
                w[i] = keep - h;
                const double dn = loss(params);
                w[i] = keep;
                ++checked;
                if (!fd_matches((up - dn) / (2 * h), (*gtensors[t])[i], worst)) ok = false;
            }
        }
        for (std::size_t i = 0; i < e_q.size(); ++i) {
            const double keep = e_q[i];
            e_q[i] = keep + h;
            const double up = dot(r, arm_forward(e_q, horizons, params, ArmMode::Eval).e_final);
            e_q[i] = keep - h;
            const double dn = dot(r, arm_forward(e_q, horizons, params, ArmMode::Eval).e_final);
            e_q[i] = keep;
            ++checked;
            if (!fd_matches((up - dn) / (2 * h), grads.d_e_q[i], worst)) ok = false;
        }

        // gated-fusion baseline: scalar gate plus its projector
        GateParams gate = init_gate(cfg);
        gate.gate[0] = 0.4;
        const GateTrace gtr = gated_fusion_forward(e_q, horizons, gate);
        const GateGrads ggr = gated_fusion_backward(gtr, r, gate, e_q, horizons);
        {
            const double keep = gate.gate[0];
            gate.gate[0] = keep + h;
            const double up = dot(r, gated_fusion_forward(e_q, horizons, gate).e_final);
            gate.gate[0] = keep - h;
            const double dn = dot(r, gated_fusion_forward(e_q, horizons, gate).e_final);
            gate.gate[0] = keep;
            ++checked;
            if (!fd_matches((up - dn) / (2 * h), ggr.tensors_like.gate[0], worst)) ok = false;
        }
    }
    const double secs = seconds_since(t0);
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%zu partials over 5 seeds, worst rel err %.2e (< 1e-4), %.1f s (< 30 s)",
                  checked, worst, secs);
    report(2, ok && secs < 30.0, "ARM gradients match central finite differences", detail);
}

// ---------------------------------------------------------------- criterion 3

void criterion_3_arm_invariants() {
    Rng meta(777);
    bool ok = true;
    std::string why = "all held";
    for (int trial = 0; trial < 100 && ok; ++trial) {
        ArmConfig cfg;
        cfg.heads = 1 + meta.below(4);
        cfg.d = cfg.heads * (2 + meta.below(5));
        cfg.k = meta.below(7);
        cfg.ffn_hidden = 4 + meta.below(16);
        cfg.proj_hidden = 2 + meta.below(8);
        cfg.horizon_len = 4 + meta.below(12);
        cfg.dropout_p = 0.0;
        cfg.seed = meta.next_u64();
        const ArmParams params = init_arm(cfg);

        Rng rng(meta.next_u64());
        Vec e_q(cfg.d);
        for (auto& v : e_q) v = rng.gaussian();
        std::vector<Vec> horizons(cfg.k, Vec(cfg.horizon_len));
        for (auto& hh : horizons) {
            for (auto& v : hh) v = rng.gaussian();
        }

        const ArmTrace tr = arm_forward(e_q, horizons, params, ArmMode::Eval);

        double sum = 0.0;
        for (double a : tr.alpha) sum += a;
        if (std::abs(sum - 1.0) > 1e-9) {
            ok = false;
            why = "alpha sum off";
            break;
        }

        for (std::size_t j = 0; j < cfg.d; ++j) {
            double s = e_q[j];
            for (std::size_t i = 0; i < tr.alpha.size(); ++i) s += tr.alpha[i] * tr.e_ffn(i, j);
            if (s != tr.e_final[j]) {
                ok = false;
                why = "trace decomposition not exact";
                break;
            }
        }

        if (cfg.k >= 2) {
            std::vector<Vec> rev(horizons.rbegin(), horizons.rend());
            const ArmTrace tr2 = arm_forward(e_q, rev, params, ArmMode::Eval);
            for (std::size_t j = 0; j < cfg.d; ++j) {
                if (std::abs(tr.e_final[j] - tr2.e_final[j]) > 1e-9) {
                    ok = false;
                    why = "permutation changed e_final";
                    break;
                }
            }
            for (std::size_t i = 0; i < cfg.k; ++i) {
                if (std::abs(tr2.alpha[1 + i] - tr.alpha[cfg.k - i]) > 1e-9) {
                    ok = false;
                    why = "alpha did not permute with the set";
                    break;
                }
            }
        }

        const ArmTrace teval = arm_forward(e_q, horizons, params, ArmMode::Eval);
        const ArmTrace ttrain = arm_forward(e_q, horizons, params, ArmMode::Train, 12345);
        if (teval.e_final != ttrain.e_final || teval.alpha != ttrain.alpha) {
            ok = false;
            why = "train(p=0) differs from eval";
        }
    }
    report(3, ok, "ARM invariants over 100 random configurations", why);
}

// ----------------------------------------------------------- criteria 4-7, 10

void criterion_4_freeze_contract() {
    RunConfig cfg = benchmark_config();
    cfg.n_series = 12;
    cfg.series_len = 2000;
    cfg.train.steps = 200;

    const auto corpus = regime_corpus(cfg, "in-domain");
    const auto pairs = train_pairs(corpus, cfg);
    PretrainOptions popts{cfg.backbone_epochs, cfg.backbone_lr, 0.0, cfg.backbone_batch};
    const auto backbone = pretrain_backbone(pairs, cfg.backbone_config(), popts).params;
    const auto kb = build_kb(pairs, backbone, "in-domain");

    const auto backbone_before = serialize_backbone(backbone);
    const auto kb_before = kb.embedding_matrix.data;
    const ArmParams init = init_arm(cfg.arm_config());

    TrainConfig tc = cfg.train;
    tc.k = cfg.k;
    tc.dropout_p = cfg.dropout_p;
    const TrainResult res = train_arm(pairs, kb, backbone, init, tc);

    const bool backbone_frozen = serialize_backbone(backbone) == backbone_before;
    const bool kb_frozen = kb.embedding_matrix.data == kb_before;

    // changed set: every ARM tensor except score_b, whose gradient is
    // analytically zero (softmax shift invariance)
    auto before = init.tensors();
    auto after = res.params.tensors();
    const auto names = ArmParams::tensor_names();
    std::size_t changed = 0;
    bool non_scoreb_ok = true;
    for (std::size_t t = 0; t < before.size(); ++t) {
        const bool moved = *after[t] != *before[t];
        if (moved) ++changed;
        if (names[t] != "score_b" && !moved) non_scoreb_ok = false;
    }
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "backbone bytes %s, KB bytes %s, %zu/18 ARM tensors changed "
                  "(score_b exempt: gradient identically zero)",
                  backbone_frozen ? "identical" : "CHANGED", kb_frozen ? "identical" : "CHANGED",
                  changed);
    report(4, backbone_frozen && kb_frozen && non_scoreb_ok,
           "freeze contract over 200 training steps", detail);
}

struct BenchmarkRun {
    RunConfig cfg;
    Pipeline pl;
    EvalReport in_domain_report;
};

BenchmarkRun run_benchmark() {
    BenchmarkRun b;
    b.cfg = benchmark_config();
    b.pl = run_pipeline(b.cfg);

    EvalOptions opts;
    opts.k = b.cfg.k;
    opts.metric = b.cfg.distance_metric();
    opts.fingerprint = b.cfg.fingerprint();
    b.in_domain_report = evaluate(b.pl.eval_pairs, b.pl.engine, b.pl.kb, b.pl.scaler, opts);
    return b;
}

void criterion_5_directional_improvement(const BenchmarkRun& b, double pipeline_secs) {
    const EvalRow& row = b.in_domain_report.overall();
    const bool pass = row.mse <= 0.98 * row.baseline_mse;
    char detail[220];
    std::snprintf(detail, sizeof(detail),
                  "TS-RAG MSE %.5f vs backbone %.5f (%.2f%% reduction, need >= 2%%) on %zu "
                  "windows; pipeline %.0f s (< 600 s)",
                  row.mse, row.baseline_mse, row.mse_delta_pct, row.n_windows, pipeline_secs);
    report(5, pass && pipeline_secs < 600.0, "in-domain retrieval beats the frozen backbone",
           detail);
}

void criterion_6_regime_ordering(const BenchmarkRun& b) {
    EvalOptions opts;
    opts.k = b.cfg.k;
    opts.metric = b.cfg.distance_metric();
    opts.fingerprint = b.cfg.fingerprint();

    std::vector<std::pair<std::string, double>> mses;
    mses.emplace_back("in-domain", b.in_domain_report.overall().mse);
    const double baseline = b.in_domain_report.overall().baseline_mse;

    for (const auto& regime : kb_regimes()) {
        if (regime == "in-domain") continue;
        const auto corpus = regime_corpus(b.cfg, regime);
        const auto kb = build_kb(train_pairs(corpus, b.cfg), b.pl.engine.backbone, regime);
        const EvalReport rep = evaluate(b.pl.eval_pairs, b.pl.engine, kb, b.pl.scaler, opts);
        mses.emplace_back(regime, rep.overall().mse);
    }

    const double in_domain = mses.front().second;
    bool in_domain_best = true;
    std::string soft_failures;
    std::string summary;
    for (const auto& [name, m] : mses) {
        summary += name + "=" + std::to_string(m).substr(0, 7) + " ";
        if (m + 1e-6 < in_domain && name != "in-domain") in_domain_best = false;
        if (m > baseline) soft_failures += name + " ";
    }
    std::string detail = summary + "backbone=" + std::to_string(baseline).substr(0, 7);
    if (!soft_failures.empty()) {
        detail += " | soft check: regimes not beating backbone: " + soft_failures;
    }
    report(6, in_domain_best, "in-domain KB achieves the lowest MSE across regimes", detail);
}

void criterion_7_rolling(const BenchmarkRun& b) {
    const std::size_t L = b.cfg.horizon_len;

    ForecastOptions fopts;
    fopts.k = b.cfg.k;
    fopts.metric = b.cfg.distance_metric();

    // H = L equals the single forecast bitwise
    const Vec& probe = b.pl.eval_pairs.front().context;
    const ForecastResult single = forecast(probe, b.pl.engine, b.pl.kb, fopts);
    const ForecastResult rolled = rolling_forecast(probe, L, b.pl.engine, b.pl.kb, fopts);
    const bool bitwise = single.values == rolled.values;

    // H = 4L directional check on long test windows
    RunConfig long_cfg = b.cfg;
    long_cfg.eval_stride = 16;
    const auto long_pairs = test_pairs_long(b.pl.corpus, long_cfg, 4);

    double se_rag = 0.0, se_base = 0.0;
    std::size_t n_pts = 0;
    ForecastOptions bypass = fopts;
    bypass.bypass_arm = true;
    for (const auto& pair : long_pairs) {
        const ForecastResult rag =
            rolling_forecast(pair.context, 4 * L, b.pl.engine, b.pl.kb, fopts);
        const ForecastResult base =
            rolling_forecast(pair.context, 4 * L, b.pl.engine, b.pl.kb, bypass);
        for (std::size_t i = 0; i < 4 * L; ++i) {
            const double y = standardize(pair.horizon[i], b.pl.scaler);
            const double dr = y - standardize(rag.values[i], b.pl.scaler);
            const double db = y - standardize(base.values[i], b.pl.scaler);
            se_rag += dr * dr;
            se_base += db * db;
            ++n_pts;
        }
    }
    const double mse_rag = se_rag / double(n_pts);
    const double mse_base = se_base / double(n_pts);

    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "H=L bitwise %s; H=4L rolling MSE %.5f vs backbone %.5f on %zu windows",
                  bitwise ? "identical" : "DIFFERS", mse_rag, mse_base, long_pairs.size());
    report(7, bitwise && mse_rag < mse_base, "rolling forecasts stay ahead of the backbone",
           detail);
}

// ---------------------------------------------------------------- criterion 8

void criterion_8_metric_oracles() {
    bool ok = true;
    std::string why = "all held";

    // exact hand values on 3 fixed vectors
    ok = ok && mse({1, 2, 3}, {1, 2, 3}) == 0.0 && mae({1, 2, 3}, {1, 2, 3}) == 0.0;
    ok = ok && mse({0, 0}, {1, 1}) == 1.0 && mae({0, 0}, {1, 1}) == 1.0;
    ok = ok && mse({0, 2}, {1, 1}) == 1.0 && mae({0, 2}, {1, 1}) == 1.0;
    if (!ok) why = "hand-computed MSE/MAE values";

    // mae^2 <= mse on random evaluations
    if (ok) {
        Rng rng(31337);
        for (int i = 0; i < 500; ++i) {
            Vec y(16), yhat(16);
            for (auto& v : y) v = rng.gaussian();
            for (auto& v : yhat) v = rng.gaussian();
            const double m = mae(y, yhat);
            if (m * m > mse(y, yhat) + 1e-12) {
                ok = false;
                why = "mae^2 <= mse violated";
                break;
            }
        }
    }

    // white-noise characteristics
    if (ok) {
        Rng rng(27182818);
        Vec x(10000);
        for (auto& v : x) v = rng.gaussian();
        const Characteristics c = characteristics(x);
        if (std::abs(c.autocorr_lag1) >= 0.05 || std::abs(c.noise_ratio - 2.0) >= 0.1) {
            ok = false;
            why = "white-noise characteristics off";
        }
    }

    // frozen characteristics columns -> expected correlations
    if (ok) {
        const Vec autocorr{0.7799, 0.6070, 0.8437, 0.6848};
        const Vec noise{0.4391, 0.7217, 0.2915, 0.4480};
        const Vec volatility{3.1655, -0.5386, -0.9014, 17.9827};
        const Vec stationarity{0.1752, 0.0843, 0.0536, 0.0348};
        const Vec diff{0.0059, 0.0066, 0.0203, 0.0021};
        const bool corr_ok = std::abs(pearson_corr(autocorr, diff) - 0.70) < 0.01 &&
                             std::abs(pearson_corr(noise, diff) + 0.55) < 0.01 &&
                             std::abs(pearson_corr(volatility, diff) + 0.65) < 0.01 &&
                             std::abs(pearson_corr(stationarity, diff) + 0.19) < 0.01;
        if (!corr_ok) {
            ok = false;
            why = "published-column correlations";
        }
    }
    report(8, ok, "metric and characteristics oracles", why);
}

// ---------------------------------------------------------------- criterion 9

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_raw(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
}

bool fails_with(ErrorCategory want, const std::function<void()>& fn) {
    try {
        fn();
        return false;
    } catch (const TsragError& e) {
        return e.category() == want;
    } catch (...) {
        return false;
    }
}

void criterion_9_persistence() {
    BackboneConfig bc;
    bc.context_len = 64;
    bc.horizon_len = 16;
    bc.patch_len = 16;
    bc.embed_dim = 16;
    bc.seed = 99;
    auto backbone = init_backbone(bc);
    backbone.frozen = true;

    Rng rng(4242);
    std::vector<TimeSeriesPair> pairs(8);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        pairs[i].context.resize(bc.context_len);
        pairs[i].horizon.resize(bc.horizon_len);
        for (auto& v : pairs[i].context) v = rng.gaussian();
        for (auto& v : pairs[i].horizon) v = rng.gaussian();
        pairs[i].origin = {"p", i * 100};
        pairs[i].norm_stats = compute_window_stats(pairs[i].context);
    }
    const auto kb = build_kb(pairs, backbone, "in-domain");

    ArmConfig ac;
    ac.k = 4;
    ac.d = bc.embed_dim;
    ac.heads = 2;
    ac.ffn_hidden = 32;
    ac.proj_hidden = 8;
    ac.horizon_len = bc.horizon_len;
    ac.seed = 3;
    EngineCheckpoint engine;
    engine.backbone_hash = backbone_hash(backbone);
    engine.arm = init_arm(ac);

    const std::string dir = "/tmp/tsrag_acceptance_";
    bool ok = true;
    std::string why = "all round-trips byte-identical, all corruptions categorized";

    // byte-identical round-trips (save -> load -> save)
    save_backbone(backbone, dir + "b1");
    save_backbone(load_backbone(dir + "b1"), dir + "b2");
    if (read_file(dir + "b1") != read_file(dir + "b2")) {
        ok = false;
        why = "backbone round-trip";
    }
    save_kb(kb, dir + "k1");
    save_kb(load_kb(dir + "k1"), dir + "k2");
    if (read_file(dir + "k1") != read_file(dir + "k2")) {
        ok = false;
        why = "kb round-trip";
    }
    save_engine(engine, dir + "e1");
    save_engine(load_engine(dir + "e1"), dir + "e2");
    if (read_file(dir + "e1") != read_file(dir + "e2")) {
        ok = false;
        why = "engine round-trip";
    }

    // corruption taxonomy
    if (ok) {
        auto bad_magic = read_file(dir + "b1");
        bad_magic[0] = 'X';
        write_raw(dir + "bm", bad_magic);
        auto truncated = read_file(dir + "k1");
        truncated.resize(truncated.size() / 2);
        write_raw(dir + "tr", truncated);

        BackboneConfig wrong = bc;
        wrong.embed_dim = 32;

        const bool cat_ok =
            fails_with(ErrorCategory::FORMAT, [&] { load_backbone(dir + "bm"); }) &&
            fails_with(ErrorCategory::FORMAT, [&] { load_kb(dir + "tr"); }) &&
            fails_with(ErrorCategory::DIM_MISMATCH, [&] { load_backbone(dir + "b1", wrong); }) &&
            fails_with(ErrorCategory::HASH_MISMATCH, [&] { load_kb(dir + "k1", 1); }) &&
            fails_with(ErrorCategory::HASH_MISMATCH, [&] { load_engine(dir + "e1", 1); });
        if (!cat_ok) {
            ok = false;
            why = "corruption error categories";
        }
    }
    report(9, ok, "checkpoint persistence and corruption taxonomy", why);
}

// --------------------------------------------------------------- criterion 10

void criterion_10_latency(const BenchmarkRun& b) {
    // 100k-entry synthetic KB at benchmark dims. Built inside a lambda so the
    // intermediate window pairs are freed before measurement.
    const RunConfig& cfg = b.cfg;
    const std::size_t target = 100000;
    const auto kb = [&] {
        const std::size_t window = cfg.context_len + cfg.horizon_len;
        MotifBankOptions bopts;
        bopts.seed = cfg.seed + 1;
        bopts.size = cfg.motif_bank_size;
        MotifCorpusOptions copts;
        copts.seed = cfg.seed + 2;
        copts.n_series = 40;
        copts.series_len = window + 64 * (target / 40); // enough windows per series
        copts.noise_std = cfg.noise_std;
        const auto corpus = generate_motif_corpus(make_motif_bank(bopts), copts);
        std::vector<TimeSeriesPair> pairs;
        pairs.reserve(target);
        for (const auto& s : corpus) {
            for (auto& p : make_pairs(s, cfg.context_len, cfg.horizon_len, 64)) {
                if (pairs.size() < target) pairs.push_back(std::move(p));
            }
            if (pairs.size() >= target) break;
        }
        return build_kb(pairs, b.pl.engine.backbone, "multi-domain");
    }();

    std::vector<Vec> queries;
    for (std::size_t i = 0; i < 20; ++i) queries.push_back(b.pl.eval_pairs[i * 7].context);

    const LatencyReport rep =
        measure_latency(b.pl.engine, kb, queries, cfg.k, cfg.distance_metric(), 3, 1);

    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "%zu-entry KB: retrieval %.3f ms/iter, forward %.3f ms/iter, total %.3f "
                  "ms/iter over %zu iterations (reported, not asserted)",
                  kb.size(), rep.retrieval_ms_per_iter, rep.forward_ms_per_iter,
                  rep.total_ms_per_iter, rep.iterations);
    report(10, kb.size() == target && rep.iterations > 0, "latency instrumentation report",
           detail);
}

} // namespace

int main() {
    std::printf("TS-RAG acceptance suite\n=======================\n");
    const auto t0 = Clock::now();

    criterion_1_retrieval_oracle();
    criterion_2_gradient_suite();
    criterion_3_arm_invariants();
    criterion_4_freeze_contract();

    const auto tb = Clock::now();
    BenchmarkRun bench = run_benchmark();
    const double pipeline_secs = seconds_since(tb);

    criterion_5_directional_improvement(bench, pipeline_secs);
    criterion_6_regime_ordering(bench);
    criterion_7_rolling(bench);
    criterion_8_metric_oracles();
    criterion_9_persistence();
    criterion_10_latency(bench);

    std::printf("=======================\n%s (%d failure%s, %.0f s total)\n",
                g_failures == 0 ? "ALL CRITERIA PASS" : "ACCEPTANCE FAILED", g_failures,
                g_failures == 1 ? "" : "s", seconds_since(t0));
    return g_failures == 0 ? 0 : 1;
}
