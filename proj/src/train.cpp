#include "tsrag/train.hpp"

#include <cmath>

#include "tsrag/adamw.hpp"
#include "tsrag/binio.hpp"
#include "tsrag/error.hpp"
#include "tsrag/rng.hpp"

namespace tsrag {

namespace {
constexpr std::uint32_t kEngineVersion = 1;
const char kEngineMagic[4] = {'T', 'S', 'R', 'E'};

struct BatchSample {
    Vec e_q;
    Vec y_norm;
    std::vector<Vec> horizons;
    std::size_t pair_index;
};

// Shared preamble of both training loops: encode the query and retrieve its
// analogues with the self-match excluded.
BatchSample prepare_sample(const TimeSeriesPair& pair, const KnowledgeBase& kb,
                           const BackboneParams& backbone, std::size_t k,
                           const DistanceMetric& metric, std::size_t pair_index) {
    BatchSample s;
    s.pair_index = pair_index;
    const Vec xn = zscore(pair.context, pair.norm_stats);
    s.e_q = encode(xn, backbone);
    s.y_norm = zscore(pair.horizon, pair.norm_stats);
    QueryKey key;
    key.embedding = s.e_q;
    key.context_norm = xn;
    key.stats = pair.norm_stats;
    RetrievedSet retrieved = top_k(kb, key, k, metric, pair.origin);
    s.horizons.reserve(retrieved.items.size());
    for (auto& item : retrieved.items) s.horizons.push_back(std::move(item.horizon));
    return s;
}

void check_train_inputs(const std::vector<TimeSeriesPair>& pairs, const KnowledgeBase& kb,
                        const BackboneParams& backbone, const TrainConfig& config) {
    config.validate();
    if (pairs.empty()) throw TsragError(ErrorCategory::FORMAT, "train: empty pair set");
    if (!backbone.frozen) {
        throw TsragError(ErrorCategory::FORMAT, "train: backbone must be frozen before training");
    }
    const std::uint64_t h = backbone_hash(backbone);
    if (kb.meta.encoder_hash != h) {
        throw TsragError(ErrorCategory::HASH_MISMATCH,
                         "train: KB encoder " + hash_hex(kb.meta.encoder_hash) +
                             " does not match the active backbone " + hash_hex(h));
    }
}

// dL/d(e_final) for L = mean((proj(e_final) - y)^2); the projection head is
// frozen, so the gradient stops there and flows only into the mixer.
double loss_and_upstream(const Vec& e_final, const Vec& y_norm, const BackboneParams& backbone,
                         Vec& d_e_final) {
    const Vec yhat = project(e_final, backbone);
    const std::size_t L = y_norm.size();
    Vec dy(L);
    double loss = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
        const double diff = yhat[j] - y_norm[j];
        loss += diff * diff;
        dy[j] = 2.0 * diff / static_cast<double>(L);
    }
    d_e_final = matvec(backbone.proj_head, dy);
    return loss / static_cast<double>(L);
}

std::vector<std::size_t> sample_batch(Rng& rng, std::size_t n, std::size_t batch) {
    std::vector<std::size_t> idx(std::min(batch, n));
    for (auto& i : idx) i = rng.below(n);
    return idx;
}

} // namespace

void TrainConfig::validate() const {
    if (lr <= 0.0) throw TsragError(ErrorCategory::FORMAT, "train config: lr must be > 0");
    if (steps < 1) throw TsragError(ErrorCategory::FORMAT, "train config: steps must be >= 1");
    if (batch_size < 1) throw TsragError(ErrorCategory::FORMAT, "train config: batch_size must be >= 1");
}

TrainResult train_arm(const std::vector<TimeSeriesPair>& pairs, const KnowledgeBase& kb,
                      const BackboneParams& backbone, const ArmParams& init,
                      const TrainConfig& config) {
    check_train_inputs(pairs, kb, backbone, config);

    TrainResult result;
    result.params = init;
    result.params.config.dropout_p = config.dropout_p;
    result.loss_curve.reserve(config.steps);

    AdamWHyper hyper{config.lr, config.beta1, config.beta2, config.eps, config.weight_decay};
    auto tensors = result.params.tensors();
    AdamWState state = AdamWState::init(tensors, hyper);

    for (std::size_t step = 0; step < config.steps; ++step) {
        Rng batch_rng(mix_seed(config.seed, step));
        const auto batch = sample_batch(batch_rng, pairs.size(), config.batch_size);
        const double inv_batch = 1.0 / static_cast<double>(batch.size());

        ArmGrads total;
        total.tensors_like = zeros_like(result.params);
        total.d_e_q.assign(result.params.config.d, 0.0);
        double step_loss = 0.0;

        for (std::size_t bi = 0; bi < batch.size(); ++bi) {
            const auto& pair = pairs[batch[bi]];
            BatchSample s =
                prepare_sample(pair, kb, backbone, config.k, config.metric, batch[bi]);
            const std::uint64_t dropout_seed = mix_seed(mix_seed(config.seed, step), bi + 1);
            ArmTrace trace =
                arm_forward(s.e_q, s.horizons, result.params, ArmMode::Train, dropout_seed);
            Vec d_e_final;
            step_loss += loss_and_upstream(trace.e_final, s.y_norm, backbone, d_e_final);
            for (double& x : d_e_final) x *= inv_batch;
            ArmGrads g = arm_backward(trace, d_e_final, result.params, s.e_q, s.horizons);
            total.accumulate(g);
        }
        step_loss *= inv_batch;
        if (!std::isfinite(step_loss)) {
            throw TsragError(ErrorCategory::NUMERIC,
                             "train_arm: non-finite loss at step " + std::to_string(step) +
                                 " (first pair index " + std::to_string(batch.front()) + ")");
        }

        std::vector<const Vec*> grads;
        for (Vec* g : total.tensors()) grads.push_back(g);
        adamw_step(tensors, grads, state);
        result.loss_curve.push_back(step_loss);
    }
    return result;
}

GateTrainResult train_gate(const std::vector<TimeSeriesPair>& pairs, const KnowledgeBase& kb,
                           const BackboneParams& backbone, const GateParams& init,
                           const TrainConfig& config) {
    check_train_inputs(pairs, kb, backbone, config);

    GateTrainResult result;
    result.params = init;
    result.loss_curve.reserve(config.steps);

    AdamWHyper hyper{config.lr, config.beta1, config.beta2, config.eps, config.weight_decay};
    auto tensors = result.params.tensors();
    AdamWState state = AdamWState::init(tensors, hyper);

    for (std::size_t step = 0; step < config.steps; ++step) {
        Rng batch_rng(mix_seed(config.seed, step));
        const auto batch = sample_batch(batch_rng, pairs.size(), config.batch_size);
        const double inv_batch = 1.0 / static_cast<double>(batch.size());

        GateParams total = init_gate(result.params.config);
        for (Vec* t : total.tensors()) std::fill(t->begin(), t->end(), 0.0);
        double step_loss = 0.0;

        for (std::size_t bi = 0; bi < batch.size(); ++bi) {
            const auto& pair = pairs[batch[bi]];
            BatchSample s =
                prepare_sample(pair, kb, backbone, config.k, config.metric, batch[bi]);
            GateTrace trace = gated_fusion_forward(s.e_q, s.horizons, result.params);
            Vec d_e_final;
            step_loss += loss_and_upstream(trace.e_final, s.y_norm, backbone, d_e_final);
            for (double& x : d_e_final) x *= inv_batch;
            GateGrads g =
                gated_fusion_backward(trace, d_e_final, result.params, s.e_q, s.horizons);
            auto mine = total.tensors();
            auto theirs = g.tensors_like.tensors();
            for (std::size_t t = 0; t < mine.size(); ++t) {
                for (std::size_t i = 0; i < mine[t]->size(); ++i) {
                    (*mine[t])[i] += (*theirs[t])[i];
                }
            }
        }
        step_loss *= inv_batch;
        if (!std::isfinite(step_loss)) {
            throw TsragError(ErrorCategory::NUMERIC,
                             "train_gate: non-finite loss at step " + std::to_string(step));
        }

        std::vector<const Vec*> grads;
        for (Vec* g : total.tensors()) grads.push_back(g);
        adamw_step(tensors, grads, state);
        result.loss_curve.push_back(step_loss);
    }
    return result;
}

namespace {

void write_train_config(BinWriter& w, const TrainConfig& c) {
    w.f64(c.lr);
    w.f64(c.weight_decay);
    w.f64(c.beta1);
    w.f64(c.beta2);
    w.f64(c.eps);
    w.u64(c.batch_size);
    w.u64(c.steps);
    w.u64(c.seed);
    w.u64(c.k);
    w.f64(c.dropout_p);
    w.u64(c.eval_every);
    w.str(c.metric.name());
}

TrainConfig read_train_config(BinReader& r) {
    TrainConfig c;
    c.lr = r.f64();
    c.weight_decay = r.f64();
    c.beta1 = r.f64();
    c.beta2 = r.f64();
    c.eps = r.f64();
    c.batch_size = r.u64();
    c.steps = r.u64();
    c.seed = r.u64();
    c.k = r.u64();
    c.dropout_p = r.f64();
    c.eval_every = r.u64();
    const std::string metric_name = r.str();
    // band is embedded in the name for dtw; stored configs only need the kind
    if (metric_name.rfind("dtw", 0) == 0) {
        c.metric = DistanceMetric::parse("dtw");
    } else {
        c.metric = DistanceMetric::parse(metric_name);
    }
    return c;
}

} // namespace

void save_engine(const EngineCheckpoint& engine, const std::string& path) {
    BinWriter w;
    w.magic(kEngineMagic);
    w.u32(kEngineVersion);
    w.u64(engine.backbone_hash);
    const ArmConfig& ac = engine.arm.config;
    w.u64(ac.k);
    w.u64(ac.d);
    w.u64(ac.heads);
    w.u64(ac.ffn_hidden);
    w.f64(ac.dropout_p);
    w.u64(ac.proj_hidden);
    w.u64(ac.horizon_len);
    w.u64(ac.seed);
    for (const Vec* t : engine.arm.tensors()) w.vec(*t);
    write_train_config(w, engine.train_config);
    w.write_file(path);
}

EngineCheckpoint load_engine(const std::string& path) {
    BinReader r = BinReader::from_file(path);
    r.expect_magic(kEngineMagic, "engine checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kEngineVersion) {
        throw TsragError(ErrorCategory::FORMAT,
                         "engine checkpoint: unsupported version " + std::to_string(version));
    }
    EngineCheckpoint e;
    e.backbone_hash = r.u64();
    ArmConfig ac;
    ac.k = r.u64();
    ac.d = r.u64();
    ac.heads = r.u64();
    ac.ffn_hidden = r.u64();
    ac.dropout_p = r.f64();
    ac.proj_hidden = r.u64();
    ac.horizon_len = r.u64();
    ac.seed = r.u64();
    ac.validate();
    e.arm = init_arm(ac);
    for (Vec* t : e.arm.tensors()) {
        Vec loaded = r.vec();
        if (loaded.size() != t->size()) {
            throw TsragError(ErrorCategory::DIM_MISMATCH,
                             "engine checkpoint: tensor size " + std::to_string(loaded.size()) +
                                 " does not match config (" + std::to_string(t->size()) + ")");
        }
        *t = std::move(loaded);
    }
    e.train_config = read_train_config(r);
    if (!r.at_end()) throw TsragError(ErrorCategory::FORMAT, "engine checkpoint: trailing bytes");
    return e;
}

EngineCheckpoint load_engine(const std::string& path, std::uint64_t active_backbone_hash,
                             bool allow_hash_mismatch) {
    EngineCheckpoint e = load_engine(path);
    if (e.backbone_hash != active_backbone_hash && !allow_hash_mismatch) {
        throw TsragError(ErrorCategory::HASH_MISMATCH,
                         "engine checkpoint references backbone " + hash_hex(e.backbone_hash) +
                             " but the active backbone is " + hash_hex(active_backbone_hash));
    }
    return e;
}

} // namespace tsrag
