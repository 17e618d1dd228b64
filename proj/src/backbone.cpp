#include "tsrag/backbone.hpp"

#include <cmath>

#include "tsrag/adamw.hpp"
#include "tsrag/binio.hpp"
#include "tsrag/error.hpp"
#include "tsrag/rng.hpp"

namespace tsrag {

namespace {
constexpr std::uint32_t kBackboneVersion = 1;
const char kBackboneMagic[4] = {'T', 'S', 'R', 'B'};

void fill_uniform(Vec& v, double bound, Rng& rng) {
    for (double& x : v) x = rng.uniform(-bound, bound);
}
} // namespace

void BackboneConfig::validate() const {
    if (patch_len == 0 || context_len % patch_len != 0) {
        throw TsragError(ErrorCategory::DIM_MISMATCH,
                         "backbone config: context_len must be a multiple of patch_len");
    }
    if (embed_dim < 8) {
        throw TsragError(ErrorCategory::DIM_MISMATCH, "backbone config: embed_dim must be >= 8");
    }
    if (horizon_len < 1) {
        throw TsragError(ErrorCategory::DIM_MISMATCH, "backbone config: horizon_len must be >= 1");
    }
}

BackboneParams init_backbone(const BackboneConfig& config) {
    config.validate();
    BackboneParams p;
    p.config = config;
    p.patch_embed = Mat(config.patch_len, config.embed_dim);
    p.patch_bias.assign(config.embed_dim, 0.0);
    p.proj_head = Mat(config.embed_dim, config.horizon_len);
    p.proj_bias.assign(config.horizon_len, 0.0);
    Rng rng(config.seed);
    fill_uniform(p.patch_embed.data, 1.0 / std::sqrt(static_cast<double>(config.patch_len)), rng);
    fill_uniform(p.proj_head.data, 1.0 / std::sqrt(static_cast<double>(config.embed_dim)), rng);
    p.frozen = false;
    return p;
}

Vec encode(const Vec& context_norm, const BackboneParams& params) {
    const auto& cfg = params.config;
    require_len(context_norm, cfg.context_len, "encode context");
    const std::size_t n_patches = cfg.context_len / cfg.patch_len;
    Vec e(cfg.embed_dim, 0.0);
    for (std::size_t pi = 0; pi < n_patches; ++pi) {
        const double* patch = context_norm.data() + pi * cfg.patch_len;
        for (std::size_t j = 0; j < cfg.embed_dim; ++j) {
            double z = params.patch_bias[j];
            for (std::size_t i = 0; i < cfg.patch_len; ++i) {
                z += patch[i] * params.patch_embed(i, j);
            }
            e[j] += std::tanh(z);
        }
    }
    const double inv = 1.0 / static_cast<double>(n_patches);
    for (double& x : e) x *= inv;
    return e;
}

Vec project(const Vec& embedding, const BackboneParams& params) {
    require_len(embedding, params.config.embed_dim, "project embedding");
    Vec y = vecmat(embedding, params.proj_head);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += params.proj_bias[i];
    return y;
}

namespace {

// Forward with per-patch activations retained for the backward pass.
struct EncodeTrace {
    Mat patch_act; // n_patches x d, tanh outputs
    Vec embedding;
};

EncodeTrace encode_traced(const Vec& xn, const BackboneParams& p) {
    const auto& cfg = p.config;
    const std::size_t n_patches = cfg.context_len / cfg.patch_len;
    EncodeTrace tr;
    tr.patch_act = Mat(n_patches, cfg.embed_dim);
    tr.embedding.assign(cfg.embed_dim, 0.0);
    for (std::size_t pi = 0; pi < n_patches; ++pi) {
        const double* patch = xn.data() + pi * cfg.patch_len;
        for (std::size_t j = 0; j < cfg.embed_dim; ++j) {
            double z = p.patch_bias[j];
            for (std::size_t i = 0; i < cfg.patch_len; ++i) z += patch[i] * p.patch_embed(i, j);
            const double a = std::tanh(z);
            tr.patch_act(pi, j) = a;
            tr.embedding[j] += a;
        }
    }
    const double inv = 1.0 / static_cast<double>(n_patches);
    for (double& x : tr.embedding) x *= inv;
    return tr;
}

} // namespace

PretrainResult pretrain_backbone(const std::vector<TimeSeriesPair>& pairs,
                                 const BackboneConfig& config, const PretrainOptions& opts) {
    config.validate();
    if (pairs.empty()) {
        throw TsragError(ErrorCategory::FORMAT, "pretrain_backbone: empty corpus");
    }

    // Normalize every pair once, by its own context stats.
    std::vector<Vec> xs, ys;
    xs.reserve(pairs.size());
    ys.reserve(pairs.size());
    for (const auto& pr : pairs) {
        require_len(pr.context, config.context_len, "pretrain context");
        require_len(pr.horizon, config.horizon_len, "pretrain horizon");
        xs.push_back(zscore(pr.context, pr.norm_stats));
        ys.push_back(zscore(pr.horizon, pr.norm_stats));
    }

    BackboneParams p = init_backbone(config);
    std::vector<Vec*> tensors = {&p.patch_embed.data, &p.patch_bias, &p.proj_head.data,
                                 &p.proj_bias};
    AdamWHyper hyper;
    hyper.lr = opts.lr;
    hyper.weight_decay = opts.weight_decay;
    AdamWState state = AdamWState::init(tensors, hyper);

    const std::size_t n = pairs.size();
    const std::size_t batch = (opts.batch_size == 0 || opts.batch_size > n) ? n : opts.batch_size;
    const std::size_t n_patches = config.context_len / config.patch_len;
    const double inv_patches = 1.0 / static_cast<double>(n_patches);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    PretrainResult result;
    result.loss_curve.reserve(opts.epochs);

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        if (batch < n) {
            Rng shuffle_rng(mix_seed(config.seed, 0x5a5a + epoch));
            for (std::size_t i = n - 1; i > 0; --i) {
                const std::size_t j = shuffle_rng.below(i + 1);
                std::swap(order[i], order[j]);
            }
        }
        double epoch_loss = 0.0;
        for (std::size_t b0 = 0; b0 < n; b0 += batch) {
            const std::size_t b1 = std::min(n, b0 + batch);
            const double inv_batch = 1.0 / static_cast<double>(b1 - b0);

            Mat g_patch_w(config.patch_len, config.embed_dim);
            Vec g_patch_b(config.embed_dim, 0.0);
            Mat g_proj_w(config.embed_dim, config.horizon_len);
            Vec g_proj_b(config.horizon_len, 0.0);

            for (std::size_t bi = b0; bi < b1; ++bi) {
                const Vec& xn = xs[order[bi]];
                const Vec& yn = ys[order[bi]];
                EncodeTrace tr = encode_traced(xn, p);
                Vec yhat = project(tr.embedding, p);

                // dL/dyhat for L = mean squared error over the horizon
                Vec dy(config.horizon_len);
                double loss = 0.0;
                for (std::size_t j = 0; j < config.horizon_len; ++j) {
                    const double diff = yhat[j] - yn[j];
                    loss += diff * diff;
                    dy[j] = 2.0 * diff / static_cast<double>(config.horizon_len) * inv_batch;
                }
                epoch_loss += loss / static_cast<double>(config.horizon_len);

                // proj head
                Vec de(config.embed_dim, 0.0);
                for (std::size_t i = 0; i < config.embed_dim; ++i) {
                    const double ei = tr.embedding[i];
                    double s = 0.0;
                    for (std::size_t j = 0; j < config.horizon_len; ++j) {
                        g_proj_w(i, j) += ei * dy[j];
                        s += p.proj_head(i, j) * dy[j];
                    }
                    de[i] = s;
                }
                for (std::size_t j = 0; j < config.horizon_len; ++j) g_proj_b[j] += dy[j];

                // patch embed through mean + tanh
                for (std::size_t pi = 0; pi < n_patches; ++pi) {
                    const double* patch = xn.data() + pi * config.patch_len;
                    for (std::size_t j = 0; j < config.embed_dim; ++j) {
                        const double a = tr.patch_act(pi, j);
                        const double dz = de[j] * inv_patches * (1.0 - a * a);
                        if (dz == 0.0) continue;
                        for (std::size_t i = 0; i < config.patch_len; ++i) {
                            g_patch_w(i, j) += patch[i] * dz;
                        }
                        g_patch_b[j] += dz;
                    }
                }
            }

            std::vector<const Vec*> grads = {&g_patch_w.data, &g_patch_b, &g_proj_w.data,
                                             &g_proj_b};
            adamw_step(tensors, grads, state);
        }
        result.loss_curve.push_back(epoch_loss / static_cast<double>(n));
    }

    p.frozen = true;
    result.params = std::move(p);
    return result;
}

std::vector<std::uint8_t> serialize_backbone(const BackboneParams& params) {
    BinWriter w;
    w.magic(kBackboneMagic);
    w.u32(kBackboneVersion);
    w.u64(params.config.context_len);
    w.u64(params.config.horizon_len);
    w.u64(params.config.patch_len);
    w.u64(params.config.embed_dim);
    w.u64(params.config.seed);
    w.u8(params.frozen ? 1 : 0);
    w.mat(params.patch_embed);
    w.vec(params.patch_bias);
    w.mat(params.proj_head);
    w.vec(params.proj_bias);
    return w.bytes();
}

std::uint64_t backbone_hash(const BackboneParams& params) {
    const auto bytes = serialize_backbone(params);
    return fnv1a64(bytes.data(), bytes.size());
}

void save_backbone(const BackboneParams& params, const std::string& path) {
    write_bytes(serialize_backbone(params), path);
}

BackboneParams load_backbone(const std::string& path) {
    BinReader r = BinReader::from_file(path);
    r.expect_magic(kBackboneMagic, "backbone checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kBackboneVersion) {
        throw TsragError(ErrorCategory::FORMAT, "backbone checkpoint: unsupported version " +
                                                    std::to_string(version));
    }
    BackboneParams p;
    p.config.context_len = r.u64();
    p.config.horizon_len = r.u64();
    p.config.patch_len = r.u64();
    p.config.embed_dim = r.u64();
    p.config.seed = r.u64();
    p.frozen = r.u8() != 0;
    p.patch_embed = r.mat();
    p.patch_bias = r.vec();
    p.proj_head = r.mat();
    p.proj_bias = r.vec();
    if (!r.at_end()) {
        throw TsragError(ErrorCategory::FORMAT, "backbone checkpoint: trailing bytes");
    }
    if (p.patch_embed.rows != p.config.patch_len || p.patch_embed.cols != p.config.embed_dim ||
        p.proj_head.rows != p.config.embed_dim || p.proj_head.cols != p.config.horizon_len ||
        p.patch_bias.size() != p.config.embed_dim || p.proj_bias.size() != p.config.horizon_len) {
        throw TsragError(ErrorCategory::FORMAT, "backbone checkpoint: tensor shapes disagree with config");
    }
    return p;
}

BackboneParams load_backbone(const std::string& path, const BackboneConfig& expect) {
    BackboneParams p = load_backbone(path);
    if (!(p.config == expect)) {
        throw TsragError(ErrorCategory::DIM_MISMATCH,
                         "backbone checkpoint config (d=" + std::to_string(p.config.embed_dim) +
                             ", T=" + std::to_string(p.config.context_len) +
                             ") does not match runtime config (d=" +
                             std::to_string(expect.embed_dim) +
                             ", T=" + std::to_string(expect.context_len) + ")");
    }
    return p;
}

} // namespace tsrag
