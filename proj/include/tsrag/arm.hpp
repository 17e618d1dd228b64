#ifndef TSRAG_ARM_HPP
#define TSRAG_ARM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tsrag/linalg.hpp"

namespace tsrag {

// Adaptive Retrieval Mixer: horizon projector, self-attention over the
// (k+1)-row stack [query; retrieved], FFN with dropout, softmax mixing and a
// skip connection back to the query embedding. Gradients are hand-derived for
// this fixed architecture; there is no autodiff here.

struct ArmConfig {
    std::size_t k = 10;
    std::size_t d = 64;
    std::size_t heads = 4;
    std::size_t ffn_hidden = 256;
    double dropout_p = 0.2;
    std::size_t proj_hidden = 64;
    std::size_t horizon_len = 64; // input width of the horizon projector
    std::uint64_t seed = 1;

    std::size_t head_dim() const { return d / heads; }
    void validate() const;
    bool operator==(const ArmConfig&) const = default;
};

// The ONLY tensors the TS-RAG optimizer may touch.
struct ArmParams {
    // horizon projector: L -> proj_hidden -> d, ReLU between layers
    Mat proj_w1;
    Vec proj_b1;
    Mat proj_w2;
    Vec proj_b2;
    // multi-head self-attention, combined head projections
    Mat wq, wk, wv; // d x d each
    Vec bq, bk, bv; // d
    Mat wo;         // d x d
    Vec bo;         // d
    // position-wise FFN: d -> ffn_hidden -> d, ReLU
    Mat ffn_w1;
    Vec ffn_b1;
    Mat ffn_w2;
    Vec ffn_b2;
    // scorer: alpha = softmax(E_ffn * w_g + b_g)
    Vec score_w; // d
    Vec score_b; // 1 (scalar kept as a tensor for the optimizer)

    ArmConfig config;

    // Fixed-order tensor views for the optimizer and serialization.
    std::vector<Vec*> tensors();
    std::vector<const Vec*> tensors() const;
    static std::vector<std::string> tensor_names();
};

enum class ArmMode { Train, Eval };

// Everything the backward pass replays; alpha/e_final are the public outputs.
struct ArmTrace {
    Mat e_ret;        // k x d
    Mat proj_hidden;  // k x proj_hidden (post-ReLU)
    Mat e_concat;     // (k+1) x d, query at row 0
    Mat q, kk, v;     // (k+1) x d
    std::vector<Mat> attn; // per head, (k+1) x (k+1) row-softmax weights
    Mat heads_concat; // (k+1) x d
    Mat e_att;        // (k+1) x d
    Mat ffn_hidden;   // (k+1) x ffn_hidden (post-ReLU)
    Mat ffn_out;      // (k+1) x d, before dropout
    Mat dropout_mask; // (k+1) x d, 0/1; all-ones in eval or p=0
    double dropout_keep = 1.0;
    Mat e_ffn;        // (k+1) x d
    Vec scores;       // k+1
    Vec alpha;        // k+1, softmax-normalized
    Vec e_final;      // d
    ArmMode mode = ArmMode::Eval;
};

struct ArmGrads {
    ArmParams tensors_like; // same shapes, gradient values
    Vec d_e_q;              // gradient w.r.t. the query embedding

    std::vector<Vec*> tensors() { return tensors_like.tensors(); }
    std::vector<const Vec*> tensors() const { return tensors_like.tensors(); }
    void accumulate(const ArmGrads& other);
    void scale(double s);
};

// Weights ~ uniform(+-1/sqrt(fan_in)), biases zero; deterministic per seed.
ArmParams init_arm(const ArmConfig& config);
ArmParams zeros_like(const ArmParams& params);

// Projector path alone: row i of the result depends only on horizon i.
Mat project_horizons(const std::vector<Vec>& horizons, const ArmParams& params);

// Full mixer. k = horizons.size() may be anything from 0 (degenerate single
// query row, alpha = [1]) up to config.k. Dropout draws from rng_seed in
// train mode only; p = 0 never touches the RNG so train(p=0) == eval bitwise.
ArmTrace arm_forward(const Vec& e_q, const std::vector<Vec>& horizons, const ArmParams& params,
                     ArmMode mode, std::uint64_t rng_seed = 0);

// Exact reverse-mode gradients for every ArmParams tensor plus d(e_q).
// `trace` must come from a matching forward call (same params and inputs).
ArmGrads arm_backward(const ArmTrace& trace, const Vec& d_e_final, const ArmParams& params,
                      const Vec& e_q, const std::vector<Vec>& horizons);

// Gated fusion ablation baseline: sigma(g) * e_q + (1 - sigma(g)) * mean row
// of the projected horizons. k = 0 returns e_q untouched.
struct GateParams {
    Mat proj_w1;
    Vec proj_b1;
    Mat proj_w2;
    Vec proj_b2;
    Vec gate; // scalar g

    ArmConfig config; // only d/proj_hidden/horizon_len/seed are meaningful

    std::vector<Vec*> tensors();
    std::vector<const Vec*> tensors() const;
};

struct GateTrace {
    Mat e_ret;
    Mat proj_hidden;
    Vec mean_ret;
    double sigma = 1.0;
    Vec e_final;
};

struct GateGrads {
    GateParams tensors_like;
    Vec d_e_q;
};

GateParams init_gate(const ArmConfig& config);
GateTrace gated_fusion_forward(const Vec& e_q, const std::vector<Vec>& horizons,
                               const GateParams& params);
GateGrads gated_fusion_backward(const GateTrace& trace, const Vec& d_e_final,
                                const GateParams& params, const Vec& e_q,
                                const std::vector<Vec>& horizons);

} // namespace tsrag

#endif
