#ifndef TSRAG_BACKBONE_HPP
#define TSRAG_BACKBONE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tsrag/linalg.hpp"
#include "tsrag/series.hpp"

namespace tsrag {

struct BackboneConfig {
    std::size_t context_len = 512;
    std::size_t horizon_len = 64;
    std::size_t patch_len = 64;
    std::size_t embed_dim = 64;
    std::uint64_t seed = 1;

    void validate() const; // context_len % patch_len == 0, embed_dim >= 8, horizon_len >= 1
    bool operator==(const BackboneConfig&) const = default;
};

// Frozen after pretraining: encode/project never mutate, and the trainer
// checks byte-identity of these tensors before/after every run.
struct BackboneParams {
    Mat patch_embed;  // patch_len x embed_dim
    Vec patch_bias;   // embed_dim
    Mat proj_head;    // embed_dim x horizon_len
    Vec proj_bias;    // horizon_len
    BackboneConfig config;
    bool frozen = false;
};

// Mean over patches of tanh(patch * W + b). Input must already be
// instance-normalized and of length context_len.
Vec encode(const Vec& context_norm, const BackboneParams& params);

// Affine head: e * W + b, normalized space.
Vec project(const Vec& embedding, const BackboneParams& params);

struct PretrainOptions {
    std::size_t epochs = 40;
    double lr = 1e-3;
    double weight_decay = 0.0;
    std::size_t batch_size = 0; // 0 = full batch
};

struct PretrainResult {
    BackboneParams params;
    std::vector<double> loss_curve; // mean squared error per epoch
};

// Minimizes squared error of project(encode(zscore(x))) against the
// context-normalized horizon with AdamW, then freezes the result.
PretrainResult pretrain_backbone(const std::vector<TimeSeriesPair>& pairs,
                                 const BackboneConfig& config, const PretrainOptions& opts);

// Fresh unfrozen params, weights ~ uniform(+-1/sqrt(fan_in)), biases zero.
BackboneParams init_backbone(const BackboneConfig& config);

// Canonical serialization (config + tensors); basis for the encoder hash.
std::vector<std::uint8_t> serialize_backbone(const BackboneParams& params);
std::uint64_t backbone_hash(const BackboneParams& params);

// Checkpoint file: magic "TSRB", u32 version, config, tensors, frozen flag.
void save_backbone(const BackboneParams& params, const std::string& path);
BackboneParams load_backbone(const std::string& path);
// Errors (DIM_MISMATCH) when the checkpoint disagrees with `expect`.
BackboneParams load_backbone(const std::string& path, const BackboneConfig& expect);

} // namespace tsrag

#endif
