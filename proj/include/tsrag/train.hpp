#ifndef TSRAG_TRAIN_HPP
#define TSRAG_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tsrag/arm.hpp"
#include "tsrag/backbone.hpp"
#include "tsrag/kb.hpp"

namespace tsrag {

struct TrainConfig {
    double lr = 3e-4;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t batch_size = 32;
    std::size_t steps = 1000;
    std::uint64_t seed = 7;
    std::size_t k = 10;
    double dropout_p = 0.2;
    std::size_t eval_every = 100;
    DistanceMetric metric;

    void validate() const;
};

struct TrainResult {
    ArmParams params;
    std::vector<double> loss_curve; // one entry per step (mean batch loss)
};

// Trains ONLY the ARM/projector tensors. The backbone must be frozen and the
// KB built with the same encoder (hash-checked). Per step: sample a batch,
// retrieve top-k per query excluding exact origin self-matches, run the mixer
// in train mode, take the squared error against the context-normalized target
// in normalized space, step AdamW. Deterministic for a fixed seed.
TrainResult train_arm(const std::vector<TimeSeriesPair>& pairs, const KnowledgeBase& kb,
                      const BackboneParams& backbone, const ArmParams& init,
                      const TrainConfig& config);

// Same loop for the gated-fusion ablation baseline.
struct GateTrainResult {
    GateParams params;
    std::vector<double> loss_curve;
};
GateTrainResult train_gate(const std::vector<TimeSeriesPair>& pairs, const KnowledgeBase& kb,
                           const BackboneParams& backbone, const GateParams& init,
                           const TrainConfig& config);

// Engine checkpoint "TSRE": backbone reference hash + ArmConfig + ArmParams
// + the TrainConfig it was produced with.
struct EngineCheckpoint {
    std::uint64_t backbone_hash = 0;
    ArmParams arm;
    TrainConfig train_config;
};

void save_engine(const EngineCheckpoint& engine, const std::string& path);
EngineCheckpoint load_engine(const std::string& path);
// Errors (HASH_MISMATCH) when the stored backbone hash differs.
EngineCheckpoint load_engine(const std::string& path, std::uint64_t active_backbone_hash,
                             bool allow_hash_mismatch = false);

} // namespace tsrag

#endif
