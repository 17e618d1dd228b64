#ifndef TSRAG_RUN_CONFIG_HPP
#define TSRAG_RUN_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tsrag/arm.hpp"
#include "tsrag/backbone.hpp"
#include "tsrag/motif.hpp"
#include "tsrag/series.hpp"
#include "tsrag/train.hpp"

namespace tsrag {

// One serializable config driving every command. Unknown JSON keys are
// rejected so stale configs fail loudly; the fingerprint identifies a run.
struct RunConfig {
    std::uint64_t seed = 42;

    // data
    std::string data_source = "motif"; // motif | csv
    std::vector<std::string> csv_paths;
    std::size_t n_series = 60;
    std::size_t series_len = 4000;
    std::size_t motif_bank_size = 8;
    std::uint32_t motif_min_period = 20;
    std::uint32_t motif_max_period = 90;
    double noise_std = 0.1;
    SplitSpec split;

    // windows
    std::size_t context_len = 512;
    std::size_t horizon_len = 64;
    std::size_t kb_stride = 64;
    std::size_t eval_stride = 1;

    // backbone
    std::size_t patch_len = 64;
    std::size_t embed_dim = 64;
    std::size_t backbone_epochs = 40;
    double backbone_lr = 1e-3;
    std::size_t backbone_batch = 0; // 0 = full batch

    // arm
    std::size_t heads = 4;
    std::size_t ffn_hidden = 256;
    std::size_t proj_hidden = 64;
    double dropout_p = 0.2;

    // train
    TrainConfig train;

    // retrieval
    std::size_t k = 10;
    std::string metric = "euclidean";
    int dtw_band = 0;
    std::size_t lookback = 0;
    std::string regime = "in-domain";

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
    // FNV-1a hex digest of the canonical serialization.
    std::string fingerprint() const;

    BackboneConfig backbone_config() const;
    ArmConfig arm_config() const;
    DistanceMetric distance_metric() const;
    void validate() const;
};

} // namespace tsrag

#endif
