#include "tsrag/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "tsrag/binio.hpp"
#include "tsrag/error.hpp"
#include "tsrag/rng.hpp"

namespace tsrag {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw TsragError(ErrorCategory::FORMAT,
                             "config: unknown key \"" + it.key() + "\" in " + where);
        }
    }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

} // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TsragError(ErrorCategory::IO, "cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw TsragError(ErrorCategory::FORMAT, std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig c;
    reject_unknown(root, {"seed", "data", "window", "backbone", "arm", "train", "retrieval"},
                   "top level");
    read_into(root, "seed", c.seed);

    if (root.contains("data")) {
        const json& d = root["data"];
        reject_unknown(d, {"source", "csv_paths", "n_series", "series_len", "motif_bank_size",
                           "motif_min_period", "motif_max_period", "noise_std", "split"},
                       "data");
        read_into(d, "source", c.data_source);
        read_into(d, "csv_paths", c.csv_paths);
        read_into(d, "n_series", c.n_series);
        read_into(d, "series_len", c.series_len);
        read_into(d, "motif_bank_size", c.motif_bank_size);
        read_into(d, "motif_min_period", c.motif_min_period);
        read_into(d, "motif_max_period", c.motif_max_period);
        read_into(d, "noise_std", c.noise_std);
        if (d.contains("split")) {
            const auto fracs = d.at("split").get<std::vector<double>>();
            if (fracs.size() != 3) {
                throw TsragError(ErrorCategory::FORMAT, "config: data.split needs 3 fractions");
            }
            c.split = {fracs[0], fracs[1], fracs[2]};
        }
    }
    if (root.contains("window")) {
        const json& w = root["window"];
        reject_unknown(w, {"context_len", "horizon_len", "kb_stride", "eval_stride"}, "window");
        read_into(w, "context_len", c.context_len);
        read_into(w, "horizon_len", c.horizon_len);
        read_into(w, "kb_stride", c.kb_stride);
        read_into(w, "eval_stride", c.eval_stride);
    }
    if (root.contains("backbone")) {
        const json& b = root["backbone"];
        reject_unknown(b, {"patch_len", "embed_dim", "epochs", "lr", "batch_size"}, "backbone");
        read_into(b, "patch_len", c.patch_len);
        read_into(b, "embed_dim", c.embed_dim);
        read_into(b, "epochs", c.backbone_epochs);
        read_into(b, "lr", c.backbone_lr);
        read_into(b, "batch_size", c.backbone_batch);
    }
    if (root.contains("arm")) {
        const json& a = root["arm"];
        reject_unknown(a, {"heads", "ffn_hidden", "proj_hidden", "dropout_p"}, "arm");
        read_into(a, "heads", c.heads);
        read_into(a, "ffn_hidden", c.ffn_hidden);
        read_into(a, "proj_hidden", c.proj_hidden);
        read_into(a, "dropout_p", c.dropout_p);
    }
    if (root.contains("train")) {
        const json& t = root["train"];
        reject_unknown(t, {"lr", "weight_decay", "beta1", "beta2", "eps", "batch_size", "steps",
                           "seed", "eval_every"},
                       "train");
        read_into(t, "lr", c.train.lr);
        read_into(t, "weight_decay", c.train.weight_decay);
        read_into(t, "beta1", c.train.beta1);
        read_into(t, "beta2", c.train.beta2);
        read_into(t, "eps", c.train.eps);
        read_into(t, "batch_size", c.train.batch_size);
        read_into(t, "steps", c.train.steps);
        read_into(t, "seed", c.train.seed);
        read_into(t, "eval_every", c.train.eval_every);
    }
    if (root.contains("retrieval")) {
        const json& r = root["retrieval"];
        reject_unknown(r, {"k", "metric", "dtw_band", "lookback", "regime"}, "retrieval");
        read_into(r, "k", c.k);
        read_into(r, "metric", c.metric);
        read_into(r, "dtw_band", c.dtw_band);
        read_into(r, "lookback", c.lookback);
        read_into(r, "regime", c.regime);
    }
    c.validate();
    return c;
}

std::string RunConfig::to_json_text() const {
    json root;
    root["seed"] = seed;
    root["data"] = {{"source", data_source},
                    {"csv_paths", csv_paths},
                    {"n_series", n_series},
                    {"series_len", series_len},
                    {"motif_bank_size", motif_bank_size},
                    {"motif_min_period", motif_min_period},
                    {"motif_max_period", motif_max_period},
                    {"noise_std", noise_std},
                    {"split", {split.train_frac, split.val_frac, split.test_frac}}};
    root["window"] = {{"context_len", context_len},
                      {"horizon_len", horizon_len},
                      {"kb_stride", kb_stride},
                      {"eval_stride", eval_stride}};
    root["backbone"] = {{"patch_len", patch_len},
                        {"embed_dim", embed_dim},
                        {"epochs", backbone_epochs},
                        {"lr", backbone_lr},
                        {"batch_size", backbone_batch}};
    root["arm"] = {{"heads", heads},
                   {"ffn_hidden", ffn_hidden},
                   {"proj_hidden", proj_hidden},
                   {"dropout_p", dropout_p}};
    root["train"] = {{"lr", train.lr},
                     {"weight_decay", train.weight_decay},
                     {"beta1", train.beta1},
                     {"beta2", train.beta2},
                     {"eps", train.eps},
                     {"batch_size", train.batch_size},
                     {"steps", train.steps},
                     {"seed", train.seed},
                     {"eval_every", train.eval_every}};
    root["retrieval"] = {{"k", k},
                         {"metric", metric},
                         {"dtw_band", dtw_band},
                         {"lookback", lookback},
                         {"regime", regime}};
    return root.dump(2);
}

std::string RunConfig::fingerprint() const { return hash_hex(fnv1a64(to_json_text())); }

BackboneConfig RunConfig::backbone_config() const {
    BackboneConfig b;
    b.context_len = context_len;
    b.horizon_len = horizon_len;
    b.patch_len = patch_len;
    b.embed_dim = embed_dim;
    b.seed = seed;
    return b;
}

ArmConfig RunConfig::arm_config() const {
    ArmConfig a;
    a.k = k;
    a.d = embed_dim;
    a.heads = heads;
    a.ffn_hidden = ffn_hidden;
    a.dropout_p = dropout_p;
    a.proj_hidden = proj_hidden;
    a.horizon_len = horizon_len;
    a.seed = mix_seed(seed, 0xa2);
    return a;
}

DistanceMetric RunConfig::distance_metric() const {
    return DistanceMetric::parse(metric, dtw_band);
}

void RunConfig::validate() const {
    if (data_source != "motif" && data_source != "csv") {
        throw TsragError(ErrorCategory::FORMAT, "config: data.source must be motif or csv");
    }
    if (regime != "in-domain" && regime != "distribution-shift" && regime != "cross-domain" &&
        regime != "multi-domain") {
        throw TsragError(ErrorCategory::FORMAT, "config: unknown retrieval.regime " + regime);
    }
    if (lookback != 0 && lookback > context_len) {
        throw TsragError(ErrorCategory::FORMAT, "config: lookback exceeds context_len");
    }
    backbone_config().validate();
    arm_config().validate();
    (void)distance_metric();
    const double sum = split.train_frac + split.val_frac + split.test_frac;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw TsragError(ErrorCategory::FORMAT, "config: split fractions must sum to 1");
    }
}

} // namespace tsrag
