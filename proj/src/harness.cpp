#include "tsrag/harness.hpp"

#include "tsrag/csv.hpp"
#include "tsrag/error.hpp"
#include "tsrag/motif.hpp"
#include "tsrag/rng.hpp"

namespace tsrag {

const std::vector<std::string>& kb_regimes() {
    static const std::vector<std::string> regimes = {"in-domain", "distribution-shift",
                                                     "cross-domain", "multi-domain"};
    return regimes;
}

std::vector<Series> regime_corpus(const RunConfig& cfg, const std::string& regime) {
    if (cfg.data_source == "csv" && regime != "in-domain") {
        throw TsragError(ErrorCategory::FORMAT,
                         "regime \"" + regime + "\" requires the synthetic corpus");
    }
    MotifCorpusOptions corpus_opts;
    corpus_opts.n_series = cfg.n_series;
    corpus_opts.series_len = cfg.series_len;
    corpus_opts.noise_std = cfg.noise_std;

    MotifBankOptions bank_opts;
    bank_opts.size = cfg.motif_bank_size;
    bank_opts.min_period = cfg.motif_min_period;
    bank_opts.max_period = cfg.motif_max_period;

    if (regime == "in-domain") {
        if (cfg.data_source == "csv") {
            std::vector<Series> out;
            for (const auto& path : cfg.csv_paths) {
                for (auto& res : load_csv_all(path)) out.push_back(std::move(res.series));
            }
            return out;
        }
        bank_opts.seed = cfg.seed;
        corpus_opts.seed = cfg.seed;
        corpus_opts.source_tag = "motif";
        return generate_motif_corpus(make_motif_bank(bank_opts), corpus_opts);
    }
    if (regime == "distribution-shift") {
        bank_opts.seed = cfg.seed;
        bank_opts.period_scale = 1.3;
        bank_opts.amplitude_scale = 1.5;
        corpus_opts.seed = mix_seed(cfg.seed, 1);
        corpus_opts.source_tag = "motif-shift";
        return generate_motif_corpus(make_motif_bank(bank_opts), corpus_opts);
    }
    if (regime == "cross-domain") {
        bank_opts.seed = mix_seed(cfg.seed, 0xcd);
        corpus_opts.seed = mix_seed(cfg.seed, 2);
        corpus_opts.source_tag = "motif-cross";
        return generate_motif_corpus(make_motif_bank(bank_opts), corpus_opts);
    }
    if (regime == "multi-domain") {
        std::vector<Series> all;
        for (const auto& r : {"in-domain", "distribution-shift", "cross-domain"}) {
            auto part = regime_corpus(cfg, r);
            for (auto& s : part) all.push_back(std::move(s));
        }
        return all;
    }
    throw TsragError(ErrorCategory::FORMAT, "unknown KB regime: " + regime);
}

std::vector<Series> train_split(const std::vector<Series>& corpus, const RunConfig& cfg) {
    std::vector<Series> out;
    out.reserve(corpus.size());
    for (const auto& s : corpus) out.push_back(split_series(s, cfg.split).train);
    return out;
}

std::vector<TimeSeriesPair> train_pairs(const std::vector<Series>& corpus, const RunConfig& cfg) {
    std::vector<TimeSeriesPair> pairs;
    for (const auto& s : corpus) {
        const Series seg = split_series(s, cfg.split).train;
        auto p = make_pairs(seg, cfg.context_len, cfg.horizon_len, cfg.kb_stride);
        for (auto& x : p) pairs.push_back(std::move(x));
    }
    return pairs;
}

std::vector<TimeSeriesPair> test_pairs(const std::vector<Series>& corpus, const RunConfig& cfg) {
    std::vector<TimeSeriesPair> pairs;
    for (const auto& s : corpus) {
        const Series seg = split_series(s, cfg.split).test;
        auto p = make_pairs(seg, cfg.context_len, cfg.horizon_len, cfg.eval_stride);
        for (auto& x : p) pairs.push_back(std::move(x));
    }
    return pairs;
}

std::vector<TimeSeriesPair> test_pairs_long(const std::vector<Series>& corpus,
                                            const RunConfig& cfg, std::size_t rounds) {
    std::vector<TimeSeriesPair> pairs;
    for (const auto& s : corpus) {
        const Series seg = split_series(s, cfg.split).test;
        auto p = make_pairs(seg, cfg.context_len, cfg.horizon_len * rounds, cfg.eval_stride);
        for (auto& x : p) pairs.push_back(std::move(x));
    }
    return pairs;
}

Pipeline run_pipeline(const RunConfig& cfg) {
    Pipeline pl;
    pl.corpus = regime_corpus(cfg, "in-domain");
    pl.kb_pairs = train_pairs(pl.corpus, cfg);
    pl.eval_pairs = test_pairs(pl.corpus, cfg);
    pl.scaler = fit_global_scaler(train_split(pl.corpus, cfg), "train");

    PretrainOptions popts;
    popts.epochs = cfg.backbone_epochs;
    popts.lr = cfg.backbone_lr;
    popts.batch_size = cfg.backbone_batch;
    pl.engine.backbone = pretrain_backbone(pl.kb_pairs, cfg.backbone_config(), popts).params;

    pl.kb = build_kb(pl.kb_pairs, pl.engine.backbone, "in-domain");

    TrainConfig tc = cfg.train;
    tc.k = cfg.k;
    tc.dropout_p = cfg.dropout_p;
    tc.metric = cfg.distance_metric();
    TrainResult tr = train_arm(pl.kb_pairs, pl.kb, pl.engine.backbone, init_arm(cfg.arm_config()), tc);
    pl.engine.arm = std::move(tr.params);
    pl.train_loss = std::move(tr.loss_curve);
    return pl;
}

} // namespace tsrag
