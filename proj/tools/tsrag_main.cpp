// tsrag: batch front end for the retrieval-augmented forecasting engine.
//
// Subcommands: ingest, pretrain-backbone, build-kb, train-arm, forecast,
// evaluate, ablate, analyze. Every run prints its config fingerprint; errors
// map to one exit code per category (see print_error).

#include <fstream>
#include <map>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsrag/binio.hpp"
#include "tsrag/csv.hpp"
#include "tsrag/error.hpp"
#include "tsrag/harness.hpp"
#include "tsrag/infer.hpp"
#include "tsrag/metrics.hpp"
#include "tsrag/rng.hpp"
#include "tsrag/store.hpp"

namespace {

using namespace tsrag;

int exit_code(ErrorCategory cat) {
    switch (cat) {
        case ErrorCategory::IO: return 2;
        case ErrorCategory::FORMAT: return 3;
        case ErrorCategory::DIM_MISMATCH: return 4;
        case ErrorCategory::HASH_MISMATCH: return 5;
        case ErrorCategory::LEAKAGE: return 6;
        case ErrorCategory::NUMERIC: return 7;
    }
    return 9;
}

struct CommonFlags {
    std::string config_path;
    std::int64_t seed = -1;
    std::int64_t k = -1;
    std::string metric;
    std::int64_t lookback = -1;
    std::string regime;
    bool allow_leakage = false;
    bool bypass_arm = false;
};

// Flags win over the config file.
RunConfig resolve_config(const CommonFlags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) cfg = RunConfig::from_json_file(f.config_path);
    if (f.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(f.seed);
        cfg.train.seed = mix_seed(cfg.seed, 0x7a);
    }
    if (f.k >= 0) cfg.k = static_cast<std::size_t>(f.k);
    if (!f.metric.empty()) cfg.metric = f.metric;
    if (f.lookback >= 0) cfg.lookback = static_cast<std::size_t>(f.lookback);
    if (!f.regime.empty()) cfg.regime = f.regime;
    cfg.validate();
    std::cout << "config_fingerprint=" << cfg.fingerprint() << "\n";
    return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON run config");
    cmd->add_option("--seed", f.seed, "override config seed");
    cmd->add_option("--k", f.k, "retrieved count");
    cmd->add_option("--metric", f.metric, "euclidean|cosine|dtw");
    cmd->add_option("--lookback", f.lookback, "retrieval lookback length");
    cmd->add_option("--regime", f.regime,
                    "in-domain|distribution-shift|cross-domain|multi-domain");
    cmd->add_flag("--allow-leakage", f.allow_leakage, "evaluate despite KB/test overlap");
    cmd->add_flag("--bypass-arm", f.bypass_arm, "backbone-only path");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw TsragError(ErrorCategory::IO, "cannot open for writing: " + path);
    out << text;
    if (!out) throw TsragError(ErrorCategory::IO, "write failed: " + path);
}

void write_loss_csv(const std::string& path, const std::vector<double>& curve) {
    std::ostringstream out;
    out << "step,loss\n";
    char buf[48];
    for (std::size_t i = 0; i < curve.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i, curve[i]);
        out << buf;
    }
    write_text_file(path, out.str());
}

std::vector<TimeSeriesPair> store_train_pairs(const std::string& store_path, const RunConfig& cfg) {
    const auto corpus = load_store(store_path);
    const std::size_t window = cfg.context_len + cfg.horizon_len;
    for (const auto& s : corpus) {
        if (split_series(s, cfg.split).train.values.size() < window) {
            std::cerr << "warning: train split of series " << s.id
                      << " is too short for any window\n";
        }
    }
    return train_pairs(corpus, cfg);
}

// Run identity for reports: config digest + encoder hash + KB regime.
std::string eval_fingerprint(const RunConfig& cfg, std::uint64_t encoder_hash,
                             const std::string& regime) {
    return cfg.fingerprint() + "-" + hash_hex(encoder_hash).substr(0, 8) + "-" + regime;
}

int cmd_ingest(const CommonFlags& flags, const std::vector<std::string>& csvs,
               const std::string& out_path) {
    RunConfig cfg = resolve_config(flags);
    std::vector<Series> series;
    if (!csvs.empty() || cfg.data_source == "csv") {
        const auto& paths = csvs.empty() ? cfg.csv_paths : csvs;
        if (paths.empty()) throw TsragError(ErrorCategory::FORMAT, "ingest: no CSV paths given");
        std::size_t skipped = 0;
        for (const auto& p : paths) {
            for (auto& res : load_csv_all(p)) {
                skipped += res.skipped_rows;
                series.push_back(std::move(res.series));
            }
        }
        if (skipped > 0) {
            std::cerr << "warning: skipped " << skipped << " unusable rows\n";
        }
    } else {
        series = regime_corpus(cfg, "in-domain");
    }
    save_store(series, out_path);
    std::cout << "ingested " << series.size() << " series -> " << out_path << "\n";
    return 0;
}

int cmd_pretrain_backbone(const CommonFlags& flags, const std::string& store_path,
                          const std::string& out_path, const std::string& loss_csv) {
    RunConfig cfg = resolve_config(flags);
    auto pairs = store_train_pairs(store_path, cfg);
    PretrainOptions opts;
    opts.epochs = cfg.backbone_epochs;
    opts.lr = cfg.backbone_lr;
    opts.batch_size = cfg.backbone_batch;
    PretrainResult res = pretrain_backbone(pairs, cfg.backbone_config(), opts);
    save_backbone(res.params, out_path);
    if (!loss_csv.empty()) write_loss_csv(loss_csv, res.loss_curve);
    std::cout << "pretrained backbone on " << pairs.size() << " pairs, final loss "
              << res.loss_curve.back() << " -> " << out_path
              << " (hash " << hash_hex(backbone_hash(res.params)) << ")\n";
    return 0;
}

int cmd_build_kb(const CommonFlags& flags, const std::string& store_path,
                 const std::string& backbone_path, const std::string& out_path) {
    RunConfig cfg = resolve_config(flags);
    BackboneParams backbone = load_backbone(backbone_path, cfg.backbone_config());
    std::vector<TimeSeriesPair> pairs;
    if (cfg.regime == "in-domain") {
        pairs = store_train_pairs(store_path, cfg);
    } else {
        pairs = train_pairs(regime_corpus(cfg, cfg.regime), cfg);
    }
    KnowledgeBase kb = build_kb(pairs, backbone, cfg.regime);
    save_kb(kb, out_path);
    std::cout << "built " << cfg.regime << " KB with " << kb.size() << " entries -> " << out_path
              << "\n";
    return 0;
}

int cmd_train_arm(const CommonFlags& flags, const std::string& store_path,
                  const std::string& kb_path, const std::string& backbone_path,
                  const std::string& out_path, const std::string& loss_csv) {
    RunConfig cfg = resolve_config(flags);
    BackboneParams backbone = load_backbone(backbone_path, cfg.backbone_config());
    KnowledgeBase kb = load_kb(kb_path, backbone_hash(backbone));
    auto pairs = store_train_pairs(store_path, cfg);

    TrainConfig tc = cfg.train;
    tc.k = cfg.k;
    tc.dropout_p = cfg.dropout_p;
    tc.metric = cfg.distance_metric();
    TrainResult res = train_arm(pairs, kb, backbone, init_arm(cfg.arm_config()), tc);

    EngineCheckpoint engine;
    engine.backbone_hash = backbone_hash(backbone);
    engine.arm = std::move(res.params);
    engine.train_config = tc;
    save_engine(engine, out_path);
    if (!loss_csv.empty()) write_loss_csv(loss_csv, res.loss_curve);
    std::cout << "trained ARM for " << tc.steps << " steps, loss " << res.loss_curve.front()
              << " -> " << res.loss_curve.back() << ", engine -> " << out_path << "\n";
    return 0;
}

nlohmann::json trace_json(const ForecastResult& res) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : res.rounds) {
        rounds.push_back({{"indices", r.indices}, {"distances", r.distances}, {"alpha", r.alpha}});
    }
    return {{"rounds", rounds},
            {"fallback", res.fallback},
            {"bypassed", res.bypassed},
            {"retrieval_ms", res.retrieval_ms},
            {"forward_ms", res.forward_ms}};
}

int cmd_forecast(const CommonFlags& flags, const std::string& engine_path,
                 const std::string& backbone_path, const std::string& kb_path,
                 const std::string& query_csv, const std::string& column, std::size_t horizon,
                 const std::string& out_path, const std::string& trace_path) {
    RunConfig cfg = resolve_config(flags);
    BackboneParams backbone = load_backbone(backbone_path, cfg.backbone_config());
    EngineCheckpoint ckpt = load_engine(engine_path, backbone_hash(backbone));
    KnowledgeBase kb = load_kb(kb_path, backbone_hash(backbone));

    Series query;
    if (column.empty()) {
        auto all = load_csv_all(query_csv);
        query = std::move(all.front().series);
    } else {
        query = std::move(load_csv(query_csv, column).series);
    }
    if (query.values.size() < cfg.context_len) {
        throw TsragError(ErrorCategory::DIM_MISMATCH,
                         "query series has " + std::to_string(query.values.size()) +
                             " points, need at least " + std::to_string(cfg.context_len));
    }
    const Vec context(query.values.end() - static_cast<std::ptrdiff_t>(cfg.context_len),
                      query.values.end());

    Engine engine{std::move(backbone), std::move(ckpt.arm)};
    ForecastOptions opts;
    opts.k = cfg.k;
    opts.metric = cfg.distance_metric();
    opts.lookback = cfg.lookback;
    opts.bypass_arm = flags.bypass_arm;
    const std::size_t H = horizon == 0 ? cfg.horizon_len : horizon;

    ForecastResult res = rolling_forecast(context, H, engine, kb, opts);
    if (res.bypassed || res.fallback) std::cout << "fallback=backbone-only\n";

    std::ostringstream csv;
    csv << "step,value\n";
    char buf[48];
    for (std::size_t i = 0; i < res.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", i, res.values[i]);
        csv << buf;
    }
    write_text_file(out_path, csv.str());
    if (!trace_path.empty()) write_text_file(trace_path, trace_json(res).dump(2));
    std::cout << "forecast " << res.values.size() << " steps -> " << out_path << " (retrieval "
              << res.retrieval_ms << " ms, forward " << res.forward_ms << " ms)\n";
    return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& store_path,
                 const std::string& engine_path, const std::string& backbone_path,
                 const std::string& kb_path, const std::string& out_path) {
    RunConfig cfg = resolve_config(flags);
    BackboneParams backbone = load_backbone(backbone_path, cfg.backbone_config());
    EngineCheckpoint ckpt = load_engine(engine_path, backbone_hash(backbone));
    KnowledgeBase kb = load_kb(kb_path, backbone_hash(backbone));
    const auto corpus = load_store(store_path);
    auto pairs = test_pairs(corpus, cfg);
    const GlobalScaler scaler = fit_global_scaler(train_split(corpus, cfg), "train");

    Engine engine{std::move(backbone), std::move(ckpt.arm)};
    EvalOptions opts;
    opts.k = cfg.k;
    opts.metric = cfg.distance_metric();
    opts.lookback = cfg.lookback;
    opts.allow_leakage = flags.allow_leakage;
    opts.bypass_arm = flags.bypass_arm;
    opts.fingerprint = eval_fingerprint(cfg, backbone_hash(engine.backbone), kb.meta.regime);

    EvalReport report = evaluate(pairs, engine, kb, scaler, opts);
    std::cout << report.to_text();
    if (!out_path.empty()) write_text_file(out_path, report.to_csv());
    return 0;
}

int cmd_ablate(const CommonFlags& flags, const std::string& axis_name, const std::string& grid_csv,
               const std::string& store_path, const std::string& engine_path,
               const std::string& backbone_path, const std::string& out_path) {
    RunConfig cfg = resolve_config(flags);
    BackboneParams backbone = load_backbone(backbone_path, cfg.backbone_config());
    EngineCheckpoint ckpt = load_engine(engine_path, backbone_hash(backbone));
    const auto corpus = load_store(store_path);
    auto pairs = test_pairs(corpus, cfg);

    Engine engine{std::move(backbone), std::move(ckpt.arm)};
    const AblationAxis axis = parse_axis(axis_name);

    std::vector<std::string> grid;
    std::stringstream ss(grid_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) grid.push_back(item);
    }

    AblationSetup setup;
    setup.test_pairs = &pairs;
    setup.engine = &engine;
    setup.scaler = fit_global_scaler(train_split(corpus, cfg), "train");
    setup.base.k = cfg.k;
    setup.base.metric = cfg.distance_metric();
    setup.base.lookback = cfg.lookback;
    setup.base.allow_leakage = flags.allow_leakage;
    setup.base.fingerprint =
        eval_fingerprint(cfg, backbone_hash(engine.backbone), "in-domain");
    setup.base_regime = "in-domain";

    // KBs per regime; the in-domain KB always exists, siblings only for the
    // regime axis (they are rebuilt deterministically from the config).
    std::map<std::string, KnowledgeBase> kbs;
    kbs.emplace("in-domain", build_kb(train_pairs(corpus, cfg), engine.backbone, "in-domain"));
    if (axis == AblationAxis::KbRegime) {
        for (const auto& regime : grid) {
            if (regime == "in-domain") continue;
            kbs.emplace(regime,
                        build_kb(train_pairs(regime_corpus(cfg, regime), cfg), engine.backbone,
                                 regime));
        }
    }
    for (const auto& [name, kb] : kbs) setup.kbs[name] = &kb;

    // The fusion axis compares against a gate baseline trained with the same
    // recipe as the mixer.
    GateParams gate;
    if (axis == AblationAxis::Fusion) {
        TrainConfig tc = cfg.train;
        tc.k = cfg.k;
        tc.dropout_p = cfg.dropout_p;
        tc.metric = cfg.distance_metric();
        auto kb_it = kbs.find("in-domain");
        GateTrainResult gres = train_gate(train_pairs(corpus, cfg), kb_it->second,
                                          engine.backbone, init_gate(cfg.arm_config()), tc);
        gate = std::move(gres.params);
        setup.gate = &gate;
    }

    EvalReport table = ablate(axis, grid, setup);
    std::cout << table.to_text();
    if (!out_path.empty()) write_text_file(out_path, table.to_csv());
    return 0;
}

int cmd_analyze(const CommonFlags& flags, const std::string& store_path,
                const std::string& out_path) {
    resolve_config(flags);
    const auto corpus = load_store(store_path);
    std::ostringstream csv;
    csv << "series,tag,autocorr_lag1,noise_ratio,volatility,stationarity,degenerate\n";
    std::ostringstream text;
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s %12s\n", "series", "autocorr",
                  "noise", "volatility", "stationarity");
    text << line;

    // per-sequence rows plus dataset-level averages per tag
    std::map<std::string, std::pair<Characteristics, std::size_t>> by_tag;
    for (const auto& s : corpus) {
        const Characteristics c = characteristics(s.values);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%.6g,%.6g,%.6g,%d\n", s.id.c_str(),
                      s.source_tag.c_str(), c.autocorr_lag1, c.noise_ratio, c.volatility,
                      c.stationarity, c.degenerate ? 1 : 0);
        csv << buf;
        std::snprintf(line, sizeof(line), "%-24s %12.4f %12.4f %12.4f %12.4f\n", s.id.c_str(),
                      c.autocorr_lag1, c.noise_ratio, c.volatility, c.stationarity);
        text << line;
        auto& [sum, n] = by_tag[s.source_tag];
        sum.autocorr_lag1 += c.autocorr_lag1;
        sum.noise_ratio += c.noise_ratio;
        sum.volatility += c.volatility;
        sum.stationarity += c.stationarity;
        n += 1;
    }
    for (const auto& [tag, entry] : by_tag) {
        const auto& [sum, n] = entry;
        const double inv = 1.0 / static_cast<double>(n);
        char buf[256];
        std::snprintf(buf, sizeof(buf), "AVG(%s),%s,%.6g,%.6g,%.6g,%.6g,0\n", tag.c_str(),
                      tag.c_str(), sum.autocorr_lag1 * inv, sum.noise_ratio * inv,
                      sum.volatility * inv, sum.stationarity * inv);
        csv << buf;
        const std::string label = "AVG(" + tag + ")";
        std::snprintf(line, sizeof(line), "%-24s %12.4f %12.4f %12.4f %12.4f\n", label.c_str(),
                      sum.autocorr_lag1 * inv, sum.noise_ratio * inv, sum.volatility * inv,
                      sum.stationarity * inv);
        text << line;
    }
    std::cout << text.str();
    if (!out_path.empty()) write_text_file(out_path, csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tsrag: retrieval-augmented time-series forecasting"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::vector<std::string> csv_paths;
    std::string store_path, backbone_path, kb_path, engine_path, out_path, loss_csv, trace_path;
    std::string query_csv, column, axis, grid;
    std::size_t horizon = 0;

    auto* ingest = app.add_subcommand("ingest", "read CSVs or generate the synthetic corpus");
    add_common(ingest, flags);
    ingest->add_option("--csv", csv_paths, "CSV files to ingest");
    ingest->add_option("--out", out_path, "series store output")->required();

    auto* pretrain = app.add_subcommand("pretrain-backbone", "pretrain and freeze the backbone");
    add_common(pretrain, flags);
    pretrain->add_option("--store", store_path)->required();
    pretrain->add_option("--out", out_path, "backbone checkpoint")->required();
    pretrain->add_option("--loss-csv", loss_csv);

    auto* buildkb = app.add_subcommand("build-kb", "embed training windows into a knowledge base");
    add_common(buildkb, flags);
    buildkb->add_option("--store", store_path)->required();
    buildkb->add_option("--backbone", backbone_path)->required();
    buildkb->add_option("--out", out_path, "KB output")->required();

    auto* train = app.add_subcommand("train-arm", "train the retrieval mixer");
    add_common(train, flags);
    train->add_option("--store", store_path)->required();
    train->add_option("--kb", kb_path)->required();
    train->add_option("--backbone", backbone_path)->required();
    train->add_option("--out", out_path, "engine checkpoint")->required();
    train->add_option("--loss-csv", loss_csv);

    auto* fc = app.add_subcommand("forecast", "zero-shot forecast from a query CSV");
    add_common(fc, flags);
    fc->add_option("--engine", engine_path)->required();
    fc->add_option("--backbone", backbone_path)->required();
    fc->add_option("--kb", kb_path)->required();
    fc->add_option("--query", query_csv, "CSV with the query series")->required();
    fc->add_option("--column", column, "value column (default: first)");
    fc->add_option("--horizon", horizon, "total steps (rolling if > L)");
    fc->add_option("--out", out_path, "forecast CSV")->required();
    fc->add_option("--trace", trace_path, "retrieval trace JSON");

    auto* ev = app.add_subcommand("evaluate", "score test windows against the baseline");
    add_common(ev, flags);
    ev->add_option("--store", store_path)->required();
    ev->add_option("--engine", engine_path)->required();
    ev->add_option("--backbone", backbone_path)->required();
    ev->add_option("--kb", kb_path)->required();
    ev->add_option("--out", out_path, "report CSV");

    auto* ab = app.add_subcommand("ablate", "sweep one axis, all else fixed");
    add_common(ab, flags);
    ab->add_option("--axis", axis, "kb_regime|top_k|lookback|metric|fusion")->required();
    ab->add_option("--grid", grid, "comma-separated grid values")->required();
    ab->add_option("--store", store_path)->required();
    ab->add_option("--engine", engine_path)->required();
    ab->add_option("--backbone", backbone_path)->required();
    ab->add_option("--out", out_path, "report CSV");

    auto* an = app.add_subcommand("analyze", "per-series characteristics table");
    add_common(an, flags);
    an->add_option("--store", store_path)->required();
    an->add_option("--out", out_path, "characteristics CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(flags, csv_paths, out_path);
        if (pretrain->parsed())
            return cmd_pretrain_backbone(flags, store_path, out_path, loss_csv);
        if (buildkb->parsed()) return cmd_build_kb(flags, store_path, backbone_path, out_path);
        if (train->parsed())
            return cmd_train_arm(flags, store_path, kb_path, backbone_path, out_path, loss_csv);
        if (fc->parsed())
            return cmd_forecast(flags, engine_path, backbone_path, kb_path, query_csv, column,
                                horizon, out_path, trace_path);
        if (ev->parsed())
            return cmd_evaluate(flags, store_path, engine_path, backbone_path, kb_path, out_path);
        if (ab->parsed())
            return cmd_ablate(flags, axis, grid, store_path, engine_path, backbone_path, out_path);
        if (an->parsed()) return cmd_analyze(flags, store_path, out_path);
    } catch (const TsragError& e) {
        std::cerr << "ERROR " << to_string(e.category()) << ": " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "ERROR INTERNAL: " << e.what() << "\n";
        return 9;
    }
    return 0;
}
