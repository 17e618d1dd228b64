#include "tsrag/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "tsrag/error.hpp"
#include "tsrag/threading.hpp"

namespace tsrag {

namespace {

struct WindowScores {
    double mse = 0.0;
    double mae = 0.0;
    double baseline_mse = 0.0;
    double baseline_mae = 0.0;
    std::string tag;
};

Vec standardized(const Vec& v, const GlobalScaler& scaler) {
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = standardize(v[i], scaler);
    return out;
}

// Generic per-window evaluation loop; `fuse` maps (query, horizons) to the
// fused embedding. Baseline is always the raw backbone path.
template <typename FuseFn>
EvalReport run_eval(const std::vector<TimeSeriesPair>& test_pairs, const BackboneParams& backbone,
                    const KnowledgeBase& kb, const GlobalScaler& scaler, const EvalOptions& opts,
                    FuseFn&& fuse) {
    if (test_pairs.empty()) {
        throw TsragError(ErrorCategory::FORMAT, "evaluate: no test windows");
    }
    const LeakageReport leaks = leakage_check(kb, test_pairs);
    if (!leaks.clean() && !opts.allow_leakage) {
        throw TsragError(ErrorCategory::LEAKAGE,
                         "evaluate: " + std::to_string(leaks.hits.size()) +
                             " KB entries overlap test windows (rerun with --allow-leakage to "
                             "override)");
    }

    std::vector<WindowScores> scores(test_pairs.size());
    parallel_for(test_pairs.size(), [&](std::size_t i) {
        const auto& pair = test_pairs[i];
        QueryKey key = embed_query(pair.context, backbone, 0);
        QueryKey masked_key;
        const bool masked = opts.lookback > 0 && opts.lookback < backbone.config.context_len;
        if (masked) masked_key = embed_query(pair.context, backbone, opts.lookback);

        std::vector<Vec> horizons;
        if (opts.k > 0 && kb.size() > 0) {
            RetrievedSet r = top_k(kb, masked ? masked_key : key, opts.k, opts.metric);
            horizons.reserve(r.items.size());
            for (auto& item : r.items) horizons.push_back(std::move(item.horizon));
        }

        const Vec e_final = fuse(key, horizons);
        const Vec yhat = denormalize(project(e_final, backbone), key.stats);
        const Vec base = denormalize(project(key.embedding, backbone), key.stats);

        const Vec y_s = standardized(pair.horizon, scaler);
        const Vec yhat_s = standardized(yhat, scaler);
        const Vec base_s = standardized(base, scaler);

        scores[i].mse = mse(y_s, yhat_s);
        scores[i].mae = mae(y_s, yhat_s);
        scores[i].baseline_mse = mse(y_s, base_s);
        scores[i].baseline_mae = mae(y_s, base_s);
        scores[i].tag = pair.source_tag;
    });

    // Aggregate in index order so the report is reproducible bit for bit.
    std::map<std::string, EvalRow> by_tag;
    EvalRow all;
    all.label = "ALL";
    for (const auto& s : scores) {
        EvalRow& row = by_tag[s.tag];
        row.label = s.tag;
        for (EvalRow* r : {&row, &all}) {
            r->n_windows += 1;
            r->mse += s.mse;
            r->mae += s.mae;
            r->baseline_mse += s.baseline_mse;
            r->baseline_mae += s.baseline_mae;
        }
    }

    EvalReport report;
    auto finalize = [&](EvalRow row) {
        const double n = static_cast<double>(row.n_windows);
        row.mse /= n;
        row.mae /= n;
        row.baseline_mse /= n;
        row.baseline_mae /= n;
        row.mse_delta_pct =
            row.baseline_mse > 0.0 ? 100.0 * (row.baseline_mse - row.mse) / row.baseline_mse : 0.0;
        row.fingerprint = opts.fingerprint;
        report.rows.push_back(std::move(row));
    };
    for (auto& [tag, row] : by_tag) finalize(row);
    finalize(all);
    return report;
}

} // namespace

const EvalRow& EvalReport::overall() const {
    for (const auto& row : rows) {
        if (row.label == "ALL") return row;
    }
    throw TsragError(ErrorCategory::FORMAT, "report has no ALL row");
}

std::string EvalReport::to_csv() const {
    std::ostringstream out;
    out << "label,n_windows,mse,mae,baseline_mse,baseline_mae,mse_delta_pct,fingerprint\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.label << ',' << r.n_windows;
        for (double v : {r.mse, r.mae, r.baseline_mse, r.baseline_mae, r.mse_delta_pct}) {
            std::snprintf(buf, sizeof(buf), ",%.10g", v);
            out << buf;
        }
        out << ',' << r.fingerprint << '\n';
    }
    return out.str();
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %10s %12s %12s %12s %12s %10s\n", "label", "windows",
                  "mse", "mae", "base_mse", "base_mae", "dMSE%");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%-20s %10zu %12.6f %12.6f %12.6f %12.6f %9.2f%%\n",
                      r.label.c_str(), r.n_windows, r.mse, r.mae, r.baseline_mse, r.baseline_mae,
                      r.mse_delta_pct);
        out << line;
    }
    return out.str();
}

EvalReport evaluate(const std::vector<TimeSeriesPair>& test_pairs, const Engine& engine,
                    const KnowledgeBase& kb, const GlobalScaler& scaler, const EvalOptions& opts) {
    if (opts.bypass_arm) {
        EvalOptions no_retrieval = opts;
        no_retrieval.k = 0;
        return run_eval(test_pairs, engine.backbone, kb, scaler, no_retrieval,
                        [&](const QueryKey& key, const std::vector<Vec>&) {
                            return key.embedding;
                        });
    }
    return run_eval(test_pairs, engine.backbone, kb, scaler, opts,
                    [&](const QueryKey& key, const std::vector<Vec>& horizons) {
                        ArmTrace tr = arm_forward(key.embedding, horizons, engine.arm, ArmMode::Eval);
                        return tr.e_final;
                    });
}

EvalReport evaluate_gate(const std::vector<TimeSeriesPair>& test_pairs,
                         const BackboneParams& backbone, const GateParams& gate,
                         const KnowledgeBase& kb, const GlobalScaler& scaler,
                         const EvalOptions& opts) {
    return run_eval(test_pairs, backbone, kb, scaler, opts,
                    [&](const QueryKey& key, const std::vector<Vec>& horizons) {
                        GateTrace tr = gated_fusion_forward(key.embedding, horizons, gate);
                        return tr.e_final;
                    });
}

namespace {

std::size_t parse_grid_count(const std::string& value, const char* axis) {
    try {
        std::size_t pos = 0;
        const unsigned long v = std::stoul(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw TsragError(ErrorCategory::FORMAT,
                         std::string("ablate: invalid ") + axis + " grid value \"" + value + "\"");
    }
}

} // namespace

AblationAxis parse_axis(const std::string& name) {
    if (name == "kb_regime") return AblationAxis::KbRegime;
    if (name == "top_k") return AblationAxis::TopK;
    if (name == "lookback") return AblationAxis::Lookback;
    if (name == "metric") return AblationAxis::Metric;
    if (name == "fusion") return AblationAxis::Fusion;
    throw TsragError(ErrorCategory::FORMAT, "unknown ablation axis: " + name);
}

EvalReport ablate(AblationAxis axis, const std::vector<std::string>& grid,
                  const AblationSetup& setup) {
    if (grid.empty()) throw TsragError(ErrorCategory::FORMAT, "ablate: empty grid");
    if (setup.test_pairs == nullptr || setup.engine == nullptr) {
        throw TsragError(ErrorCategory::FORMAT, "ablate: setup is incomplete");
    }
    const auto base_kb = setup.kbs.find(setup.base_regime);
    if (base_kb == setup.kbs.end()) {
        throw TsragError(ErrorCategory::FORMAT, "ablate: base regime KB missing");
    }

    EvalReport table;
    for (const std::string& value : grid) {
        EvalOptions opts = setup.base;
        opts.fingerprint = setup.base.fingerprint + "/" + value;
        const KnowledgeBase* kb = base_kb->second;
        bool use_gate = false;

        switch (axis) {
            case AblationAxis::KbRegime: {
                const auto it = setup.kbs.find(value);
                if (it == setup.kbs.end()) {
                    throw TsragError(ErrorCategory::FORMAT, "ablate: no KB for regime " + value);
                }
                kb = it->second;
                break;
            }
            case AblationAxis::TopK:
                opts.k = parse_grid_count(value, "top_k");
                break;
            case AblationAxis::Lookback:
                opts.lookback = parse_grid_count(value, "lookback");
                break;
            case AblationAxis::Metric:
                opts.metric = DistanceMetric::parse(value, opts.metric.band.value_or(0));
                break;
            case AblationAxis::Fusion:
                if (value == "gate") {
                    use_gate = true;
                } else if (value != "arm") {
                    throw TsragError(ErrorCategory::FORMAT,
                                     "ablate: fusion grid values are arm|gate, got " + value);
                }
                break;
        }

        EvalReport run;
        if (use_gate) {
            if (setup.gate == nullptr) {
                throw TsragError(ErrorCategory::FORMAT, "ablate: fusion axis needs a trained gate");
            }
            run = evaluate_gate(*setup.test_pairs, setup.engine->backbone, *setup.gate, *kb,
                                setup.scaler, opts);
        } else {
            run = evaluate(*setup.test_pairs, *setup.engine, *kb, setup.scaler, opts);
        }
        EvalRow row = run.overall();
        row.label = value;
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace tsrag
