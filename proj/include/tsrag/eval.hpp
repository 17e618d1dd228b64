#ifndef TSRAG_EVAL_HPP
#define TSRAG_EVAL_HPP

#include <map>
#include <string>
#include <vector>

#include "tsrag/infer.hpp"
#include "tsrag/metrics.hpp"
#include "tsrag/series.hpp"

namespace tsrag {

struct EvalOptions {
    std::size_t k = 10;
    DistanceMetric metric;
    std::size_t lookback = 0;
    bool allow_leakage = false;
    bool bypass_arm = false; // score the raw backbone path against itself
    std::string fingerprint;
};

struct EvalRow {
    std::string label;      // dataset tag, "ALL", or the ablated grid value
    std::size_t n_windows = 0;
    double mse = 0.0;
    double mae = 0.0;
    double baseline_mse = 0.0; // ARM-bypass (backbone-only) on the same windows
    double baseline_mae = 0.0;
    double mse_delta_pct = 0.0; // improvement over the baseline, positive = better
    std::string fingerprint;
};

struct EvalReport {
    std::vector<EvalRow> rows;

    const EvalRow& overall() const; // the "ALL" row
    std::string to_csv() const;
    std::string to_text() const;
};

// Forecasts every test window, standardizes targets and forecasts with the
// train-split global scaler, and aggregates per-window MSE/MAE per dataset
// tag plus an "ALL" row. The ARM-bypass path runs on the same windows for the
// delta column. Refuses leaking KBs unless allow_leakage.
EvalReport evaluate(const std::vector<TimeSeriesPair>& test_pairs, const Engine& engine,
                    const KnowledgeBase& kb, const GlobalScaler& scaler, const EvalOptions& opts);

// Same protocol with the gated-fusion baseline in place of the mixer.
EvalReport evaluate_gate(const std::vector<TimeSeriesPair>& test_pairs,
                         const BackboneParams& backbone, const GateParams& gate,
                         const KnowledgeBase& kb, const GlobalScaler& scaler,
                         const EvalOptions& opts);

enum class AblationAxis { KbRegime, TopK, Lookback, Metric, Fusion };

AblationAxis parse_axis(const std::string& name);

struct AblationSetup {
    const std::vector<TimeSeriesPair>* test_pairs = nullptr;
    const Engine* engine = nullptr;
    const GateParams* gate = nullptr; // required for the fusion axis
    // regime name -> KB; the base regime must be present
    std::map<std::string, const KnowledgeBase*> kbs;
    std::string base_regime = "in-domain";
    GlobalScaler scaler;
    EvalOptions base;
};

// One summary row per grid value; every run shares the test windows and
// differs from the base config only in the ablated axis.
EvalReport ablate(AblationAxis axis, const std::vector<std::string>& grid,
                  const AblationSetup& setup);

} // namespace tsrag

#endif
