#ifndef TSRAG_HARNESS_HPP
#define TSRAG_HARNESS_HPP

#include <map>
#include <string>
#include <vector>

#include "tsrag/eval.hpp"
#include "tsrag/run_config.hpp"

namespace tsrag {

// Experiment plumbing shared by the CLI and the acceptance suite: corpus
// generation per KB regime, split/window bookkeeping, and the end-to-end
// pretrain -> build-KB -> train pipeline on one config.

// Regime corpora for the synthetic benchmark:
//   in-domain          the config's own corpus
//   distribution-shift same motif bank seed, periods x1.3 and amplitudes x1.5
//   cross-domain       a disjoint motif bank
//   multi-domain       union of the three corpora above
std::vector<Series> regime_corpus(const RunConfig& cfg, const std::string& regime);

const std::vector<std::string>& kb_regimes();

// Train-split windows at the KB stride (KB construction / training data).
std::vector<TimeSeriesPair> train_pairs(const std::vector<Series>& corpus, const RunConfig& cfg);
// Test-split windows at the evaluation stride.
std::vector<TimeSeriesPair> test_pairs(const std::vector<Series>& corpus, const RunConfig& cfg);
// Test-split windows whose horizon spans `rounds` forecast lengths (rolling).
std::vector<TimeSeriesPair> test_pairs_long(const std::vector<Series>& corpus,
                                            const RunConfig& cfg, std::size_t rounds);

std::vector<Series> train_split(const std::vector<Series>& corpus, const RunConfig& cfg);

struct Pipeline {
    std::vector<Series> corpus;
    std::vector<TimeSeriesPair> kb_pairs;   // train-split, KB stride
    std::vector<TimeSeriesPair> eval_pairs; // test-split, eval stride
    GlobalScaler scaler;
    Engine engine;
    KnowledgeBase kb; // in-domain
    std::vector<double> train_loss;
};

// Full desk-scale pipeline on the config's own corpus with an in-domain KB.
Pipeline run_pipeline(const RunConfig& cfg);

} // namespace tsrag

#endif
