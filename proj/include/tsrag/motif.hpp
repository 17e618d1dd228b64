#ifndef TSRAG_MOTIF_HPP
#define TSRAG_MOTIF_HPP

#include <cstdint>
#include <vector>

#include "tsrag/series.hpp"

namespace tsrag {

// Synthetic corpus: each series is a random convex mixture of 1-3 bank motifs
// plus Gaussian noise. Desk-scale stand-in for a large pretraining corpus.

enum class MotifKind { Sine, Sawtooth, Trend };

struct Motif {
    MotifKind kind = MotifKind::Sine;
    // Integer period keeps sine/sawtooth exactly periodic on the integer grid.
    std::uint32_t period = 24;
    double amplitude = 1.0;
    double phase = 0.0; // in [0, 1) cycles
    double slope = 0.0; // Trend only, units per step
};

struct MotifBankOptions {
    std::uint64_t seed = 1;
    std::size_t size = 8;
    std::uint32_t min_period = 20;
    std::uint32_t max_period = 90;
    double period_scale = 1.0;    // distribution-shift knob
    double amplitude_scale = 1.0; // distribution-shift knob
};

// Deterministic bank; motif kinds cycle Sine, Sawtooth, Trend by index so a
// bank of size 1 is a pure sine.
std::vector<Motif> make_motif_bank(const MotifBankOptions& opts);

double motif_value(const Motif& m, std::uint64_t t);

struct MotifCorpusOptions {
    std::uint64_t seed = 42;
    std::size_t n_series = 60;
    std::size_t series_len = 4000;
    double noise_std = 0.1;
    std::string source_tag = "motif";
};

// Mixture weights are drawn uniform and normalized to sum 1, so noise_std = 0
// with a single-motif bank reproduces the motif exactly.
std::vector<Series> generate_motif_corpus(const std::vector<Motif>& bank,
                                          const MotifCorpusOptions& opts);

// Convenience wrapper: bank derived from the same seed.
std::vector<Series> generate_motif_corpus(std::uint64_t seed, std::size_t n_series,
                                          std::size_t len, std::size_t motif_bank_size,
                                          double noise_std);

} // namespace tsrag

#endif
