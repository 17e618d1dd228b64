#ifndef TSRAG_KB_HPP
#define TSRAG_KB_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsrag/backbone.hpp"
#include "tsrag/distance.hpp"
#include "tsrag/series.hpp"

namespace tsrag {

struct KbEntry {
    Vec context;  // instance-normalized, length T
    Vec horizon;  // normalized by the same context stats, length L
    WindowOrigin origin;
};

struct KbMeta {
    std::size_t context_len = 0;
    std::size_t horizon_len = 0;
    std::size_t embed_dim = 0;
    std::uint64_t encoder_hash = 0;
    std::string regime; // in-domain | distribution-shift | cross-domain | multi-domain
};

// Ordered (context, embedding, horizon) triplets with a contiguous embedding
// block for search. Immutable after build; queries never synchronize.
struct KnowledgeBase {
    std::vector<KbEntry> entries;
    Mat embedding_matrix; // n x d, row i belongs to entries[i]
    KbMeta meta;

    std::size_t size() const { return entries.size(); }
};

// Entry order = input order. Contexts normalized per window; horizons by the
// same context stats; embeddings computed on the normalized contexts.
KnowledgeBase build_kb(const std::vector<TimeSeriesPair>& pairs, const BackboneParams& encoder,
                       const std::string& regime);

struct QueryKey {
    Vec embedding;    // length d
    Vec context_norm; // length T (full window, for DTW search)
    WindowStats stats;
};

// Instance-normalizes the raw window with its own stats and encodes it. A
// lookback m < T keeps only the last m normalized steps, zero-padding on the
// left before patching (retrieval-side masking; the full-context embedding is
// still what ARM consumes).
QueryKey embed_query(const Vec& context_raw, const BackboneParams& encoder,
                     std::size_t lookback = 0);

struct RetrievedItem {
    std::size_t index;
    double dist;
    Vec horizon; // copy of the stored normalized horizon
};

struct RetrievedSet {
    std::vector<RetrievedItem> items; // ascending distance, ties by lower index
    DistanceMetric metric;
    std::size_t k = 0;
};

// Exact top-k over the flat index: full scan, min(k, n) results sorted by
// (distance, index). Entries matching exclude_origin are skipped.
RetrievedSet top_k(const KnowledgeBase& kb, const QueryKey& query, std::size_t k,
                   const DistanceMetric& metric,
                   const std::optional<WindowOrigin>& exclude_origin = std::nullopt);

// File format "TSKB": meta block then per-entry context/embedding/horizon.
void save_kb(const KnowledgeBase& kb, const std::string& path);
KnowledgeBase load_kb(const std::string& path);
// Verifies the stored encoder hash against the active encoder unless
// allow_hash_mismatch; mismatch names both hashes.
KnowledgeBase load_kb(const std::string& path, std::uint64_t active_encoder_hash,
                      bool allow_hash_mismatch = false);

struct LeakageHit {
    std::size_t kb_index;
    std::size_t pair_index;
};

struct LeakageReport {
    std::vector<LeakageHit> hits;
    bool clean() const { return hits.empty(); }
};

// Flags every KB entry whose (series id, [start, start+T+L)) range shares at
// least one index with a test pair's range.
LeakageReport leakage_check(const KnowledgeBase& kb, const std::vector<TimeSeriesPair>& test_pairs);

} // namespace tsrag

#endif
