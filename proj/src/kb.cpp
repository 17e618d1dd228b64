#include "tsrag/kb.hpp"

#include <algorithm>
#include <cmath>

#include "tsrag/binio.hpp"
#include "tsrag/error.hpp"
#include "tsrag/threading.hpp"

namespace tsrag {

namespace {
constexpr std::uint32_t kKbVersion = 1;
const char kKbMagic[4] = {'T', 'S', 'K', 'B'};
} // namespace

KnowledgeBase build_kb(const std::vector<TimeSeriesPair>& pairs, const BackboneParams& encoder,
                       const std::string& regime) {
    const auto& cfg = encoder.config;
    KnowledgeBase kb;
    kb.meta.context_len = cfg.context_len;
    kb.meta.horizon_len = cfg.horizon_len;
    kb.meta.embed_dim = cfg.embed_dim;
    kb.meta.encoder_hash = backbone_hash(encoder);
    kb.meta.regime = regime;

    kb.entries.resize(pairs.size());
    kb.embedding_matrix = Mat(pairs.size(), cfg.embed_dim);

    parallel_for(pairs.size(), [&](std::size_t i) {
        const auto& pr = pairs[i];
        require_len(pr.context, cfg.context_len, "build_kb context");
        require_len(pr.horizon, cfg.horizon_len, "build_kb horizon");
        KbEntry& e = kb.entries[i];
        e.context = zscore(pr.context, pr.norm_stats);
        e.horizon = zscore(pr.horizon, pr.norm_stats);
        e.origin = pr.origin;
        const Vec emb = encode(e.context, encoder);
        std::copy(emb.begin(), emb.end(), kb.embedding_matrix.row(i));
    });
    return kb;
}

QueryKey embed_query(const Vec& context_raw, const BackboneParams& encoder, std::size_t lookback) {
    const auto& cfg = encoder.config;
    require_len(context_raw, cfg.context_len, "embed_query context");
    QueryKey q;
    q.stats = compute_window_stats(context_raw);
    q.context_norm = zscore(context_raw, q.stats);
    if (lookback == 0 || lookback >= cfg.context_len) {
        q.embedding = encode(q.context_norm, encoder);
    } else {
        Vec masked(cfg.context_len, 0.0);
        std::copy(q.context_norm.end() - static_cast<std::ptrdiff_t>(lookback),
                  q.context_norm.end(), masked.end() - static_cast<std::ptrdiff_t>(lookback));
        q.embedding = encode(masked, encoder);
    }
    return q;
}

RetrievedSet top_k(const KnowledgeBase& kb, const QueryKey& query, std::size_t k,
                   const DistanceMetric& metric,
                   const std::optional<WindowOrigin>& exclude_origin) {
    RetrievedSet out;
    out.metric = metric;
    out.k = k;
    if (k == 0 || kb.size() == 0) return out;

    const std::size_t n = kb.size();
    // (distance, index) pairs ordered lexicographically; ties -> lower index.
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(n);

    if (metric.uses_embeddings()) {
        require_len(query.embedding, kb.meta.embed_dim, "top_k query embedding");
        Vec row(kb.meta.embed_dim);
        for (std::size_t i = 0; i < n; ++i) {
            if (exclude_origin && kb.entries[i].origin == *exclude_origin) continue;
            row.assign(kb.embedding_matrix.row(i), kb.embedding_matrix.row(i) + kb.meta.embed_dim);
            scored.emplace_back(distance(query.embedding, row, metric), i);
        }
    } else {
        require_len(query.context_norm, kb.meta.context_len, "top_k query context");
        for (std::size_t i = 0; i < n; ++i) {
            if (exclude_origin && kb.entries[i].origin == *exclude_origin) continue;
            scored.emplace_back(distance(query.context_norm, kb.entries[i].context, metric), i);
        }
    }

    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end());
    out.items.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        RetrievedItem item;
        item.index = scored[i].second;
        item.dist = scored[i].first;
        item.horizon = kb.entries[item.index].horizon;
        out.items.push_back(std::move(item));
    }
    return out;
}

void save_kb(const KnowledgeBase& kb, const std::string& path) {
    BinWriter w;
    w.magic(kKbMagic);
    w.u32(kKbVersion);
    w.u64(kb.meta.context_len);
    w.u64(kb.meta.horizon_len);
    w.u64(kb.meta.embed_dim);
    w.u64(kb.meta.encoder_hash);
    w.str(kb.meta.regime);
    w.u64(kb.size());
    for (std::size_t i = 0; i < kb.size(); ++i) {
        const KbEntry& e = kb.entries[i];
        w.str(e.origin.series_id);
        w.u64(e.origin.start);
        w.vec(e.context);
        Vec emb(kb.embedding_matrix.row(i), kb.embedding_matrix.row(i) + kb.meta.embed_dim);
        w.vec(emb);
        w.vec(e.horizon);
    }
    w.write_file(path);
}

KnowledgeBase load_kb(const std::string& path) {
    BinReader r = BinReader::from_file(path);
    r.expect_magic(kKbMagic, "knowledge base");
    const std::uint32_t version = r.u32();
    if (version != kKbVersion) {
        throw TsragError(ErrorCategory::FORMAT,
                         "knowledge base: unsupported version " + std::to_string(version));
    }
    KnowledgeBase kb;
    kb.meta.context_len = r.u64();
    kb.meta.horizon_len = r.u64();
    kb.meta.embed_dim = r.u64();
    kb.meta.encoder_hash = r.u64();
    kb.meta.regime = r.str();
    const std::uint64_t n = r.u64();
    kb.entries.resize(n);
    kb.embedding_matrix = Mat(n, kb.meta.embed_dim);
    for (std::uint64_t i = 0; i < n; ++i) {
        KbEntry& e = kb.entries[i];
        e.origin.series_id = r.str();
        e.origin.start = r.u64();
        e.context = r.vec();
        Vec emb = r.vec();
        e.horizon = r.vec();
        if (e.context.size() != kb.meta.context_len || emb.size() != kb.meta.embed_dim ||
            e.horizon.size() != kb.meta.horizon_len) {
            throw TsragError(ErrorCategory::FORMAT,
                             "knowledge base: entry " + std::to_string(i) + " has wrong shape");
        }
        std::copy(emb.begin(), emb.end(), kb.embedding_matrix.row(i));
    }
    if (!r.at_end()) throw TsragError(ErrorCategory::FORMAT, "knowledge base: trailing bytes");
    return kb;
}

KnowledgeBase load_kb(const std::string& path, std::uint64_t active_encoder_hash,
                      bool allow_hash_mismatch) {
    KnowledgeBase kb = load_kb(path);
    if (kb.meta.encoder_hash != active_encoder_hash && !allow_hash_mismatch) {
        throw TsragError(ErrorCategory::HASH_MISMATCH,
                         "knowledge base was built with encoder " +
                             hash_hex(kb.meta.encoder_hash) + " but the active encoder is " +
                             hash_hex(active_encoder_hash));
    }
    return kb;
}

LeakageReport leakage_check(const KnowledgeBase& kb,
                            const std::vector<TimeSeriesPair>& test_pairs) {
    LeakageReport report;
    const std::uint64_t kb_window =
        static_cast<std::uint64_t>(kb.meta.context_len + kb.meta.horizon_len);
    for (std::size_t pi = 0; pi < test_pairs.size(); ++pi) {
        const auto& p = test_pairs[pi];
        const std::uint64_t p_begin = p.origin.start;
        const std::uint64_t p_end = p_begin + p.context.size() + p.horizon.size();
        for (std::size_t ki = 0; ki < kb.entries.size(); ++ki) {
            const auto& e = kb.entries[ki];
            if (e.origin.series_id != p.origin.series_id) continue;
            const std::uint64_t e_begin = e.origin.start;
            const std::uint64_t e_end = e_begin + kb_window;
            // Half-open interval intersection; a single shared index counts.
            if (e_begin < p_end && p_begin < e_end) {
                report.hits.push_back({ki, pi});
            }
        }
    }
    return report;
}

} // namespace tsrag
