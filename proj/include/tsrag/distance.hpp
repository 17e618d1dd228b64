#ifndef TSRAG_DISTANCE_HPP
#define TSRAG_DISTANCE_HPP

#include <optional>
#include <string>

#include "tsrag/linalg.hpp"

namespace tsrag {

enum class MetricKind { Euclidean, Cosine, Dtw };

struct DistanceMetric {
    MetricKind kind = MetricKind::Euclidean;
    // Sakoe-Chiba band half-width for DTW; unset = unconstrained.
    std::optional<int> band;

    static DistanceMetric parse(const std::string& name, int band = 0);
    std::string name() const;
    // Euclidean/Cosine search embeddings; DTW searches stored raw-space contexts.
    bool uses_embeddings() const { return kind != MetricKind::Dtw; }
};

// L2 norm of the difference.
double euclidean_distance(const Vec& a, const Vec& b);

// 1 - cos(a, b). Both inputs zero -> 0 (treated as identical); exactly one
// zero -> 1 (no directional information).
double cosine_distance(const Vec& a, const Vec& b);

// Square root of the DP-accumulated squared pointwise costs. An optional
// Sakoe-Chiba band restricts |i - j| <= band; band >= 1.
double dtw_distance(const Vec& a, const Vec& b, std::optional<int> band = std::nullopt);

double distance(const Vec& a, const Vec& b, const DistanceMetric& metric);

} // namespace tsrag

#endif
